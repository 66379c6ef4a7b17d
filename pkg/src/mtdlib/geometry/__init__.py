from mtdlib.geometry.distance import *  # noqa:F403
