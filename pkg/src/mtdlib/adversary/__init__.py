from mtdlib.adversary.simulation import *  # noqa:F403
from mtdlib.adversary.statistics import *  # noqa:F403
