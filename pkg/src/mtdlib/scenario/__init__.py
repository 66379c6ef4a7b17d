from mtdlib.scenario.generate import *  # noqa:F403
from mtdlib.scenario.scenario import *  # noqa:F403
