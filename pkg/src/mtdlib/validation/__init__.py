from mtdlib.validation.checks import *  # noqa:F403
from mtdlib.validation.oracles import *  # noqa:F403
