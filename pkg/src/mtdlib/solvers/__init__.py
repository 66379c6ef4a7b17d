from mtdlib.solvers.constraints import *  # noqa:F403
from mtdlib.solvers.evaluate import *  # noqa:F403
from mtdlib.solvers.model import *  # noqa:F403
from mtdlib.solvers.search import *  # noqa:F403
