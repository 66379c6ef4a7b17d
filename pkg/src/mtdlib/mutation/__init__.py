from mtdlib.mutation.common import *  # noqa:F403
from mtdlib.mutation.range_mutation import *  # noqa:F403
from mtdlib.mutation.topology_mutation import *  # noqa:F403
