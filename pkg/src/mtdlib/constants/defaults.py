"""
Numeric defaults shared by the planners, the simulator and the command line.
"""

# Real-valued energy rates and budgets are scaled to integers by this factor
ENERGY_SCALE = 1000

# Search nodes per solver run before giving up with an "unknown" outcome
NODE_BUDGET = 10**7

# Largest candidate space the brute-force oracles will enumerate
ENUMERATION_GUARD = 10**6

# Fraction of one user-interval of throughput lost per reassociation
HANDOFF_COST = 0.01

DEFAULT_LOOKBACK = 1
DEFAULT_HORIZON = 10

# Candidate locations of generated scenarios: cells within this many grid steps
CANDIDATE_REACH = 2

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_VIOLATIONS = 3
