import os

############### SIMULATION SPECIFIC PARAMETERS ###############
# packet-level simulator
DEFAULT_PACKETS = 10 ** 6
MIN_PACKETS = 10 ** 4
DEFAULT_BATCHES = 20
MIN_BATCHES = 10
DEFAULT_SEED = 2024
# variates are drawn from numpy in chunks of this size
VARIATE_CHUNK = 1 << 14

# waiting-time optimizer
SEARCH_UPPER_FACTOR = 20  # upper bound on each wait, in units of E[S]
SEARCH_GRID_POINTS = 101
SEARCH_TOLERANCE_FACTOR = 1e-4  # refinement tolerance, in units of E[S]
SEARCH_MAX_DOUBLINGS = 3
SEARCH_RESTARTS = 3
SEARCH_RESTART_SEED = 7
QUASI_CONVEX_TOLERANCE_FACTOR = 1e-3

# above this value of lambda*eps, e^{-x}-weighted polynomials are summed with math.fsum
COMPENSATED_SUM_THRESHOLD = 30.0

results_dir = "results"
results_file = os.path.join(results_dir, "{}.csv")

############### SIMULATION SPECIFIC PARAMETERS ###############

############### DEFAULT PARAMETERS ###############
LOG_ENABLED = True
PRINT_ENABLED = False
CSV_FLOAT_FORMAT = '%.12g'
DEFAULT_JOBS = 1

############### DEFAULT PARAMETERS ###############
