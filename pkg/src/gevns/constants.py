"""
Constants for gevns.
"""

import math

# Checkpoint wire format
CHECKPOINT_MAGIC = b"GVNS"
CHECKPOINT_VERSION = 1
# magic, version u32, n u32, L f64, t f64, nu f64, mu f64
CHECKPOINT_HEADER = "<4sIIdddd"

# Grid
MIN_GRID_POINTS = 8
DEFAULT_LENGTH = 2.0 * math.pi

# Field validation
SYMMETRY_TOLERANCE = 1e-10
MEAN_TOLERANCE = 1e-12

# Time stepping
CFL_NUMBER = 0.5
DT_REFRESH_STEPS = 10
SPINUP_DAMPING_TIMES = 10.0
ATTRACTOR_TOLERANCE = 1e-3
# log of the largest in-band stage growth factor tolerated without a warning
STAGE_GROWTH_LOG_LIMIT = 36.0

# Radius estimation
FIT_UPPER_FRACTION = 1e-2
FIT_FLOOR_FRACTION = 1e-13
FIT_CUTOFF_MARGIN = 2
FIT_MIN_SHELLS = 5
FIT_MIN_R2 = 0.98
UNDER_RESOLVED_RATIO = 1e-10

# Gronwall vorticity bound check
BOUND_SLACK = 1e-6
LP_EXPONENTS = (2, 4, 8, math.inf)

# Bound constants the analysis pins down
C2_NODES = math.sqrt(68.0 / math.pi)
C4_DIMENSION = 12.0
C5_LATTICE = 68.0 ** 0.25

# Experiments
SYNC_HORIZON_DAMPING_TIMES = 20.0
SYNC_THRESHOLD = 1e-6
SPREAD_FACTOR = 3.0
M2P_HEADROOM = 0.1

# Diagnostics CSV
CSV_COLUMNS = (
    "t",
    "energy",
    "enstrophy",
    "l2",
    "l4",
    "l8",
    "linf",
    "gevrey_half",
    "la",
    "r2",
    "accepted",
    "budget_residual",
)
CSV_FLOAT_FORMAT = "%.17g"
