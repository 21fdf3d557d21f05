"""Constants for the hierarchical navigation control package."""

import logging

LOGGER = logging.getLogger(__package__)

# Absolute tolerance for hyperplane and boundary comparisons.
EPS_GEOM = 1e-9

DEFAULT_ALPHA = 0.2
DEFAULT_BETA = 1.0
DEFAULT_DT = 5e-3
DEFAULT_T_MAX = 100.0

GOAL_TOL_FACTOR = 1e-3
LLOYD_MAX_ITERATIONS = 100

STALL_STEPS = 1000
STALL_SPEED_FACTOR = 1e-9
PERTURBATION_FACTOR = 1e-6

EXIT_GOAL_REACHED = 0
EXIT_INVALID_INPUT = 1
EXIT_STALL = 2
EXIT_TIMEOUT = 3
