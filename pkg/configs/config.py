"""
Module Name: config.py
Description: Contains configuration settings for the simulator (default hyperparameters, byte widths,
             solver limits, output format tags), the numeric error codes and the shared debug hook.
Date: 2026-10-19
"""

import logging
import os

# Algorithm defaults
DEFAULT_ETA = 0.05
DEFAULT_P = 4
DEFAULT_R = 0.0
DEFAULT_T = 200
DEFAULT_N = 4
DEFAULT_D = 10
DEFAULT_SEED = 0
DEFAULT_SIGMA = 0.0
DEFAULT_HETEROGENEITY = 0.0

SUPPORTED_ALGORITHMS = ["power_ef", "dsgd", "naive_csgd", "classic_ef"]
SUPPORTED_COMPRESSORS = ["topk", "randomk", "rounding"]
SUPPORTED_FAMILIES = ["saddle_quartic", "heterogeneous_quadratic"]
SUPPORTED_SCHEDULES = ["none", "first", "second"]

# Default rounding base for general biased rounding
DEFAULT_ROUNDING_BASE = 2.0

# Wire widths used by byte accounting (u32 index, f64 value)
INDEX_BYTES = 4
VALUE_BYTES = 8

# Test box ||x||_inf <= B on which rho and f_max are reported for the quartic
BOX_BOUND = 10.0

# Spectrum of the shared quadratic curvature A
QUADRATIC_EIG_MIN = 1.0
QUADRATIC_EIG_MAX = 4.0

# Schedule constants
DEFAULT_KAPPA = 1.0
FAILURE_BUDGET = 0.01   # delta; iota = ln(1 / delta)

# Eigen-solver limits
LANCZOS_MAX_ITERS = 100
LANCZOS_TOL = 1e-8
LANCZOS_MAX_RESTARTS = 5
DENSE_EIGEN_MAX_DIM = 50

# Harness defaults
RECORD_STRIDE = 1
EIGEN_STRIDE = 10
ESCAPE_DELTA = 0.1
COMPARE_THRESHOLD = 0.1
OUT_DIR = "results"
METRICS_FORMAT_VERSION = "poweref-metrics v1"
REPORT_FORMAT_VERSION = "1.0"

# Error Codes
SUCCESS             = 0
CONFIG_ERROR        = 2 # invalid or inconsistent hyperparameters
DIMENSION_MISMATCH  = 3 # vectors or messages of different dimension
INDEX_OUT_OF_RANGE  = 4 # client index outside [0, n)
UPLINK_COUNT        = 5 # server received a number of uplinks different from n
EIGEN_BREAKDOWN     = 6 # Lanczos could not find a nonzero start vector
IO_ERROR            = 7 # output files could not be written or read
PROBLEM_MISMATCH    = 8 # compared configs do not share a problem
UNKNOWN_KEY         = 9 # experiment file contains an unrecognized key
BYTE_MISMATCH       = 10 # trace and ledger disagree on uplink bytes

ERROR_MSGS = {
    2: "Invalid configuration.",
    3: "Dimension mismatch.",
    4: "Client index out of range.",
    5: "Wrong number of uplinks.",
    6: "Lanczos breakdown.",
    7: "I/O error.",
    8: "Configurations do not share a problem.",
    9: "Unknown configuration key.",
    10: "Uplink byte accounting mismatch."
}

DEBUG = False

logger = logging.getLogger("poweref")

def debug(message):
    """Log debug messages if DEBUG is True."""
    if DEBUG:
        logger.debug(message)


def parse_threads(text):
    """Worker count from a POWEREF_THREADS value; blank or malformed values fall back to 1."""
    try:
        return max(1, int(text or 1))
    except ValueError:
        logger.warning(f"ignoring POWEREF_THREADS={text!r}, using 1 worker thread")
        return 1

# Caps worker threads for client fan-out and seed parallelism
THREADS = parse_threads(os.environ.get("POWEREF_THREADS", "1"))
