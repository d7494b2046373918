from .types import TMechanism, TDemandMode, TSweepParameter

#
# Market defaults
#

DEFAULT_T = 12.5
"""Fixed block bonus (tokens)"""

DEFAULT_R = 0.007
"""Transaction fee rate (tokens per data unit)"""

DEFAULT_LAMBDA = 15.0
"""Average block time (seconds)"""

DEFAULT_XI = 0.001
"""Propagation coefficient (seconds per data unit)"""

DEFAULT_C = 0.001
"""Unit resource cost (tokens per resource unit)"""

DEFAULT_D = 1000.0
"""Total resource supply (resource units)"""

DEFAULT_A1 = 1.97
DEFAULT_A2 = 0.35
DEFAULT_A3 = 1.02

DEFAULT_Q = 10.0
"""Constant demand of every miner in constant-demand markets"""

DEFAULT_BETA1 = 0.0
DEFAULT_BETA2 = 0.02

DEFAULT_S_MAX = 1024.0
"""Block size upper bound (data units)"""

DEFAULT_MINERS = 300
"""Default market size for sweeps and generated instances"""

DEFAULT_INSTANCES = 600
"""Default number of instances per sweep point"""

DEFAULT_PROBE_INSTANCES = 200
"""Default number of instances per probe run"""

DEFAULT_SEED = 20201029
"""Master seed used when neither a flag nor the environment provides one"""

SEED_ENV = 'CHAINMARKET_SEED'
"""Environment variable holding the fallback master seed"""

#
# Numerics
#

REL_TOLERANCE = 1e-9
"""Relative tolerance of welfare and density comparisons"""

ABS_TOLERANCE = 1e-12
"""Absolute floor of welfare and density comparisons"""

PROBE_TOLERANCE = 1e-9
"""Largest property violation a probe accepts"""

BRUTE_CHUNK = 1 << 16
"""Number of subsets evaluated per vectorized brute force chunk"""

BRUTE_MAX_N = 25
"""Hard limit of the brute force oracle"""

#
# Names
#

MECHANISM_CDB = TMechanism('cdb')
"""Constant-demand auction with VCG-style payments"""

MECHANISM_MDB = TMechanism('mdb')
"""Multi-demand auction with critical payments"""

MECHANISM_FRLS = TMechanism('frls')
"""Local search baseline, pay as bid"""

MECHANISM_BRUTE = TMechanism('brute')
"""Exhaustive welfare optimum, pay as bid"""

MODE_CONSTANT = TDemandMode('constant')
"""Every miner demands q"""

MODE_MULTI = TDemandMode('multi')
"""Demands drawn uniformly on [beta1*D, beta2*D]"""

PARAM_N = TSweepParameter('N')
PARAM_C = TSweepParameter('c')
PARAM_T = TSweepParameter('T')
PARAM_R = TSweepParameter('r')
PARAM_LAMBDA = TSweepParameter('lambda')
PARAM_THETA = TSweepParameter('theta')
PARAM_NONE = TSweepParameter('none')

SWEEP_PARAMETERS = (PARAM_N, PARAM_C, PARAM_T, PARAM_R, PARAM_LAMBDA, PARAM_THETA, PARAM_NONE)
"""Parameters a sweep may vary"""

#
# CLI exit codes
#

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID_INPUT = 2
EXIT_INVALID_CONFIG = 3
EXIT_TOO_LARGE = 4
EXIT_PROBE_VIOLATION = 5
