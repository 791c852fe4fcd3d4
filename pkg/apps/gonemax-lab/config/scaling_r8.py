"""
Runtime scaling for r = 8 over n in {64, 128, 256}.
The normalized median (iterations / (K sqrt(n) ln n ln r)) may vary by at most a factor 3.
"""

EXPERIMENT_KIND = "scaling"
OBJECTIVE = "g-onemax"

N_VALUES = [64, 128, 256]
R_VALUES = [8]
K_RULE = {"kind": "theorem", "c": 0.25}

REPETITIONS = 50
BASE_SEED = 7
MAX_ITERATIONS_RULE = {"kind": "multiple", "factor": 50}

THREADS = 4

ACCEPTANCE = {
    "max_normalized_spread": 3.0,
}
