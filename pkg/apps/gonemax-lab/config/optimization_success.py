"""
Optimization success at n = 100, r = 8 with K from the c r sqrt(n) ln^2 n ln^2 r rule.
At least 95 of 100 seeded runs must sample the optimum within 10 K sqrt(n) ln n ln r iterations.
"""

EXPERIMENT_KIND = "run"
OBJECTIVE = "g-onemax"

N_VALUES = [100]
R_VALUES = [8]
K_RULE = {"kind": "theorem", "c": 0.25}

REPETITIONS = 100
BASE_SEED = 2024
MAX_ITERATIONS_RULE = {"kind": "multiple", "factor": 10}

ACCEPTANCE = {
    "min_success_fraction": 0.95,
}
