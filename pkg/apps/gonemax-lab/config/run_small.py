"""
Smallest sanity campaign: one position, binary alphabet.
With n = 1 the optimum is sampled with probability >= 1/2 per iteration, so every replica
should find it long before the cap.
"""

EXPERIMENT_KIND = "run"
OBJECTIVE = "g-onemax"

N_VALUES = [1]
R_VALUES = [2]
K_RULE = {"kind": "explicit", "value": 2}

REPETITIONS = 100
BASE_SEED = 1
MAX_ITERATIONS_RULE = {"kind": "explicit", "value": 10_000}

ACCEPTANCE = {
    "min_success_fraction": 1.0,
}
