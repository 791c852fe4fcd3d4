"""
Exactness suite: every iteration of 20 full runs must keep each row summing to K with
counts in [0, K] and no count moving by more than one.
"""

EXPERIMENT_KIND = "run"
OBJECTIVE = "g-onemax"

N_VALUES = [50]
R_VALUES = [8]
K_RULE = {"kind": "explicit", "value": 400}

REPETITIONS = 20
BASE_SEED = 100
MAX_ITERATIONS_RULE = {"kind": "explicit", "value": 1_000_000}

ACCEPTANCE = {
    "exact_invariants": True,
}
