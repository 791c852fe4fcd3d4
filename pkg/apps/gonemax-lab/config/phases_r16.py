"""
Phase-ratio retention at n = 100, r = 16 (kappa* = 7).
In at least 90% of finished (position, phase) pairs every ratio mu(S_{nu+1}) / mu(S_nu)
should keep (1 - 1/kappa*)^3 of its start-of-phase value.
"""

EXPERIMENT_KIND = "phases"
OBJECTIVE = "g-onemax"

N_VALUES = [100]
R_VALUES = [16]
K_RULE = {"kind": "theorem", "c": 0.25}

REPETITIONS = 30
BASE_SEED = 3
MAX_ITERATIONS_RULE = {"kind": "multiple", "factor": 50}

THREADS = 4

ACCEPTANCE = {
    "min_retention_fraction": 0.9,
    "min_initial_ratio": "2/5",
}
