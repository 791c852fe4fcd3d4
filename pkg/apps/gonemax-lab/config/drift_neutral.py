"""
Genetic drift under the constant objective.
Every comparison is a tie, so the tracked position only sees random-walk steps.
"""

EXPERIMENT_KIND = "drift"
OBJECTIVE = "constant"
TRACE_LEVEL = "full"

N_VALUES = [20]
R_VALUES = [4]
K_RULE = {"kind": "explicit", "value": 400}

REPETITIONS = 50
BASE_SEED = 11
MAX_ITERATIONS_RULE = {"kind": "explicit", "value": 1000}

DRIFT_POSITION = 0
DRIFT_SUFFIX_START = 2  # upper half of the values
DRIFT_HORIZON = 1000

ACCEPTANCE = {
    "max_biased_steps": 0,
}
