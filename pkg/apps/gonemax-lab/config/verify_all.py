"""
Monte Carlo sweep over every bound verifier, at the sample sizes the checks call for.
"""

EXPERIMENT_KIND = "verify"
BASE_SEED = 42
SIGNIFICANCE = 1e-3

ORACLES = [
    "convolution",
    "variance",
    "biased-window",
    "neutral-concentration",
    "reinforced-bernoulli",
    "drift",
    "multiplicative-drift",
    "random-walk-contribution",
]

ORACLE_SETTINGS = {
    "convolution": {"instances": 100_000, "max_m": 20, "max_rho": 10, "exact_instances": 100},
    "variance": {"n": 101, "r": 11, "samples": 1_000_000, "slack": 1.05},
    "biased-window": {"n": 50, "r": 8, "deltas": [0, 1, 4], "pairs": 100_000},
    "neutral-concentration": {"r": 4, "K": 400, "t": 1000, "alpha": 0.5, "runs": 10_000},
    "reinforced-bernoulli": {"t": 1000, "p": 0.5, "delta": 0.5, "b": 0.5, "trajectories": 100_000},
    "drift": {"n": 101, "r": 11, "kappa": 0, "c_drift": 0.4, "samples": 1_000_000},
    "multiplicative-drift": {"delta": 0.01, "q": 0.02, "trajectories": 10_000},
    "random-walk-contribution": {"n": 10, "r": 4, "c_star": 1.0, "c_stop": 0.1, "runs": 200},
}

ACCEPTANCE = {
    "max_violations": 0,
}
