"""
Closed-form bounds from the runtime analysis of the r-cGA on G-OneMax, and Monte Carlo
verifiers that stress-test them.

Step-level evaluators keep their explicit constants while runtime comparators are
constant-free. Statistical verdicts use one-sided tests at a fixed significance and a
BoundReport never claims a violation below that significance.
"""

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from core.python.rcga_pipeline.eda_core import (
    TRACE_FULL,
    FrequencyMatrix,
    make_rng,
    new_frequency_matrix,
    run,
    sample_values,
)
from core.python.rcga_pipeline.errors import InvalidParameterError, PreconditionError
from core.python.rcga_pipeline.fitness_core import G_ONEMAX, make_objective
from core.python.rcga_pipeline.hierarchy_core import build_hierarchy, mass
from core.python.rcga_pipeline.instrumentation_core import decompose
from core.python.shared.shared_logger import logger

SATISFIED = "satisfied"
VIOLATED = "violated"
SATISFIED_VACUOUSLY = "satisfied-vacuously"

DEFAULT_SIGNIFICANCE = 1e-3
FLOAT_SLACK = 1e-12


@dataclass
class BoundReport:
    oracle: str
    bound_value: float
    empirical_value: Optional[float]
    samples: int
    status: str
    parameters: Dict[str, object] = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.status != VIOLATED

    def parameters_json(self) -> str:
        return json.dumps(self.parameters, sort_keys=True, default=str)


# ---------------------------------------------------------------------------
# Convolution inequality
# ---------------------------------------------------------------------------

def conv_lhs(q: Sequence, m: int, rho: int):
    """
    sum_{d in [0..rho]} sum_{i in [1..m*rho+ - d]} q(i) q(i + d), with rho+ = max(1, rho).

    Float tables are evaluated with numpy; tables of Fractions are evaluated exactly.
    """
    length = m * max(1, rho)
    if m < 1 or rho < 0:
        raise InvalidParameterError(f"need m >= 1 and rho >= 0, got m={m}, rho={rho}")
    if len(q) != length:
        raise InvalidParameterError(f"q must have m*max(1, rho)={length} entries, got {len(q)}")
    if any(value < 0 for value in q):
        raise InvalidParameterError("q has negative entries")

    if any(isinstance(value, Fraction) for value in q):
        values = [Fraction(value) for value in q]
        return sum((values[i] * values[i + d] for d in range(rho + 1) for i in range(length - d)), Fraction(0))
    values = np.asarray(q, dtype=float)
    return float(sum(np.dot(values[:length - d], values[d:]) for d in range(min(rho, length - 1) + 1)))


def conv_rhs(M, m: int):
    """M^2 / (2m)."""
    if m < 1:
        raise InvalidParameterError(f"need m >= 1, got {m}")
    if isinstance(M, Fraction):
        return M * M / (2 * m)
    return M * M / (2.0 * m)


def verify_convolution(instances: int = 100_000, max_m: int = 20, max_rho: int = 10, exact_instances: int = 100,
                       seed: int = 0, significance: float = DEFAULT_SIGNIFICANCE) -> List[BoundReport]:
    """Random instances of the convolution inequality; any LHS < RHS - 1e-12 is a violation."""
    rng = make_rng(seed)
    violations = 0
    worst_ratio = math.inf
    exact_mismatches = 0
    for index in range(instances):
        m = int(rng.integers(1, max_m + 1))
        rho = int(rng.integers(0, max_rho + 1))
        q = rng.random(m * max(1, rho))
        lhs = conv_lhs(q, m, rho)
        rhs = conv_rhs(float(q.sum()), m)
        if lhs < rhs - FLOAT_SLACK:
            violations += 1
        if rhs > 0:
            worst_ratio = min(worst_ratio, lhs / rhs)
        if index < exact_instances:
            exact = conv_lhs([Fraction(value) for value in q.tolist()], m, rho)
            if abs(float(exact) - lhs) > FLOAT_SLACK * max(1.0, abs(lhs)):
                exact_mismatches += 1

    status = SATISFIED if violations == 0 and exact_mismatches == 0 else VIOLATED
    return [BoundReport(oracle="convolution", bound_value=1.0,
                        empirical_value=None if worst_ratio == math.inf else worst_ratio,
                        samples=instances, status=status,
                        parameters={"max_m": max_m, "max_rho": max_rho, "violations": violations,
                                    "exact_instances": min(exact_instances, instances),
                                    "exact_mismatches": exact_mismatches})]


# ---------------------------------------------------------------------------
# Rest-sum variance
# ---------------------------------------------------------------------------

def variance_bound(n: int, r: int, j_star: int) -> int:
    """(n - 1)(r - 1 - j*)^2."""
    if not 0 <= j_star <= r - 1:
        raise InvalidParameterError(f"j_star={j_star} outside [0..{r - 1}]")
    return (n - 1) * (r - 1 - j_star) ** 2


def check_confined(m: FrequencyMatrix, i: int, j_star: int):
    """Every row k != i must carry all of its mass on [j_star .. r-1]."""
    below = m.counts[:, :j_star].sum(axis=1)
    below[i] = 0
    if below.any():
        row = int(np.nonzero(below)[0][0])
        raise PreconditionError(f"row {row} has mass {int(below[row])}/{m.K} below j_star={j_star}")


def confined_matrix(n: int, r: int, K: int, j_star: int) -> FrequencyMatrix:
    """Rows spread K as evenly as possible over [j_star .. r-1], remainder on the top values."""
    if not 0 <= j_star <= r - 1:
        raise InvalidParameterError(f"j_star={j_star} outside [0..{r - 1}]")
    m = new_frequency_matrix(n, r, K)
    width = r - j_star
    row = np.zeros(r, dtype=np.int64)
    row[j_star:] = K // width
    if K % width:
        row[r - K % width:] += 1
    m.counts[:] = row
    return m


def empirical_rest_variance(m: FrequencyMatrix, i: int, samples: int, rng: np.random.Generator,
                            j_star: Optional[int] = None) -> float:
    """Sample variance of S_{1,i} (sum of a sample over all positions but i)."""
    if j_star is not None:
        check_confined(m, i, j_star)
    if samples < 2:
        raise InvalidParameterError("need at least two samples for a variance")
    chunk = 100_000
    total = 0.0
    total_sq = 0.0
    for begin in range(0, samples, chunk):
        size = min(chunk, samples - begin)
        values = sample_values(m, rng, size)
        rest = (values.sum(axis=1) - values[:, i]).astype(float)
        total += rest.sum()
        total_sq += np.dot(rest, rest)
    mean = total / samples
    return (total_sq - samples * mean * mean) / (samples - 1)


def verify_variance(n: int = 101, r: int = 11, K: Optional[int] = None, j_stars: Optional[Sequence[int]] = None,
                    samples: int = 1_000_000, slack: float = 1.05, uniform_tolerance: float = 0.02,
                    position: int = 0, seed: int = 0, significance: float = DEFAULT_SIGNIFICANCE) -> List[BoundReport]:
    """
    Empirical rest-sum variance against (n-1)(r-1-j*)^2 on confined matrices; the uniform
    case is also checked against the exact value (n-1)(r^2-1)/12.
    """
    K = K or r * (r - 1)
    j_stars = list(j_stars) if j_stars is not None else [0, math.ceil(r / 3), r - 2]
    rng = make_rng(seed)
    reports = []
    for j_star in j_stars:
        m = new_frequency_matrix(n, r, K) if j_star == 0 else confined_matrix(n, r, K, j_star)
        bound = variance_bound(n, r, j_star)
        empirical = empirical_rest_variance(m, position, samples, rng, j_star=j_star)
        status = SATISFIED if empirical <= bound * slack else VIOLATED
        reports.append(BoundReport(oracle="variance", bound_value=float(bound), empirical_value=empirical,
                                   samples=samples, status=status,
                                   parameters={"n": n, "r": r, "K": K, "j_star": j_star, "slack": slack}))
        if j_star == 0:
            exact = (n - 1) * (r * r - 1) / 12.0
            ok = abs(empirical - exact) <= uniform_tolerance * exact
            reports.append(BoundReport(oracle="variance-uniform-exact", bound_value=exact, empirical_value=empirical,
                                       samples=samples, status=SATISFIED if ok else VIOLATED,
                                       parameters={"n": n, "r": r, "tolerance": uniform_tolerance}))
    return reports


# ---------------------------------------------------------------------------
# Biased-step window
# ---------------------------------------------------------------------------

def biased_window_bound(delta: int, sigma: float) -> float:
    """9 max{1, delta} / (32(4 sigma - 1)), a lower bound on P[D_i in [0..delta]]."""
    if delta < 0:
        raise InvalidParameterError(f"delta must be non-negative, got {delta}")
    if sigma <= 0.25:
        raise InvalidParameterError(f"sigma must exceed 1/4, got {sigma}")
    if sigma < (delta + 2) / 4:
        raise InvalidParameterError(f"sigma={sigma} below (delta+2)/4={(delta + 2) / 4}")
    return 9 * max(1, delta) / (32 * (4 * sigma - 1))


def window_preconditions(m: FrequencyMatrix, i: int, sigma: float) -> bool:
    """The mean +- 2 sigma window of S_{l,i} fits into [0 .. (n-1)(r-1)]."""
    values = np.arange(m.r)
    row_means = (m.counts * values).sum(axis=1) / m.K
    mean = float(row_means.sum() - row_means[i])
    return (math.floor(mean - 2 * sigma) + 1 >= 0
            and math.ceil(mean + 2 * sigma) - 1 <= (m.n - 1) * (m.r - 1))


def lower_bound_status(successes: int, samples: int, bound: float, significance: float) -> str:
    """One-sided test that the event frequency is below a claimed lower bound."""
    if bound <= 0:
        return SATISFIED_VACUOUSLY
    if bound >= 1:
        return VIOLATED if successes < samples else SATISFIED
    pvalue = stats.binomtest(successes, samples, bound, alternative="less").pvalue
    return VIOLATED if pvalue < significance else SATISFIED


def upper_bound_status(events: int, samples: int, bound: float, significance: float) -> str:
    """One-sided test that the event frequency exceeds a claimed upper bound."""
    if bound >= 1:
        return SATISFIED_VACUOUSLY
    if bound <= 0:
        return VIOLATED if events > 0 else SATISFIED
    pvalue = stats.binomtest(events, samples, bound, alternative="greater").pvalue
    return VIOLATED if pvalue < significance else SATISFIED


def verify_biased_window(n: int = 50, r: int = 8, K: Optional[int] = None, deltas: Sequence[int] = (0, 1, 4),
                         pairs: int = 100_000, position: int = 0, seed: int = 0,
                         significance: float = DEFAULT_SIGNIFICANCE) -> List[BoundReport]:
    """P[D_i in [0..delta]] at uniform initialization against the biased-window bound."""
    K = K or r
    m = new_frequency_matrix(n, r, K)
    sigma = math.sqrt(variance_bound(n, r, 0))
    window_ok = window_preconditions(m, position, sigma)
    if not window_ok:
        logger.warning(f"biased-window: mean +- 2 sigma window leaves the value range for n={n}, r={r}")
    rng = make_rng(seed)
    first = sample_values(m, rng, pairs)
    second = sample_values(m, rng, pairs)
    d = (first.sum(axis=1) - first[:, position]) - (second.sum(axis=1) - second[:, position])

    reports = []
    for delta in deltas:
        bound = biased_window_bound(delta, sigma)
        hits = int(np.count_nonzero((d >= 0) & (d <= delta)))
        reports.append(BoundReport(oracle="biased-window", bound_value=bound, empirical_value=hits / pairs,
                                   samples=pairs, status=lower_bound_status(hits, pairs, bound, significance),
                                   parameters={"n": n, "r": r, "delta": delta, "sigma": sigma,
                                               "window_preconditions": window_ok}))
    return reports


# ---------------------------------------------------------------------------
# Drift of suffix masses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DriftPrediction:
    value: float
    fallback: float
    dominates_fallback: bool


def drift_prediction(n: int, r: int, kappa: int, c_drift: float, s: float) -> DriftPrediction:
    """
    Per-step drift lower bound for mu_i(S_{kappa+1}) (and for mu_i(S_{kappa+2})), times K.

    s is mu_i(S_{kappa+1}); the value is
    9 c s(1-s) max{1, (r-1-ell)/2} / (32(4 sqrt((n-1)(r-1-ell)^2) - 1)) with ell = ell_kappa,
    and the fallback is c s(1-s) / (29 sqrt(n)).
    """
    if r < 10:
        raise InvalidParameterError(f"drift bound needs r >= 10, got r={r}")
    if n < 4:
        raise InvalidParameterError(f"drift bound needs n >= 4, got n={n}")
    if not 0 < s < 1:
        raise InvalidParameterError(f"s must lie in (0, 1), got {s}")
    if c_drift <= 0:
        raise InvalidParameterError(f"c_drift must be positive, got {c_drift}")
    h = build_hierarchy(r)
    if not 0 <= kappa <= h.kappa_star - 1:
        raise InvalidParameterError(f"kappa={kappa} outside [0..{h.kappa_star - 1}]")
    ell = h.ells[kappa]
    if ell > r - 10:
        raise InvalidParameterError(f"drift bound needs ell_kappa <= r-10, got ell_{kappa}={ell}")

    width = r - 1 - ell
    value = 9 * c_drift * s * (1 - s) * max(1.0, width / 2) / (32 * (4 * math.sqrt((n - 1) * width ** 2) - 1))
    fallback = c_drift * s * (1 - s) / (29 * math.sqrt(n))
    return DriftPrediction(value=value, fallback=fallback, dominates_fallback=value >= fallback)


def _mean_status(mean: float, std: float, samples: int, bound: float, significance: float) -> str:
    """One-sided z-test: violated only if the upper confidence limit of the mean is below bound."""
    upper = mean + stats.norm.ppf(1 - significance) * std / math.sqrt(samples)
    return VIOLATED if upper < bound else SATISFIED


def verify_drift(n: int = 101, r: int = 11, K: Optional[int] = None, kappa: int = 0, c_drift: float = 0.4,
                 samples: int = 1_000_000, position: int = 0, seed: int = 0,
                 significance: float = DEFAULT_SIGNIFICANCE) -> List[BoundReport]:
    """
    One-step Monte Carlo drift of mu_i(S_{kappa+1}) and mu_i(S_{kappa+2}) (times K) and the
    probability of a large biased step, at the uniform matrix (which is confined to S_0).
    """
    K = K or r * 10
    h = build_hierarchy(r)
    m = new_frequency_matrix(n, r, K)
    s_lower = mass(m, position, h.suffix(kappa + 1))
    s_upper = mass(m, position, h.suffix(kappa + 2))
    witnessed = s_upper / s_lower
    if mass(m, position, h.suffix(kappa)) != 1:
        raise PreconditionError(f"position {position} is not confined to S_{kappa}")
    if witnessed < Fraction(c_drift).limit_denominator(10 ** 9):
        raise PreconditionError(f"mu(S_{kappa + 2})/mu(S_{kappa + 1}) = {float(witnessed):.4f} below c_drift={c_drift}")
    prediction = drift_prediction(n, r, kappa, c_drift, float(s_lower))

    rng = make_rng(seed)
    moves_lower = np.empty(samples, dtype=np.int64)
    moves_upper = np.empty(samples, dtype=np.int64)
    large_biased = 0
    chunk = 100_000
    start_lower, start_upper = h.starts[kappa + 1], h.starts[kappa + 2]
    block_low, block_high = h.starts[kappa], h.starts[kappa + 1]
    for begin in range(0, samples, chunk):
        size = min(chunk, samples - begin)
        first = sample_values(m, rng, size)
        second = sample_values(m, rng, size)
        f1 = first.sum(axis=1)
        f2 = second.sum(axis=1)
        coin = rng.integers(0, 2, size=size)
        first_wins = (f1 > f2) | ((f1 == f2) & (coin == 0))
        a, b = first[:, position], second[:, position]
        winner = np.where(first_wins, a, b)
        loser = np.where(first_wins, b, a)
        moves_lower[begin:begin + size] = (winner >= start_lower).astype(np.int64) - (loser >= start_lower)
        moves_upper[begin:begin + size] = (winner >= start_upper).astype(np.int64) - (loser >= start_upper)

        d = (f1 - a) - (f2 - b)
        biased = (np.abs(a - b) > np.abs(d)) & (f1 != f2)
        low, high = np.minimum(a, b), np.maximum(a, b)
        event = biased & (low >= block_low) & (low < block_high) & (high >= start_upper) & (winner == high)
        large_biased += int(np.count_nonzero(event))

    parameters = {"n": n, "r": r, "K": K, "kappa": kappa, "c_drift": c_drift, "s": float(s_lower),
                  "witnessed_c": float(witnessed), "fallback": prediction.fallback,
                  "dominates_fallback": prediction.dominates_fallback}
    reports = []
    for name, moves in (("drift-lower-suffix", moves_lower), ("drift-upper-suffix", moves_upper)):
        mean = float(moves.mean())
        std = float(moves.std(ddof=1))
        reports.append(BoundReport(oracle=name, bound_value=prediction.value, empirical_value=mean, samples=samples,
                                   status=_mean_status(mean, std, samples, prediction.value, significance),
                                   parameters=parameters))
    reports.append(BoundReport(oracle="large-biased-probability", bound_value=prediction.value,
                               empirical_value=large_biased / samples, samples=samples,
                               status=lower_bound_status(large_biased, samples, prediction.value, significance),
                               parameters=parameters))
    return reports


# ---------------------------------------------------------------------------
# Genetic drift under random-walk steps
# ---------------------------------------------------------------------------

def martingale_beta(alpha: float, p0: float) -> float:
    lower = (1 - alpha) * p0
    upper = (1 + alpha) * p0
    return max(min(lower, 1 - lower), min(upper, 1 - upper))


def martingale_bound(alpha: float, p0: float, K: int, t: int, beta: float) -> float:
    """2 exp(-3 (alpha P0 K)^2 / (4 max{6 t beta, alpha P0 K})); 2 when alpha P0 = 0."""
    if alpha < 0 or not 0 <= p0 <= 1:
        raise InvalidParameterError(f"need alpha >= 0 and P0 in [0, 1], got alpha={alpha}, P0={p0}")
    if K < 1 or t < 1:
        raise InvalidParameterError(f"need K, t >= 1, got K={K}, t={t}")
    radius = alpha * p0 * K
    denominator = 4 * max(6 * t * beta, radius)
    if denominator == 0:
        return 2.0
    return 2 * math.exp(-3 * radius ** 2 / denominator)


def mcdiarmid_bound(epsilon: float, v_hat: float, b: float) -> float:
    """2 exp(-eps^2 / (2 v_hat + 2 b eps / 3)) for a martingale with step bound b and variance sum v_hat."""
    if epsilon < 0 or v_hat < 0 or b < 0:
        raise InvalidParameterError("epsilon, v_hat and b must be non-negative")
    denominator = 2 * v_hat + 2 * b * epsilon / 3
    if denominator == 0:
        return 2.0
    return 2 * math.exp(-epsilon ** 2 / denominator)


def neutral_max_deviation(r: int, K: int, steps: int, replicas: int, value_start: int,
                          rng: np.random.Generator) -> np.ndarray:
    """
    One row of the r-cGA under a constant objective, simulated for many replicas at once.
    Returns, per replica, max_s |mass numerator of [value_start..r-1] at s - at 0| over s <= steps.

    Under a constant objective every comparison is a tie, so each row evolves on its own
    from two samples of that row in random order.
    """
    counts = np.full((replicas, r), K // r, dtype=np.int64)
    start = counts[:, value_start:].sum(axis=1)
    current = start.copy()
    deviation = np.zeros(replicas, dtype=np.int64)
    rows = np.arange(replicas)
    for _ in range(steps):
        cumulative = np.cumsum(counts, axis=1)
        u = rng.integers(0, K, size=(replicas, 2))
        values = (cumulative[:, None, :] <= u[:, :, None]).sum(axis=2)
        coin = rng.integers(0, 2, size=replicas)
        winner = values[rows, coin]
        loser = values[rows, 1 - coin]
        moving = rows[winner != loser]
        counts[moving, winner[moving]] += 1
        counts[moving, loser[moving]] -= 1
        current += (winner >= value_start).astype(np.int64) - (loser >= value_start)
        np.maximum(deviation, np.abs(current - start), out=deviation)
    return deviation


def verify_neutral_concentration(r: int = 4, K: int = 400, t: int = 1000, alpha: float = 0.5,
                                 value_start: Optional[int] = None, runs: int = 10_000, seed: int = 0,
                                 significance: float = DEFAULT_SIGNIFICANCE) -> List[BoundReport]:
    """Frequency of a deviation >= alpha P0 within t neutral steps against the martingale bound."""
    value_start = r // 2 if value_start is None else value_start
    p0 = (r - value_start) / r
    beta = martingale_beta(alpha, p0)
    bound = martingale_bound(alpha, p0, K, t, beta)
    rng = make_rng(seed)
    deviation = neutral_max_deviation(r, K, t, runs, value_start, rng)
    events = int(np.count_nonzero(deviation >= alpha * p0 * K))
    return [BoundReport(oracle="neutral-concentration", bound_value=bound, empirical_value=events / runs,
                        samples=runs, status=upper_bound_status(events, runs, bound, significance),
                        parameters={"r": r, "K": K, "t": t, "alpha": alpha, "P0": p0, "beta": beta,
                                    "value_start": value_start})]


def random_walk_contribution_bound(n: int, c_star: float, c_stop: float) -> float:
    """2 n^(-c* / (3857 c_stop)): chance that random-walk steps move mu(S_nu) by a 1/kappa* fraction."""
    if n < 1 or c_star <= 0 or c_stop <= 0:
        raise InvalidParameterError("need n >= 1 and positive c_star, c_stop")
    return 2 * n ** (-c_star / (3857 * c_stop))


# ---------------------------------------------------------------------------
# Self-reinforcing Bernoulli trials
# ---------------------------------------------------------------------------

def chernoff_variant_bound(t: int, p: float, delta: float, b: float) -> float:
    """t exp(-(1 - b delta)(1 - b)^2 delta^2 mu / 2) with mu = t p."""
    if not 0 < delta < 1:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    if not 0 <= b < 1:
        raise InvalidParameterError(f"b must lie in [0, 1), got {b}")
    mu = t * p
    return t * math.exp(-(1 - b * delta) * (1 - b) ** 2 * delta ** 2 * mu / 2)


def _success_probability(p: float, rho: float, eta: float, successes, trials: int):
    denominator = rho + eta * trials
    if denominator == 0:
        return np.full(np.shape(successes), p) if np.ndim(successes) else p
    return (rho * p + eta * successes) / denominator


def simulate_reinforced_bernoulli(t: int, p: float, rho: float, eta: float,
                                  rng: np.random.Generator) -> np.ndarray:
    """
    Extremal process: trial s succeeds with probability (rho p + eta Z_{s-1}) / (rho + eta (s-1)).
    Returns the trajectory Z_0..Z_t.
    """
    z = np.zeros(t + 1, dtype=np.int64)
    for s in range(1, t + 1):
        probability = _success_probability(p, rho, eta, z[s - 1], s - 1)
        z[s] = z[s - 1] + int(rng.random() < probability)
    return z


def reinforced_bernoulli_finals(t: int, p: float, rho: float, eta: float, replicas: int,
                                rng: np.random.Generator) -> np.ndarray:
    """Z_t of many independent extremal trajectories."""
    z = np.zeros(replicas, dtype=np.int64)
    for s in range(1, t + 1):
        probability = _success_probability(p, rho, eta, z, s - 1)
        z += rng.random(replicas) < probability
    return z


def verify_reinforced_bernoulli(t: int = 1000, p: float = 0.5, delta: float = 0.5, b: float = 0.5,
                                eta: float = 1.0, rho: Optional[float] = None, trajectories: int = 100_000,
                                seed: int = 0, significance: float = DEFAULT_SIGNIFICANCE) -> List[BoundReport]:
    """P[Z_t <= (1 - delta) t p] on the extremal process against the Chernoff-type bound."""
    rho = eta * t if rho is None else rho
    if eta * t / (rho + eta * t) > b:
        raise PreconditionError(f"eta t / (rho + eta t) = {eta * t / (rho + eta * t):.4f} exceeds b={b}")
    bound = chernoff_variant_bound(t, p, delta, b)
    rng = make_rng(seed)
    finals = reinforced_bernoulli_finals(t, p, rho, eta, trajectories, rng)
    events = int(np.count_nonzero(finals <= (1 - delta) * t * p))
    return [BoundReport(oracle="reinforced-bernoulli", bound_value=bound, empirical_value=events / trajectories,
                        samples=trajectories, status=upper_bound_status(events, trajectories, bound, significance),
                        parameters={"t": t, "p": p, "delta": delta, "b": b, "eta": eta, "rho": rho})]


# ---------------------------------------------------------------------------
# Multiplicative drift with failure events
# ---------------------------------------------------------------------------

def mult_drift_time(x0: float, x_min: float, gamma: float, delta: float) -> float:
    """beta = (ln(X0 / x_min) + gamma) / delta."""
    if not 0 < delta < 1:
        raise InvalidParameterError(f"delta must lie in (0, 1), got {delta}")
    if not x0 >= x_min > 0:
        raise InvalidParameterError(f"need X0 >= x_min > 0, got X0={x0}, x_min={x_min}")
    if gamma <= 0:
        raise InvalidParameterError(f"gamma must be positive, got {gamma}")
    return (math.log(x0 / x_min) + gamma) / delta


def mult_drift_tail(q: float, gamma: float) -> float:
    """q + e^(-gamma)."""
    if not 0 <= q <= 1:
        raise InvalidParameterError(f"q must lie in [0, 1], got {q}")
    return q + math.exp(-gamma)


def simulate_multiplicative_drift(x0: float, x_min: float, delta: float, q: float, horizon: int,
                                  trajectories: int, rng: np.random.Generator, self_loop: float = 0.0) -> np.ndarray:
    """
    Hitting times T = inf{t : X_t < x_min} (horizon + 1 if not hit) of X_{t+1} = (1 - delta) X_t.

    With probability q a trajectory fails at a uniform time in [0..horizon] and stops moving.
    With self_loop > 0 the process stays put with that probability and otherwise contracts by
    1 - delta / (1 - self_loop), so the expected drift is still delta X_t.
    """
    step = delta / (1 - self_loop)
    if not 0 < step < 1:
        raise InvalidParameterError(f"delta / (1 - self_loop) must lie in (0, 1), got {step}")
    x = np.full(trajectories, float(x0))
    failed = rng.random(trajectories) < q
    failure_time = rng.integers(0, horizon + 1, size=trajectories)
    hit = np.full(trajectories, horizon + 1, dtype=np.int64)
    hit[x < x_min] = 0
    for t in range(horizon):
        moving = (hit > horizon) & ~(failed & (failure_time <= t))
        if self_loop > 0:
            moving &= rng.random(trajectories) >= self_loop
        x[moving] *= 1 - step
        newly = (hit > horizon) & (x < x_min)
        hit[newly] = t + 1
    return hit


def verify_multiplicative_drift(x0: float = 1.0, x_min: float = 1e-3, gamma: float = math.log(100),
                                delta: float = 0.01, q: float = 0.02, trajectories: int = 10_000,
                                self_loop: float = 0.0, seed: int = 0,
                                significance: float = DEFAULT_SIGNIFICANCE) -> List[BoundReport]:
    """Empirical P[T > beta] against q + e^(-gamma)."""
    beta = mult_drift_time(x0, x_min, gamma, delta)
    bound = mult_drift_tail(q, gamma)
    horizon = math.floor(beta)
    rng = make_rng(seed)
    hit = simulate_multiplicative_drift(x0, x_min, delta, q, horizon, trajectories, rng, self_loop=self_loop)
    events = int(np.count_nonzero(hit > beta))
    return [BoundReport(oracle="multiplicative-drift", bound_value=bound, empirical_value=events / trajectories,
                        samples=trajectories, status=upper_bound_status(events, trajectories, bound, significance),
                        parameters={"x0": x0, "x_min": x_min, "gamma": gamma, "delta": delta, "q": q,
                                    "beta": beta, "self_loop": self_loop})]


# ---------------------------------------------------------------------------
# Runtime comparators and K rules
# ---------------------------------------------------------------------------

def adak_witt_bound(n: int, r: int, K: int) -> float:
    """K r sqrt(n) (ln r + ln K), the older runtime bound without its constant."""
    if r < 2 or n < 1 or K < 1:
        raise InvalidParameterError(f"need n >= 1, r >= 2, K >= 1, got n={n}, r={r}, K={K}")
    return K * r * math.sqrt(n) * (math.log(r) + math.log(K))


def rcga_on_gom_bound(n: int, r: int, K: int) -> float:
    """K sqrt(n) ln n ln r, the improved runtime bound without its constant."""
    if r < 2 or n < 1 or K < 1:
        raise InvalidParameterError(f"need n >= 1, r >= 2, K >= 1, got n={n}, r={r}, K={K}")
    return K * math.sqrt(n) * math.log(n) * math.log(r)


def theorem_k(c: float, n: int, r: int) -> float:
    """c r sqrt(n) ln^2 n ln^2 r."""
    return c * r * math.sqrt(n) * math.log(n) ** 2 * math.log(r) ** 2


def adak_witt_k(c: float, n: int, r: int) -> float:
    """c r^2 sqrt(n) ln n."""
    return c * r * r * math.sqrt(n) * math.log(n)


def phase_retention_factor(kappa_star: int) -> float:
    """(1 - 1/kappa*)^3: ratio retention claimed per phase."""
    if kappa_star < 1:
        raise InvalidParameterError(f"kappa* must be positive, got {kappa_star}")
    return (1 - 1 / kappa_star) ** 3


def overall_retention_factor(kappa_star: int) -> float:
    """(1 - 1/kappa*)^(3(kappa* - 1)), never below e^-3."""
    if kappa_star < 1:
        raise InvalidParameterError(f"kappa* must be positive, got {kappa_star}")
    return (1 - 1 / kappa_star) ** (3 * (kappa_star - 1))


# ---------------------------------------------------------------------------
# Random-walk contribution on G-OneMax runs
# ---------------------------------------------------------------------------

def verify_random_walk_contribution(n: int = 10, r: int = 4, K: Optional[int] = None, c_star: float = 1.0,
                                    c_stop: float = 0.1, runs: int = 200, position: int = 0, seed: int = 0,
                                    significance: float = DEFAULT_SIGNIFICANCE) -> List[BoundReport]:
    """
    For every nu in [0..kappa*]: how often the random-walk-filtered mass mu_{i|R}(S_nu) of a
    G-OneMax run drifts by at least mu/kappa* of its start within t_stop = c_stop K sqrt(n) ln n
    iterations, against 2 n^(-c* / (3857 c_stop)).

    Runs start at the uniform matrix, so mu(S_nu) >= 1/r holds at t' = 0. A run that samples
    the optimum before t_stop contributes its trace up to that point.
    """
    hierarchy = build_hierarchy(r)
    minimum_k = theorem_k(c_star, n, r)
    K = K or max(r, math.ceil(minimum_k / r) * r)
    if K < minimum_k:
        raise PreconditionError(f"K={K} is below c* r sqrt(n) ln^2 n ln^2 r = {minimum_k:.1f}")
    if not 0 <= position < n:
        raise InvalidParameterError(f"position {position} outside [0..{n - 1}]")
    if runs < 1:
        raise InvalidParameterError(f"need at least one run, got {runs}")
    t_stop = max(1, math.ceil(c_stop * K * math.sqrt(n) * math.log(n)))
    bound = random_walk_contribution_bound(n, c_star, c_stop)
    kappa_star = hierarchy.kappa_star
    objective = make_objective(G_ONEMAX, n, r)

    events = [0] * (kappa_star + 1)
    stopped_early = 0
    for replica in range(runs):
        result = run(n, r, K, objective, t_stop, seed + replica, trace_level=TRACE_FULL)
        stopped_early += int(result.optimum_found)
        for nu in range(kappa_star + 1):
            series = decompose(result, position, hierarchy.suffix_start(nu), 0, result.iterations_used)
            start = series.mu_start
            if any(abs(mu - start) * kappa_star >= start for mu in series.random_walk_change):
                events[nu] += 1

    reports = []
    for nu in range(kappa_star + 1):
        reports.append(BoundReport(
            oracle="random-walk-contribution", bound_value=bound, empirical_value=events[nu] / runs,
            samples=runs, status=upper_bound_status(events[nu], runs, bound, significance),
            parameters={"n": n, "r": r, "K": K, "nu": nu, "suffix_start": hierarchy.suffix_start(nu),
                        "kappa_star": kappa_star, "t_stop": t_stop, "c_star": c_star, "c_stop": c_stop,
                        "position": position, "stopped_early": stopped_early}))
    return reports


ORACLE_VERIFIERS: Dict[str, Callable[..., List[BoundReport]]] = {
    "convolution": verify_convolution,
    "variance": verify_variance,
    "biased-window": verify_biased_window,
    "neutral-concentration": verify_neutral_concentration,
    "reinforced-bernoulli": verify_reinforced_bernoulli,
    "drift": verify_drift,
    "multiplicative-drift": verify_multiplicative_drift,
    "random-walk-contribution": verify_random_walk_contribution,
}


def run_oracle(name: str, settings: Optional[Dict[str, object]] = None, seed: int = 0,
               significance: float = DEFAULT_SIGNIFICANCE) -> List[BoundReport]:
    """Run one registered verifier with keyword settings from a config."""
    if name not in ORACLE_VERIFIERS:
        raise InvalidParameterError(f"unknown oracle '{name}' (known: {', '.join(sorted(ORACLE_VERIFIERS))})")
    settings = dict(settings or {})
    reports = ORACLE_VERIFIERS[name](seed=seed, significance=significance, **settings)
    for report in reports:
        logger.info(f"{report.oracle}: bound={report.bound_value:.6g} empirical={report.empirical_value} "
                    f"samples={report.samples} -> {report.status}")
    return reports
