"""
Per-iteration analysis of r-cGA runs.

Computes rest-sums and D_i, classifies each position's update as biased or random-walk,
detects large biased steps, and splits a position's mass change into the interleaved
random-walk and biased contributions.

Time convention: iteration t (0-based, StepRecord.t) turns the matrix at time t into
the matrix at time t + 1, so its event time is t + 1.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.python.rcga_pipeline.errors import InvalidParameterError, TraceLevelError
from core.python.rcga_pipeline.hierarchy_core import HierarchyTable

BIASED = "biased"
RANDOM_WALK = "random-walk"
NO_LARGE_BIASED = -1


@dataclass(eq=False)
class StepRecord:
    t: int
    x1: np.ndarray
    x2: np.ndarray
    winner_index: int
    tied: bool
    d: np.ndarray
    biased: np.ndarray
    large_biased_kappa: np.ndarray

    @property
    def winner(self) -> np.ndarray:
        return self.x1 if self.winner_index == 1 else self.x2

    @property
    def loser(self) -> np.ndarray:
        return self.x2 if self.winner_index == 1 else self.x1

    def step_class(self, i: int) -> str:
        return BIASED if self.biased[i] else RANDOM_WALK

    def large_biased(self, i: int) -> Optional[int]:
        kappa = int(self.large_biased_kappa[i])
        return None if kappa == NO_LARGE_BIASED else kappa


@dataclass(eq=False)
class MassRecord:
    """Masses-only trace entry: suffix mass numerators (n x len(starts)) after iteration t."""
    t: int
    suffix: np.ndarray


def rest_sums(x1: Sequence[int], x2: Sequence[int], i: int) -> Tuple[int, int, int]:
    """
    S1 and S2 exclude position i; D = S1 - S2.

    Positions are 0-based throughout the package: i = 0 is the first position.
    """
    if len(x1) != len(x2):
        raise InvalidParameterError(f"samples differ in length ({len(x1)} vs {len(x2)})")
    if not 0 <= i < len(x1):
        raise InvalidParameterError(f"position {i} outside [0..{len(x1) - 1}]")
    s1 = int(sum(x1)) - int(x1[i])
    s2 = int(sum(x2)) - int(x2[i])
    return s1, s2, s1 - s2


def rest_differences(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """D_i for every position at once."""
    return (int(x1.sum()) - x1) - (int(x2.sum()) - x2)


def _biased_mask(x1: np.ndarray, x2: np.ndarray, d: np.ndarray, winner_index: int, tied: bool) -> np.ndarray:
    if tied:
        return np.zeros(x1.shape, dtype=bool)
    gap = x1 - x2
    # The winner must be the larger sample at i; automatic for G-OneMax once |gap| > |D|
    winner_larger = gap > 0 if winner_index == 1 else gap < 0
    return (np.abs(gap) > np.abs(d)) & winner_larger


def classify_step(x1: Sequence[int], x2: Sequence[int], i: int, winner_index: int, tied: bool) -> str:
    """
    Biased iff |x1_i - x2_i| > |D_i| and the sample larger at i won; overall ties are
    random-walk. The rule is symmetric in the sample labels.
    """
    _, _, d = rest_sums(x1, x2, i)
    gap = int(x1[i]) - int(x2[i])
    if tied or abs(gap) <= abs(d):
        return RANDOM_WALK
    winner_larger = gap > 0 if winner_index == 1 else gap < 0
    return BIASED if winner_larger else RANDOM_WALK


def detect_large_biased(x1: Sequence[int], x2: Sequence[int], i: int, winner_index: int, step_class: str,
                        h: HierarchyTable) -> Optional[int]:
    """
    kappa in [0..kappa*-2] if one sample's value at i lies in K_kappa, the other's in
    S_{kappa+2}, the step is biased and the update favored the S_{kappa+2} sample.
    """
    if step_class != BIASED:
        return None
    a, b = int(x1[i]), int(x2[i])
    low, high = min(a, b), max(a, b)
    kappa = h.block_of(low)
    if kappa > h.kappa_star - 2:
        return None
    if high < h.starts[kappa + 2]:
        return None
    winner_value = a if winner_index == 1 else b
    return kappa if winner_value == high else None


def record_step(t: int, x1: np.ndarray, x2: np.ndarray, winner_index: int, tied: bool,
                h: Optional[HierarchyTable]) -> StepRecord:
    """Full-trace record of one iteration; large biased steps need a hierarchy (r >= 3)."""
    d = rest_differences(x1, x2)
    biased = _biased_mask(x1, x2, d, winner_index, tied)
    large = np.full(x1.shape, NO_LARGE_BIASED, dtype=np.int64)
    if h is not None:
        for i in np.nonzero(biased)[0]:
            kappa = detect_large_biased(x1, x2, int(i), winner_index, BIASED, h)
            if kappa is not None:
                large[i] = kappa
    return StepRecord(t=t, x1=x1, x2=x2, winner_index=winner_index, tied=tied, d=d,
                      biased=biased, large_biased_kappa=large)


def _delta_numerator(step: StepRecord, i: int, suffix_start: int) -> int:
    return int(step.winner[i] >= suffix_start) - int(step.loser[i] >= suffix_start)


@dataclass
class DecomposedSeries:
    position: int
    suffix_start: int
    base_time: int
    K: int
    mu_start: Fraction
    random_walk_times: List[int] = field(default_factory=list)
    biased_times: List[int] = field(default_factory=list)
    random_walk_deltas: List[Fraction] = field(default_factory=list)
    biased_deltas: List[Fraction] = field(default_factory=list)
    # mu_{i|U} after each event of U, starting from mu at the base time
    random_walk_change: List[Fraction] = field(default_factory=list)
    biased_change: List[Fraction] = field(default_factory=list)

    @property
    def total_change(self) -> Fraction:
        return sum(self.random_walk_deltas, Fraction(0)) + sum(self.biased_deltas, Fraction(0))

    def rows(self) -> List[tuple]:
        """(t, position, class, delta_numerator, K, mu_numerator) in time order."""
        events = [(t, RANDOM_WALK, delta) for t, delta in zip(self.random_walk_times, self.random_walk_deltas)]
        events += [(t, BIASED, delta) for t, delta in zip(self.biased_times, self.biased_deltas)]
        events.sort()
        mu = self.mu_start
        rows = []
        for t, step_class, delta in events:
            mu += delta
            rows.append((t, self.position, step_class, int(delta * self.K), self.K, int(mu * self.K)))
        return rows


def _require_full_trace(result):
    if result.trace_level != "full" or result.trace is None:
        raise TraceLevelError(f"analysis needs a full trace, run was recorded at '{result.trace_level}'")


def replay_masses(result, i: int, suffix_start: int) -> List[Fraction]:
    """mu_i(S) at every time 0..iterations_used, rebuilt from the initial matrix and the trace."""
    _require_full_trace(result)
    K = result.initial_matrix.K
    numerator = int(result.initial_matrix.counts[i, suffix_start:].sum())
    series = [Fraction(numerator, K)]
    for step in result.trace:
        numerator += _delta_numerator(step, i, suffix_start)
        series.append(Fraction(numerator, K))
    return series


def decompose(result, i: int, suffix_start: int, base_time: int, horizon: int) -> DecomposedSeries:
    """
    Split the change of mu_i(S) over (base_time, base_time + horizon] into random-walk
    and biased contributions.

    Args:
        result: RunResult recorded at full trace level
        i: Position
        suffix_start: First value of S (S = [suffix_start .. r-1])
        base_time: t'
        horizon: Number of event times after t'
    """
    _require_full_trace(result)
    if not 0 <= suffix_start <= result.r - 1:
        raise InvalidParameterError(f"suffix start {suffix_start} outside [0..{result.r - 1}]")
    if base_time < 0 or horizon < 0 or base_time + horizon > len(result.trace):
        raise InvalidParameterError(
            f"trace of {len(result.trace)} iterations does not cover [{base_time}, {base_time + horizon}]")

    K = result.initial_matrix.K
    mu_series = replay_masses(result, i, suffix_start)
    series = DecomposedSeries(position=i, suffix_start=suffix_start, base_time=base_time, K=K,
                              mu_start=mu_series[base_time])
    random_walk_mu = biased_mu = series.mu_start
    for step in result.trace[base_time:base_time + horizon]:
        event_time = step.t + 1
        delta = Fraction(_delta_numerator(step, i, suffix_start), K)
        if step.biased[i]:
            biased_mu += delta
            series.biased_times.append(event_time)
            series.biased_deltas.append(delta)
            series.biased_change.append(biased_mu)
        else:
            random_walk_mu += delta
            series.random_walk_times.append(event_time)
            series.random_walk_deltas.append(delta)
            series.random_walk_change.append(random_walk_mu)
    return series
