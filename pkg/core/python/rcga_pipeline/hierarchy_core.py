"""
Interval hierarchy over the values [0..r-1] and the probability-mass queries built on it.

For r >= 3 the values are split into blocks K_0..K_{kappa*}: block kappa starts at
ell_kappa = ceil((1 - (2/3)^kappa)(r - 1)), the last regular block stops at r - 2 and
K_{kappa*} = {r - 1}. Suffix sets S_kappa = [ell_kappa .. r - 1] are stored by start index.
All arithmetic here is exact (integers and Fractions).
"""

from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.python.rcga_pipeline.errors import InvalidParameterError
from core.python.shared.shared_logger import logger


def compute_kappa_star(r: int) -> int:
    """Smallest k with (3/2)^k >= r - 1, i.e. ceil(log_{3/2}(r - 1))."""
    if r < 2:
        raise InvalidParameterError(f"r must be at least 2, got {r}")
    k = 0
    while 3 ** k < (r - 1) * 2 ** k:
        k += 1
    return k


def compute_ell(kappa: int, r: int) -> int:
    """ceil((1 - (2/3)^kappa)(r - 1)) in integer arithmetic."""
    numerator = (3 ** kappa - 2 ** kappa) * (r - 1)
    return -(-numerator // 3 ** kappa)


@dataclass(frozen=True)
class HierarchyTable:
    r: int
    kappa_star: int
    ells: Tuple[int, ...]
    # starts[kappa] is the first value of K_kappa and of S_kappa; starts[kappa_star] = r - 1
    starts: Tuple[int, ...]

    def block(self, kappa: int) -> range:
        self._check_kappa(kappa)
        if kappa == self.kappa_star:
            return range(self.r - 1, self.r)
        return range(self.starts[kappa], self.starts[kappa + 1])

    def suffix(self, kappa: int) -> range:
        self._check_kappa(kappa)
        return range(self.starts[kappa], self.r)

    def suffix_start(self, kappa: int) -> int:
        self._check_kappa(kappa)
        return self.starts[kappa]

    def block_of(self, value: int) -> int:
        """Index of the (non-empty) block containing value."""
        if not 0 <= value <= self.r - 1:
            raise InvalidParameterError(f"value {value} outside [0..{self.r - 1}]")
        return bisect_right(self.starts, value) - 1

    def _check_kappa(self, kappa: int):
        if not 0 <= kappa <= self.kappa_star:
            raise InvalidParameterError(f"kappa {kappa} outside [0..{self.kappa_star}]")


def build_hierarchy(r: int) -> HierarchyTable:
    """
    Build kappa*, ell_0..ell_{kappa*-1}, the blocks and the suffix starts for alphabet size r.

    Raises:
        InvalidParameterError: for r < 3 (kappa* = 0 leaves no hierarchy)
    """
    if r < 3:
        raise InvalidParameterError(f"the interval hierarchy needs r >= 3, got r={r}")

    kappa_star = compute_kappa_star(r)
    ells = tuple(compute_ell(kappa, r) for kappa in range(kappa_star))
    table = HierarchyTable(r=r, kappa_star=kappa_star, ells=ells, starts=ells + (r - 1,))

    # Blocks must tile [0..r-1]
    covered = [value for kappa in range(kappa_star + 1) for value in table.block(kappa)]
    if covered != list(range(r)):
        raise AssertionError(f"hierarchy blocks for r={r} do not partition [0..{r - 1}]")
    if ells[-1] > r - 2:
        raise AssertionError(f"ell_{kappa_star - 1}={ells[-1]} exceeds r-2 for r={r}")
    return table


def suffix_starts_for(r: int) -> Tuple[int, ...]:
    """Suffix starts used by masses-only traces; r = 2 falls back to S = [0..1] and {1}."""
    if r == 2:
        return (0, 1)
    return build_hierarchy(r).starts


def mass(m, i: int, values: Iterable[int]) -> Fraction:
    """
    Probability mass mu_i(I) = sum_{j in I} p_{i,j} as an exact rational.

    Args:
        m: FrequencyMatrix
        i: Position (0-based)
        values: Value set I, a subset of [0..r-1]
    """
    if not 0 <= i < m.n:
        raise InvalidParameterError(f"position {i} outside [0..{m.n - 1}]")
    selected = sorted(set(values))
    if selected and (selected[0] < 0 or selected[-1] > m.r - 1):
        raise InvalidParameterError(f"value set {selected} not within [0..{m.r - 1}]")
    numerator = int(m.counts[i, selected].sum()) if selected else 0
    return Fraction(numerator, m.K)


def suffix_numerators(counts: np.ndarray, starts: Sequence[int]) -> np.ndarray:
    """Counts mass of every suffix set per position: shape (n, len(starts))."""
    tails = np.cumsum(counts[:, ::-1], axis=1)[:, ::-1]
    return tails[:, list(starts)]


def psi_from_suffixes(suffix: np.ndarray) -> np.ndarray:
    """Smallest kappa whose block carries positive mass, per row of suffix numerators."""
    padded = np.concatenate([suffix, np.zeros((suffix.shape[0], 1), dtype=suffix.dtype)], axis=1)
    block_mass = padded[:, :-1] - padded[:, 1:]
    return np.argmax(block_mass > 0, axis=1)


@dataclass(frozen=True)
class PhaseState:
    position: int
    psi: int
    confined: bool
    complete: bool


def phase_state(m, i: int, h: HierarchyTable, previous: Optional[PhaseState] = None) -> PhaseState:
    """
    Current phase of position i.

    psi is the smallest kappa with mu_i(K_kappa) > 0. When a previously tracked state is
    given and mass has reappeared below its psi, the tracked psi is kept and the state is
    reported as not confined.
    """
    if m.r != h.r:
        raise InvalidParameterError(f"matrix has r={m.r} but hierarchy has r={h.r}")
    suffix = suffix_numerators(m.counts[i:i + 1], h.starts)
    psi = int(psi_from_suffixes(suffix)[0])
    confined = True
    if previous is not None and psi < previous.psi:
        psi = previous.psi
        confined = int(suffix[0, psi]) == m.K
    complete = psi == h.kappa_star and confined
    return PhaseState(position=i, psi=psi, confined=confined, complete=complete)


@dataclass
class PhaseRecord:
    position: int
    kappa: int
    start: int
    end: Optional[int]
    skipped: bool
    # nu -> mu(S_{nu+1}) / mu(S_nu) for nu in [kappa+1 .. kappa*-1]; None where mu(S_nu) = 0
    ratios_start: Dict[int, Optional[Fraction]] = field(default_factory=dict)
    ratios_end: Dict[int, Optional[Fraction]] = field(default_factory=dict)

    @property
    def length(self) -> Optional[int]:
        return None if self.end is None else self.end - self.start

    def retention(self, factor: float) -> Dict[int, Optional[bool]]:
        """Per nu: whether the end ratio kept at least `factor` times the start ratio."""
        result = {}
        for nu, start_ratio in self.ratios_start.items():
            end_ratio = self.ratios_end.get(nu)
            if start_ratio is None or end_ratio is None:
                result[nu] = None
            else:
                result[nu] = float(end_ratio) >= factor * float(start_ratio)
        return result


def _ratios(row: np.ndarray, kappa: int, kappa_star: int) -> Dict[int, Optional[Fraction]]:
    ratios = {}
    for nu in range(kappa + 1, kappa_star):
        below = int(row[nu])
        ratios[nu] = Fraction(int(row[nu + 1]), below) if below else None
    return ratios


class PhaseTracker:
    """
    Follows psi per position and cuts the run into phases.

    Feed it suffix numerators (what masses-only traces record) at time 0 via `start`
    and after every iteration via `observe`; phases jumped over are recorded as skipped
    with zero length.
    """

    def __init__(self, h: HierarchyTable, n: int):
        self.h = h
        self.n = n
        self.records: List[PhaseRecord] = []
        self.regressions = 0
        self._psi: Optional[np.ndarray] = None
        self._open: Dict[int, PhaseRecord] = {}

    def start(self, suffix: np.ndarray, t: int = 0):
        self._psi = psi_from_suffixes(suffix)
        for i in range(self.n):
            self._open_phase(i, int(self._psi[i]), t, suffix[i])

    def observe(self, t: int, suffix: np.ndarray):
        if self._psi is None:
            raise RuntimeError("PhaseTracker.start must be called before observe")
        psi = psi_from_suffixes(suffix)
        for i in np.nonzero(psi != self._psi)[0]:
            old, new = int(self._psi[i]), int(psi[i])
            if new < old:
                # Cannot happen for the r-cGA (zero frequencies are never sampled)
                self.regressions += 1
                logger.warning(f"Mass reappeared below phase {old} at position {i}, t={t}")
                continue
            row = suffix[i]
            current = self._open.pop(int(i), None)
            if current is not None:
                current.end = t
                current.ratios_end = _ratios(row, current.kappa, self.h.kappa_star)
            for kappa in range(old + 1, min(new, self.h.kappa_star)):
                ratios = _ratios(row, kappa, self.h.kappa_star)
                self.records.append(PhaseRecord(position=int(i), kappa=kappa, start=t, end=t, skipped=True,
                                                ratios_start=ratios, ratios_end=dict(ratios)))
            self._open_phase(int(i), new, t, row)
            self._psi[i] = new

    def observe_matrix(self, t: int, m, step=None):
        """Observer hook for eda_core.run."""
        self.observe(t, suffix_numerators(m.counts, self.h.starts))

    def finish(self) -> List[PhaseRecord]:
        """Phases still open keep end=None."""
        return sorted(self.records, key=lambda rec: (rec.position, rec.kappa))

    def _open_phase(self, i: int, kappa: int, t: int, row: np.ndarray):
        if kappa >= self.h.kappa_star:
            return
        record = PhaseRecord(position=i, kappa=kappa, start=t, end=None, skipped=False,
                             ratios_start=_ratios(row, kappa, self.h.kappa_star))
        self.records.append(record)
        self._open[i] = record


def phases_from_masses(initial_suffix: np.ndarray, mass_records, h: HierarchyTable) -> List[PhaseRecord]:
    """Offline phase extraction from a masses-only trace."""
    tracker = PhaseTracker(h, initial_suffix.shape[0])
    tracker.start(initial_suffix)
    for record in mass_records:
        tracker.observe(record.t + 1, record.suffix)
    return tracker.finish()
