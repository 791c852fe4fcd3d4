"""
Core r-valued compact genetic algorithm (r-cGA).

The frequency matrix is kept as integer counts out of K, so p_{i,j} = counts[i][j] / K
stays an exact multiple of 1/K through initialization at 1/r and every +-1/K update.
Randomness comes from numpy's counter-based Philox generator, seeded per run.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from core.python.rcga_pipeline.errors import InvalidParameterError, MatrixCorruptionError
from core.python.rcga_pipeline.fitness_core import Objective
from core.python.rcga_pipeline.hierarchy_core import build_hierarchy, suffix_numerators, suffix_starts_for
from core.python.rcga_pipeline.instrumentation_core import MassRecord, StepRecord, record_step
from core.python.shared.shared_logger import logger

RNG_ALGORITHM = "numpy.Philox4x64-10"
TRACE_NONE = "none"
TRACE_MASSES = "masses-only"
TRACE_FULL = "full"
TRACE_LEVELS = (TRACE_NONE, TRACE_MASSES, TRACE_FULL)

# Upper bound on the comparison tensor built per sampling chunk
_SAMPLE_CHUNK_CELLS = 4_000_000


def make_rng(seed: int) -> np.random.Generator:
    """Generator used for every run; the algorithm is recorded in RunResult.rng_algorithm."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(eq=False)
class FrequencyMatrix:
    n: int
    r: int
    K: int
    counts: np.ndarray

    def frequency(self, i: int, j: int) -> Fraction:
        return Fraction(int(self.counts[i, j]), self.K)

    def copy(self) -> "FrequencyMatrix":
        return FrequencyMatrix(n=self.n, r=self.r, K=self.K, counts=self.counts.copy())

    def check_invariants(self):
        """Raise MatrixCorruptionError unless every row sums to K with entries in [0, K]."""
        if self.counts.min() < 0 or self.counts.max() > self.K:
            raise MatrixCorruptionError(f"count outside [0, {self.K}]")
        sums = self.counts.sum(axis=1)
        if not np.all(sums == self.K):
            bad = int(np.nonzero(sums != self.K)[0][0])
            raise MatrixCorruptionError(f"row {bad} sums to {int(sums[bad])}, expected {self.K}")


@dataclass(eq=False)
class Individual:
    values: np.ndarray
    fitness: int


@dataclass(eq=False)
class RunResult:
    iterations_used: int
    optimum_found: bool
    final_matrix: FrequencyMatrix
    trace: Optional[List[Union[StepRecord, MassRecord]]]
    seed: int
    rng_algorithm: str = RNG_ALGORITHM
    trace_level: str = TRACE_NONE
    initial_matrix: Optional[FrequencyMatrix] = None
    objective_kind: str = ""

    @property
    def n(self) -> int:
        return self.final_matrix.n

    @property
    def r(self) -> int:
        return self.final_matrix.r

    @property
    def K(self) -> int:
        return self.final_matrix.K

    @property
    def evaluations(self) -> int:
        return 2 * self.iterations_used


def validate_parameters(n: int, r: int, K: int):
    if r < 2:
        raise InvalidParameterError(f"r must be at least 2, got {r}")
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    if K < 1:
        raise InvalidParameterError(f"K must be positive, got {K}")
    if K % r != 0:
        raise InvalidParameterError(f"K={K} is not well-behaved: not divisible by r={r}")


def new_frequency_matrix(n: int, r: int, K: int) -> FrequencyMatrix:
    """Uniform matrix: every count is K / r."""
    validate_parameters(n, r, K)
    counts = np.full((n, r), K // r, dtype=np.int64)
    return FrequencyMatrix(n=n, r=r, K=K, counts=counts)


def sample_values(m: FrequencyMatrix, rng: np.random.Generator, size: int) -> np.ndarray:
    """
    Draw `size` independent individuals, shape (size, n).

    Exact inverse-CDF sampling: a uniform integer u in [0, K) selects value j at position i
    iff cum[i][j-1] <= u < cum[i][j], which has probability counts[i][j] / K.
    """
    cumulative = np.cumsum(m.counts, axis=1)
    chunk = max(1, _SAMPLE_CHUNK_CELLS // (m.n * m.r))
    out = np.empty((size, m.n), dtype=np.int64)
    for begin in range(0, size, chunk):
        stop = min(size, begin + chunk)
        u = rng.integers(0, m.K, size=(stop - begin, m.n))
        out[begin:stop] = (cumulative[None, :, :] <= u[:, :, None]).sum(axis=2)
    return out


def sample_individual(m: FrequencyMatrix, rng: np.random.Generator, f: Callable) -> Individual:
    values = sample_values(m, rng, 1)[0]
    return Individual(values=values, fitness=f(values))


def compete(x1: Individual, x2: Individual, rng: np.random.Generator) -> Tuple[Individual, Individual, bool]:
    """Higher fitness wins; a tie is broken by one fresh uniform bit from rng."""
    if x1.fitness > x2.fitness:
        return x1, x2, False
    if x1.fitness < x2.fitness:
        return x2, x1, False
    if rng.integers(0, 2) == 0:
        return x1, x2, True
    return x2, x1, True


def update(m: FrequencyMatrix, winner: Individual, loser: Individual) -> FrequencyMatrix:
    """
    Shift 1/K from the loser's value to the winner's value in every row where they differ.
    Mutates and returns m.
    """
    w = np.asarray(winner.values if isinstance(winner, Individual) else winner, dtype=np.int64)
    l = np.asarray(loser.values if isinstance(loser, Individual) else loser, dtype=np.int64)
    rows = np.nonzero(w != l)[0]
    if rows.size == 0:
        return m
    losing = m.counts[rows, l[rows]]
    if losing.min() < 1:
        bad = int(rows[np.argmin(losing)])
        raise MatrixCorruptionError(
            f"update would drive counts[{bad}][{int(l[bad])}] below 0; loser was not sampled from this matrix")
    m.counts[rows, w[rows]] += 1
    m.counts[rows, l[rows]] -= 1
    return m


def run(
    n: int,
    r: int,
    K: int,
    objective: Objective,
    max_iterations: int,
    seed: int,
    trace_level: str = TRACE_NONE,
    observer: Optional[Callable] = None,
) -> RunResult:
    """
    Run the r-cGA until an optimal individual is sampled or max_iterations is reached.

    Args:
        n, r, K: Dimension, alphabet size and (well-behaved) hypothetical population size
        objective: Objective to maximize; a constant objective never stops early
        max_iterations: Iteration cap (two function evaluations per iteration)
        seed: Philox seed; identical (seed, parameters) reproduce identical results
        trace_level: "none", "masses-only" or "full"
        observer: Optional callable(time, matrix, step) invoked after every iteration,
                  time being the number of completed iterations

    Returns:
        RunResult
    """
    validate_parameters(n, r, K)
    if max_iterations < 1:
        raise InvalidParameterError(f"max_iterations must be at least 1, got {max_iterations}")
    if trace_level not in TRACE_LEVELS:
        raise InvalidParameterError(f"unknown trace level '{trace_level}'")
    if objective.n != n or objective.r != r:
        raise InvalidParameterError(f"objective built for n={objective.n}, r={objective.r}, run uses n={n}, r={r}")

    rng = make_rng(seed)
    m = new_frequency_matrix(n, r, K)
    initial = m.copy()
    hierarchy = build_hierarchy(r) if r >= 3 and trace_level == TRACE_FULL else None
    starts = suffix_starts_for(r) if trace_level == TRACE_MASSES else None
    trace = [] if trace_level != TRACE_NONE else None

    found = False
    iterations = 0
    for t in range(max_iterations):
        samples = sample_values(m, rng, 2)
        x1 = Individual(values=samples[0], fitness=objective(samples[0]))
        x2 = Individual(values=samples[1], fitness=objective(samples[1]))
        winner, loser, tied = compete(x1, x2, rng)
        update(m, winner, loser)
        iterations = t + 1

        step = None
        if trace_level == TRACE_FULL:
            step = record_step(t, x1.values, x2.values, 1 if winner is x1 else 2, tied, hierarchy)
            trace.append(step)
        elif trace_level == TRACE_MASSES:
            trace.append(MassRecord(t=t, suffix=suffix_numerators(m.counts, starts)))
        if observer is not None:
            observer(iterations, m, step)

        if objective.is_optimal(x1.fitness) or objective.is_optimal(x2.fitness):
            found = True
            break

    logger.debug(f"run seed={seed} n={n} r={r} K={K}: {iterations} iterations, optimum_found={found}")
    return RunResult(iterations_used=iterations, optimum_found=found, final_matrix=m, trace=trace, seed=seed,
                     trace_level=trace_level, initial_matrix=initial, objective_kind=objective.kind)
