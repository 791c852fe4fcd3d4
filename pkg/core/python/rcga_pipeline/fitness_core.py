"""
Benchmark objectives on [0..r-1]^n: G-OneMax, r-OneMax and a constant (neutral) function.
The Objective record lets campaigns name an objective in configs and know its optimum.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from core.python.rcga_pipeline.errors import InvalidParameterError

G_ONEMAX = "g-onemax"
R_ONEMAX = "r-onemax"
CONSTANT = "constant"
OBJECTIVE_KINDS = (G_ONEMAX, R_ONEMAX, CONSTANT)


def _as_values(x: Sequence[int], r: Optional[int]) -> np.ndarray:
    values = np.asarray(x, dtype=np.int64)
    if values.size and values.min() < 0:
        raise InvalidParameterError(f"value {int(values.min())} below 0")
    if r is not None and values.size and values.max() > r - 1:
        raise InvalidParameterError(f"value {int(values.max())} above r-1={r - 1}")
    return values


def g_onemax(x: Sequence[int], r: Optional[int] = None) -> int:
    """Sum of all components. With r given, entries above r-1 are rejected too."""
    return int(_as_values(x, r).sum())


def r_onemax(x: Sequence[int], r: int) -> int:
    """Number of components equal to the optimal value r-1."""
    values = _as_values(x, r)
    return int(np.count_nonzero(values == r - 1))


def constant(x: Sequence[int]) -> int:
    return 0


@dataclass(frozen=True)
class Objective:
    kind: str
    n: int
    r: int
    optimum_value: Optional[int]

    def __call__(self, x: Sequence[int]) -> int:
        return _EVALUATORS[self.kind](x, self.r)

    def is_optimal(self, fitness: int) -> bool:
        return self.optimum_value is not None and fitness == self.optimum_value


_EVALUATORS: Dict[str, Callable[[Sequence[int], int], int]] = {
    G_ONEMAX: g_onemax,
    R_ONEMAX: r_onemax,
    CONSTANT: lambda x, r: constant(x),
}


def make_objective(kind: str, n: int, r: int) -> Objective:
    """
    Build the named objective for dimension n over alphabet size r.

    Args:
        kind: One of "g-onemax", "r-onemax", "constant" (the config-file identifiers)
        n: Dimension
        r: Alphabet size

    Returns:
        Objective with its known optimum (None for the constant function)
    """
    if kind not in OBJECTIVE_KINDS:
        raise InvalidParameterError(f"unknown objective '{kind}' (expected one of {', '.join(OBJECTIVE_KINDS)})")
    if n < 1 or r < 2:
        raise InvalidParameterError(f"objective needs n >= 1 and r >= 2, got n={n}, r={r}")
    if kind == G_ONEMAX:
        optimum = n * (r - 1)
    elif kind == R_ONEMAX:
        optimum = n
    else:
        optimum = None
    return Objective(kind=kind, n=n, r=r, optimum_value=optimum)
