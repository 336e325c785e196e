"""Preconditioners: objects with a .solve(z) applying M^{-1}.

M must be positive definite with symmetry compatible with the problem
class (real symmetric for the transpose-paired classes, Hermitian for
the conjugate-paired ones); the solver checks this indirectly through
the positivity of its inner products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import SparseMatrix

# diagonal entries below this fraction of the largest are clipped
JACOBI_FLOOR = 1e-8


@dataclass(frozen=True)
class Identity:
    """M = I.  The solver recognizes this kind and runs the plain
    process, so the reduction to the unpreconditioned run is exact."""

    def solve(self, z: np.ndarray) -> np.ndarray:
        return z.copy()


@dataclass(frozen=True)
class Diagonal:
    """M = diag(d) with d real positive."""

    d: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64).reshape(-1)
        if d.size == 0 or np.any(d <= 0.0) or not np.all(np.isfinite(d)):
            raise ValueError("diagonal preconditioner needs finite positive entries")
        object.__setattr__(self, "d", d)

    def solve(self, z: np.ndarray) -> np.ndarray:
        return z / self.d


@dataclass(frozen=True)
class Custom:
    """Wrap any callable applying M^{-1}."""

    apply_inverse: Callable[[np.ndarray], np.ndarray]

    def solve(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.apply_inverse(z), dtype=np.complex128).reshape(-1)


def jacobi_from_matrix(a) -> object:
    """Diagonal preconditioner from |diag(A)|, floored at a fraction of
    the largest entry.  A structurally zero diagonal (skew classes) has
    nothing to scale by, so fall back to the identity."""
    if isinstance(a, SparseMatrix):
        diag = a.diagonal()
    else:
        diag = np.diagonal(np.asarray(a)).astype(np.complex128)
    mags = np.abs(diag)
    top = float(mags.max()) if mags.size else 0.0
    if top == 0.0:
        return Identity()
    return Diagonal(np.maximum(mags, JACOBI_FLOOR * top))
