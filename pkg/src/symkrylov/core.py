"""Shared numeric primitives: vectors, sparse matrices, operator wrappers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

EPS = float(np.finfo(np.float64).eps)


class PreconditionerBreakdownError(RuntimeError):
    """An inner product that must be positive real came out otherwise."""


class StructureError(ValueError):
    """The operator failed a probe of its declared symmetry class."""


class SymmetryClass(str, Enum):
    """Structural classes the solver knows how to exploit."""

    COMPLEX_SYMMETRIC = "cs"
    SKEW_SYMMETRIC = "ss"
    SKEW_HERMITIAN = "sh"
    HERMITIAN = "hermitian"


def as_vector(x, n: Optional[int] = None) -> np.ndarray:
    """Copy input into a 1-d complex128 array, optionally checking length."""
    v = np.asarray(x, dtype=np.complex128).reshape(-1)
    if n is not None and v.shape[0] != n:
        raise ValueError(f"expected length {n}, got {v.shape[0]}")
    return v.copy()


def axpy(a: complex, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return a*x + y without mutating the inputs."""
    if x.shape != y.shape:
        raise ValueError("axpy: shape mismatch")
    return a * x + y


def inner_t(x: np.ndarray, y: np.ndarray) -> complex:
    """Unconjugated (transpose) inner product x^T y."""
    if x.shape != y.shape:
        raise ValueError("inner_t: shape mismatch")
    return complex(np.dot(x, y))


def inner_h(x: np.ndarray, y: np.ndarray) -> complex:
    """Conjugated inner product x^* y."""
    if x.shape != y.shape:
        raise ValueError("inner_h: shape mismatch")
    return complex(np.vdot(x, y))


def norm2(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


@dataclass
class SparseMatrix:
    """Square sparse matrix in CSR form, built from COO triplets.

    Duplicate entries are summed.  The matvec uses an unbuffered
    scatter-add so the result does not depend on entry order.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @classmethod
    def from_coo(cls, n: int, rows, cols, vals) -> "SparseMatrix":
        rows = np.asarray(rows, dtype=np.int64).reshape(-1)
        cols = np.asarray(cols, dtype=np.int64).reshape(-1)
        vals = np.asarray(vals, dtype=np.complex128).reshape(-1)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("COO triplet arrays must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n):
            raise ValueError("COO index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        if rows.size:
            keep = np.ones(rows.size, dtype=bool)
            keep[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            group = np.cumsum(keep) - 1
            summed = np.zeros(int(group[-1]) + 1, dtype=np.complex128)
            np.add.at(summed, group, vals)
            rows, cols, vals = rows[keep], cols[keep], summed
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n=n, indptr=indptr, indices=cols, data=vals)

    @classmethod
    def from_dense(cls, a: np.ndarray) -> "SparseMatrix":
        a = np.asarray(a, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("dense input must be square")
        rows, cols = np.nonzero(a)
        return cls.from_coo(a.shape[0], rows, cols, a[rows, cols])

    @property
    def nnz(self) -> int:
        return int(self.data.size)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128).reshape(-1)
        if x.shape[0] != self.n:
            raise ValueError("matvec: length mismatch")
        y = np.zeros(self.n, dtype=np.complex128)
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        np.add.at(y, rows, self.data * x[self.indices])
        return y

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.complex128)
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        a[rows, self.indices] += self.data
        return a

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=np.complex128)
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        on_diag = rows == self.indices
        np.add.at(d, rows[on_diag], self.data[on_diag])
        return d


@dataclass
class LinearOperator:
    """Matrix-free operator with a declared symmetry class.

    `apply` computes A @ x.  `shift` is an optional spectral shift the
    solver folds in; the solve config may also carry one (they must agree
    if both are nonzero).
    """

    n: int
    symmetry: SymmetryClass
    apply: Callable[[np.ndarray], np.ndarray]
    shift: complex = 0.0
    _applies: int = field(default=0, repr=False)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        self._applies += 1
        y = np.asarray(self.apply(x), dtype=np.complex128).reshape(-1)
        if y.shape[0] != self.n:
            raise ValueError("operator returned wrong length")
        return y

    @classmethod
    def from_matrix(cls, a, symmetry: SymmetryClass, shift: complex = 0.0) -> "LinearOperator":
        if isinstance(a, SparseMatrix):
            mat = a
        else:
            mat = SparseMatrix.from_dense(np.asarray(a))
        return cls(n=mat.n, symmetry=symmetry, apply=mat.matvec, shift=shift)


def probe_symmetry(op: LinearOperator, nprobe: int = 2, seed: int = 20260822) -> float:
    """Check the declared symmetry on random vector pairs.

    Returns the worst relative defect.  Raises ValueError when the
    operator visibly violates its declared class.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    anorm_est = 0.0
    for _ in range(nprobe):
        y = rng.standard_normal(op.n) + 1j * rng.standard_normal(op.n)
        z = rng.standard_normal(op.n) + 1j * rng.standard_normal(op.n)
        ay = op(y)
        az = op(z)
        anorm_est = max(anorm_est, norm2(ay) / norm2(y), norm2(az) / norm2(z))
        scale = max(anorm_est * norm2(y) * norm2(z), EPS)
        cls = op.symmetry
        if cls is SymmetryClass.COMPLEX_SYMMETRIC:
            defect = abs(inner_t(y, az) - inner_t(z, ay))
        elif cls is SymmetryClass.SKEW_SYMMETRIC:
            defect = abs(inner_t(y, az) + inner_t(z, ay))
        elif cls is SymmetryClass.SKEW_HERMITIAN:
            defect = abs(inner_h(y, az) + np.conj(inner_h(z, ay)))
        else:
            defect = abs(inner_h(y, az) - np.conj(inner_h(z, ay)))
        worst = max(worst, defect / scale)
    if worst > 1e-10:
        raise StructureError(
            f"operator is not {op.symmetry.value} (relative defect {worst:.2e})"
        )
    return worst
