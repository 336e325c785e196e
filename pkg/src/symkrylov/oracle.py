"""Dense reference solvers and reproducible problem generators.

The reference route goes through numpy's SVD/QR factorizations and
never touches the iterative engine, so the two can check each other.
Problem generation uses a self-contained SplitMix64 stream to stay
bit-reproducible across numpy versions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import EPS, SymmetryClass

_MASK = (1 << 64) - 1


class SplitMix64:
    """64-bit SplitMix generator (Steele et al. constants).

    uniform() maps the top 53 bits onto [0, 1); gaussians come from
    Box-Muller on a pair of uniforms.
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK
        self._spare: Optional[float] = None

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniforms(self, n: int) -> np.ndarray:
        return np.array([self.uniform() for _ in range(n)], dtype=np.float64)

    def gaussian(self) -> float:
        if self._spare is not None:
            g, self._spare = self._spare, None
            return g
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def gaussians(self, n: int) -> np.ndarray:
        return np.array([self.gaussian() for _ in range(n)], dtype=np.float64)


def haar_orthogonal(n: int, rng: SplitMix64) -> np.ndarray:
    """Random real orthogonal matrix; sign-fixing the R diagonal makes
    the distribution Haar and the output deterministic in the stream."""
    g = rng.gaussians(n * n).reshape(n, n)
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r))
    d[d == 0.0] = 1.0
    return q * d


def _spectrum(n: int, rank: int, rng: SplitMix64) -> np.ndarray:
    """rank nonzero eigenvalues, magnitudes log-uniform in [1e-3, 1]."""
    lam = np.zeros(n, dtype=np.float64)
    for i in range(rank):
        mag = 10.0 ** (-3.0 * rng.uniform())
        lam[i] = mag if rng.uniform() < 0.5 else -mag
    return lam


def symmetric_imaginary_matrix(n: int, rank: int, rng: SplitMix64) -> np.ndarray:
    """i times a rank-deficient real symmetric matrix: complex symmetric."""
    q = haar_orthogonal(n, rng)
    lam = _spectrum(n, rank, rng)
    a = (q * lam) @ q.T
    a = 0.5 * (a + a.T)
    return 1j * a


def mixed_spectrum_matrix(n: int, rank: int, rng: SplitMix64) -> np.ndarray:
    """Complex symmetric Q (D + i Lambda) Q^T with D random real on the
    support of Lambda; eigenvalues land in a ball of radius sqrt(2)
    times the largest |lambda|."""
    q = haar_orthogonal(n, rng)
    lam = _spectrum(n, rank, rng)
    top = float(np.max(np.abs(lam))) if rank else 0.0
    d = np.zeros(n, dtype=np.float64)
    for i in range(n):
        if lam[i] != 0.0:
            d[i] = (2.0 * rng.uniform() - 1.0) * top
    a = (q * (d + 1j * lam)) @ q.T
    return 0.5 * (a + a.T)


def skew_symmetric_matrix(n: int, rng: SplitMix64) -> np.ndarray:
    """Real skew symmetric from a uniform square; odd n makes it
    singular with nullity one."""
    base = rng.uniforms(n * n).reshape(n, n)
    lower = np.tril(base)
    return lower - lower.T


def skew_hermitian_matrix(n: int, rng: SplitMix64) -> np.ndarray:
    """(1+i) L - (1-i) L^T with the last row and column of the base
    zeroed; that zeroes the matrix's last row and column too, forcing a
    null vector regardless of parity."""
    base = rng.uniforms(n * n).reshape(n, n)
    base[-1, :] = 0.0
    base[:, -1] = 0.0
    lower = np.tril(base, -1)
    s = lower - lower.T
    b = lower + lower.T
    return s + 1j * b


def numerical_rank(a: np.ndarray) -> int:
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > a.shape[0] * EPS * s[0]))


def tsvd_solve(a: np.ndarray, b: np.ndarray, t: Optional[float] = None) -> np.ndarray:
    """Minimum-length least-squares solution by truncated SVD.

    Singular values at or below t*eps*sigma_max are treated as zero;
    t defaults to the dimension, the same noise scale the iterative
    side uses for rank decisions.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    if t is None:
        t = float(a.shape[0])
    u, s, vh = np.linalg.svd(a)
    ub = u.conj().T @ b
    y = np.zeros_like(ub)
    if s.size:
        keep = s > t * EPS * s[0]
        y[keep] = ub[keep] / s[keep]
    return vh.conj().T @ y


def dense_qlp(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Two-sided orthogonal factorization Q a P = L, L lower triangular
    with real nonnegative diagonal.  Built from two QR passes."""
    a = np.asarray(a, dtype=np.complex128)
    q1, r1 = np.linalg.qr(a)
    q2, r2 = np.linalg.qr(r1.conj().T)
    low = r2.conj().T
    diag = np.diagonal(low).copy()
    mags = np.abs(diag)
    phase = np.where(mags > 0.0, diag / np.where(mags > 0.0, mags, 1.0), 1.0)
    low = low * np.conj(phase)[np.newaxis, :]
    p = q2 * np.conj(phase)[np.newaxis, :]
    return q1.conj().T, low, p


@dataclass
class GeneratedProblem:
    """One suite problem: operator data plus the right-hand side."""

    id: str
    n: int
    variant: SymmetryClass
    a: np.ndarray
    b: np.ndarray
    compatible: bool
    rank: int


_FAMILY_CODE = {"cs-h": 1, "cs-m": 2, "ss": 3, "sh": 4}

_FAMILY_VARIANT = {
    "cs-h": SymmetryClass.COMPLEX_SYMMETRIC,
    "cs-m": SymmetryClass.COMPLEX_SYMMETRIC,
    "ss": SymmetryClass.SKEW_SYMMETRIC,
    "sh": SymmetryClass.SKEW_HERMITIAN,
}


def _stream(seed: int, family: str, index: int, compatible: bool) -> SplitMix64:
    mixed = (seed * 0x9E3779B97F4A7C15 + _FAMILY_CODE[family] * 65537
             + index * 2 + int(compatible)) & _MASK
    return SplitMix64(mixed)


def suite_problem(family: str, n: int, index: int, seed: int,
                  compatible: bool) -> GeneratedProblem:
    """Deterministic problem index `index` of a family suite.

    cs families are generated at rank n-3; ss relies on odd n for its
    nullity; sh is singular by construction.  Compatible right-hand
    sides are A z with z uniform; incompatible ones are plain uniform.
    """
    if family not in _FAMILY_CODE:
        raise ValueError(f"unknown family {family!r}")
    rng = _stream(seed, family, index, compatible)
    if family == "cs-h":
        a = symmetric_imaginary_matrix(n, n - 3, rng)
    elif family == "cs-m":
        a = mixed_spectrum_matrix(n, n - 3, rng)
    elif family == "ss":
        a = skew_symmetric_matrix(n, rng)
    else:
        a = skew_hermitian_matrix(n, rng)
    z = rng.uniforms(n).astype(np.complex128)
    b = a @ z if compatible else z
    kind = "c" if compatible else "i"
    return GeneratedProblem(
        id=f"{family}-n{n}-{kind}{index:03d}",
        n=n,
        variant=_FAMILY_VARIANT[family],
        a=a,
        b=b,
        compatible=compatible,
        rank=numerical_rank(a),
    )
