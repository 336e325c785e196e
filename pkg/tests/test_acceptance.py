"""Acceptance gate: eleven numbered criteria, one test each.

Each test ends with a single printed verdict line; run with -v (or -s)
to see them.  Suite runs are cached at module level so the residual and
rank checks reuse the same monitored solves they grade.
"""

import math
import time
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from symkrylov.core import EPS, norm2
from symkrylov.oracle import (
    SplitMix64,
    dense_qlp,
    mixed_spectrum_matrix,
    skew_hermitian_matrix,
    suite_problem,
    symmetric_imaginary_matrix,
    tsvd_solve,
)
from symkrylov.precond import Identity
from symkrylov.reflect import sym_ortho
from symkrylov.solver import (
    MonitorRecord,
    SolverConfig,
    StopReason,
    solve,
)

SEED = 42424242


@dataclass
class SuiteRun:
    problem: object
    report: object
    records: List[MonitorRecord]
    s: np.ndarray
    relerr: float
    kappa: float


_CACHE: Dict[Tuple[str, int, bool, bool], List[SuiteRun]] = {}


def _suite(family: str, n: int, count: int, compatible: bool,
           reorthogonalize: bool) -> List[SuiteRun]:
    key = (family, n, compatible, reorthogonalize)
    if key in _CACHE:
        return _CACHE[key]
    runs = []
    for index in range(count):
        p = suite_problem(family, n, index, SEED, compatible)
        recs: List[MonitorRecord] = []
        r = solve(p.a, p.b, p.variant, SolverConfig(tol=EPS, maxit=4 * n),
                  monitor=recs.append, reorthogonalize=reorthogonalize)
        s = np.linalg.svd(p.a, compute_uv=False)
        kappa = s[0] / s[p.rank - 1]
        x_ref = tsvd_solve(p.a, p.b)
        relerr = norm2(r.x - x_ref) / max(norm2(x_ref), EPS)
        runs.append(SuiteRun(p, r, recs, s, relerr, kappa))
    _CACHE[key] = runs
    return runs


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_criterion_01_tiny_pseudoinverse():
    a = 1j * np.diag([1.0, 0.0])
    b = 1j * np.ones(2)
    solve(a, b, "cs")
    best = math.inf
    for _ in range(3):
        t0 = time.perf_counter()
        r = solve(a, b, "cs")
        best = min(best, time.perf_counter() - t0)
    err = norm2(r.x - np.array([1.0, 0.0]))
    _verdict(1, err <= 1e-12 and best < 1e-3,
             f"err {err:.2e}, {best * 1e3:.3f} ms")


def test_criterion_02_compatible_singular_suite():
    t0 = time.perf_counter()
    runs = _suite("cs-h", 50, 20, True, False)
    elapsed = time.perf_counter() - t0
    assert all(r.problem.rank == 47 for r in runs)
    assert all(r.kappa <= 1e4 for r in runs)
    errs = [r.relerr for r in runs]
    tight = sum(1 for e in errs if e <= 1e-6)
    _verdict(2, tight >= 18 and max(errs) <= 1e-3 and elapsed < 5.0,
             f"{tight}/20 at 1e-6, worst {max(errs):.2e}, {elapsed:.2f} s")


def test_criterion_03_least_squares_suite():
    t0 = time.perf_counter()
    runs = _suite("cs-h", 50, 20, False, True)
    elapsed = time.perf_counter() - t0
    good = sum(1 for r in runs
               if r.relerr <= 1e-4 * r.kappa
               and r.report.reason is StopReason.Converged_ArNorm)
    _verdict(3, good >= 17 and elapsed < 10.0,
             f"{good}/20 within 1e-4*kappa with ArNorm exit, "
             f"worst {max(r.relerr for r in runs):.2e}, {elapsed:.2f} s")


def test_criterion_04_skew_suites():
    details = []
    ok = True
    for family in ("ss", "sh"):
        compat = _suite(family, 51, 10, True, False)
        tight = sum(1 for r in compat if r.relerr <= 1e-6)
        ok &= tight >= 9 and max(r.relerr for r in compat) <= 1e-3
        ls = _suite(family, 51, 10, False, True)
        good = sum(1 for r in ls
                   if r.relerr <= 1e-4 * r.kappa
                   and r.report.reason is StopReason.Converged_ArNorm)
        ok &= good >= 9
        details.append(f"{family} {tight}/10 compat, {good}/10 ls")
    _verdict(4, ok, "; ".join(details))


def test_criterion_05_residual_recurrence():
    worst = 0.0
    count = 0
    for family, n, cnt in (("cs-h", 50, 20), ("ss", 51, 10), ("sh", 51, 10)):
        for compatible, reorth in ((True, False), (False, True)):
            runs = _suite(family, n, cnt, compatible, reorth)
            for run in runs:
                count += 1
                beta1 = norm2(run.problem.b)
                s1 = run.s[0]
                for m in run.records:
                    if m.phi < 1e-10 * beta1:
                        continue
                    true_r = norm2(run.problem.b - run.problem.a @ m.x)
                    gap = abs(m.phi - true_r) / (s1 * norm2(m.x) + beta1)
                    worst = max(worst, gap)
    _verdict(5, worst <= 1e-8,
             f"worst gap {worst:.2e} over {count} runs")


def test_criterion_06_phase_equivalence():
    worst = 0.0
    transfers_ok = True
    for t in range(10):
        rng = SplitMix64(7000 + t)
        n = 24
        kind = t % 3
        if kind == 0:
            a = symmetric_imaginary_matrix(n, n, rng)
            variant = "cs"
        elif kind == 1:
            a = mixed_spectrum_matrix(n, n, rng)
            variant = "cs"
        else:
            a = skew_hermitian_matrix(n, rng) + 0.5j * np.eye(n)
            variant = "sh"
        b = rng.uniforms(n).astype(np.complex128)
        r1 = solve(a, b, variant, SolverConfig(tol=1e-12, trancond=1.0))
        r2 = solve(a, b, variant, SolverConfig(tol=1e-12, trancond=1e300))
        transfers_ok &= r1.transfer_iteration == 1 and r2.transfer_iteration == 0
        worst = max(worst, norm2(r1.x - r2.x) / norm2(r2.x))
    _verdict(6, worst <= 1e-8 and transfers_ok,
             f"worst relative gap {worst:.2e}")


def _rebuild_square_t(recs: List[MonitorRecord]) -> np.ndarray:
    ell = len(recs)
    t = np.zeros((ell, ell), dtype=np.complex128)
    for j, m in enumerate(recs):
        t[j, j] = m.alpha
        if j + 1 < ell:
            t[j + 1, j] = m.sub
            t[j, j + 1] = m.sup
    return t


def test_criterion_07_rank_reveal():
    ok = True
    details = []
    fams = ["cs-h", "ss", "sh", "cs-h", "ss", "sh", "cs-h", "ss", "sh", "cs-h"]
    for t, family in enumerate(fams):
        n = 50 if family.startswith("cs") else 51
        idx = t // 3
        p = suite_problem(family, n, idx, SEED, False)
        recs: List[MonitorRecord] = []
        r = solve(p.a, p.b, p.variant, SolverConfig(tol=EPS, maxit=4 * n),
                  monitor=recs.append, reorthogonalize=True)
        ell = r.iterations
        tmat = _rebuild_square_t(recs)
        thresh = max(ell * EPS * r.anorm, math.sqrt(EPS) * max(r.anorm, 1.0))
        _, low, _ = dense_qlp(tmat)
        svals = np.linalg.svd(low, compute_uv=False)
        rank_l = int(np.sum(svals > thresh))
        diag_rank = int(np.sum(np.abs(np.diag(low)) > thresh))
        flagged = abs(recs[-1].gamma4) <= thresh
        good = rank_l == ell - 1 and diag_rank == ell - 1 and flagged
        ok &= good
        details.append(f"{p.id}:{'ok' if good else 'BAD'}")
    _verdict(7, ok, " ".join(details))


def _rebuild_rect_t(recs: List[MonitorRecord], k: int) -> np.ndarray:
    t = np.zeros((k + 1, k), dtype=np.complex128)
    for j in range(k):
        t[j, j] = recs[j].alpha
        t[j + 1, j] = recs[j].sub
        if j + 1 < k:
            t[j, j + 1] = recs[j].sup
    return t


def test_criterion_08_estimator_bounds():
    ok = True
    worst_ratio = 0.0
    worst_anorm = 0.0
    for family, idx, compatible in (("cs-h", 0, True), ("cs-h", 0, False),
                                    ("cs-m", 1, True), ("cs-m", 1, False)):
        p = suite_problem(family, 40, idx, SEED, compatible)
        recs: List[MonitorRecord] = []
        solve(p.a, p.b, p.variant, SolverConfig(tol=1e-10, maxit=160),
              monitor=recs.append)
        s1 = np.linalg.svd(p.a, compute_uv=False)[0]
        anorms = [m.anorm for m in recs]
        ok &= all(a <= s1 * (1.0 + 1e-10) for a in anorms)
        ok &= all(a <= b * (1.0 + 1e-15) for a, b in zip(anorms, anorms[1:]))
        worst_anorm = max(worst_anorm, max(anorms) / s1)
        for k in range(2, min(15, len(recs)) + 1):
            tk = _rebuild_rect_t(recs, k)
            sv = np.linalg.svd(tk, compute_uv=False)
            true_cond = sv[0] / sv[-1]
            ratio = recs[k - 1].acond / true_cond
            worst_ratio = max(worst_ratio, ratio)
            ok &= recs[k - 1].acond <= true_cond * 1.01
    _verdict(8, ok, f"max acond/cond(T) {worst_ratio:.6f}, "
                    f"max anorm/sigma1 {worst_anorm:.12f}")


def test_criterion_09_sym_ortho_properties():
    rng = SplitMix64(424242)
    pairs = [
        (1e150, 1e150), (1e150, 1e-150), (1e-150, 1e150), (1e-150, 1e-150),
        (1e150, 0.0), (0.0, 1e-150), (1e150 * 1j, 1e150), (1e-150, 1e150j),
    ]
    while len(pairs) < 100000:
        ma = 10.0 ** (-150.0 + 300.0 * rng.uniform())
        mb = 10.0 ** (-150.0 + 300.0 * rng.uniform())
        if rng.uniform() < 0.5:
            a = ma if rng.uniform() < 0.5 else -ma
            b = mb if rng.uniform() < 0.5 else -mb
        else:
            ta = 2.0 * math.pi * rng.uniform()
            tb = 2.0 * math.pi * rng.uniform()
            a = ma * complex(math.cos(ta), math.sin(ta))
            b = mb * complex(math.cos(tb), math.sin(tb))
        pairs.append((a, b))
    worst_unit = 0.0
    worst_ann = 0.0
    finite = True
    for a, b in pairs:
        rot = sym_ortho(a, b)
        c, s, r = rot.c, rot.s, rot.r
        finite &= (math.isfinite(c) and math.isfinite(abs(s))
                   and math.isfinite(abs(r)))
        worst_unit = max(worst_unit, abs(c * c + abs(s) ** 2 - 1.0))
        scale = max(abs(a), abs(b))
        if scale > 0.0:
            worst_ann = max(worst_ann,
                            abs(np.conj(s) * a - c * b) / scale)
    _verdict(9, worst_unit <= 8 * EPS and worst_ann <= 8 * EPS and finite,
             f"unit {worst_unit / EPS:.2f} eps, "
             f"annihilation {worst_ann / EPS:.2f} eps over {len(pairs)} pairs")


def test_criterion_10_identity_preconditioner():
    worst = 0.0
    fams = [("cs-h", 0, True), ("cs-h", 1, False), ("ss", 0, True),
            ("sh", 0, True), ("cs-m", 0, True)]
    for family, idx, compatible in fams:
        n = 30 if family.startswith("cs") else 31
        p = suite_problem(family, n, idx, SEED, compatible)
        m1: List[MonitorRecord] = []
        m2: List[MonitorRecord] = []
        solve(p.a, p.b, p.variant, SolverConfig(tol=1e-11, maxit=4 * n),
              monitor=m1.append)
        solve(p.a, p.b, p.variant, SolverConfig(tol=1e-11, maxit=4 * n),
              monitor=m2.append, preconditioner=Identity())
        assert len(m1) == len(m2)
        for x, y in zip(m1, m2):
            gap = norm2(x.x - y.x) / max(norm2(x.x), 1.0)
            worst = max(worst, gap)
    _verdict(10, worst <= 4 * EPS,
             f"worst per-iteration gap {worst / EPS:.2f} eps on 5 problems")


def test_criterion_11_degenerate_contracts():
    r0 = solve(np.eye(3), np.zeros(3), "cs")
    zero_ok = (r0.reason is StopReason.BetaZero_xZero
               and not r0.x.any() and r0.iterations == 0)

    b = np.array([1.0 + 1.0j, 0.0])
    r1 = solve(1j * np.eye(2), b, "cs")
    # alpha_1 = 1 here, so the one step formula gives conj(b)
    one_ok = (r1.reason is StopReason.Beta2Zero_OneStep
              and norm2(r1.x - np.conj(b)) <= 1e-12)
    b2 = np.array([1.0, 0.0])
    r2 = solve(1j * np.eye(2), b2, "cs")
    one_ok &= norm2(r2.x - np.conj(b2) / 1j) <= 1e-12

    r3 = solve(np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones(2), "cs")
    probe_ok = r3.reason is StopReason.NotStructured
    _verdict(11, zero_ok and one_ok and probe_ok,
             f"zero rhs {zero_ok}, one step {one_ok}, probe {probe_ok}")
