"""Quick internal consistency checks for ``covlab selftest``."""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .bounds import HodgeDiamond, crossover_holds, crossover_threshold, nonempty_threshold, surface_embedding_data
from .covers import affine_line_map, kummer_exceptionality_oracle, pair_counts, ramification_points, star_report
from .covers import OFF_DIAGONAL_RAMIFIED, OFF_DIAGONAL_UNRAMIFIED, EXCEPTIONAL
from .ffield import make_field


def _kummer():
    F = make_field(5)
    rep = star_report(affine_line_map(F, "x0^3"), 4)
    want = [kummer_exceptionality_oracle(3, 5**m) == EXCEPTIONAL for m in range(1, 5)]
    return [r.bijective for r in rep.rows] == want


def _pairs():
    f = affine_line_map(make_field(7), "x0^3")
    pc = pair_counts(f)
    ram = [str(P) for P in ramification_points(f)]
    return pc[OFF_DIAGONAL_RAMIFIED] + pc[OFF_DIAGONAL_UNRAMIFIED] == 12 and ram == ["(0)"]


def _thresholds():
    if nonempty_threshold(5, 1) != 16:
        return False
    C = crossover_threshold(3, 1, 2, 0)
    return crossover_holds(C + 1, 3, 1, 2, 0) and not crossover_holds(C, 3, 1, 2, 0)


def _surface():
    s = surface_embedding_data(HodgeDiamond.from_flat([1, 0, 4, 0, 40, 0, 4, 0, 1]))
    return (s.chi, s.k_squared, s.n) == (5, 10, 104)


def _backends():
    if K.numba_backend is None:
        return True
    F = make_field(3, 2)
    p, k, mod = F.kparams
    rng = np.random.default_rng(0)
    a, b = rng.integers(0, F.q, 64), rng.integers(0, F.q, 64)
    mats = rng.integers(0, F.q, (16, 3, 4))
    return (np.array_equal(K.numba_backend.mul_flat(a, b, p, k, mod), K.numpy_backend.mul(a, b, p, k, mod))
            and np.array_equal(K.numba_backend.batch_rank(mats, p, k, mod),
                               K.numpy_backend.batch_rank(mats, p, k, mod)))


CHECKS = (
    ("kummer t^3 over GF(5), m <= 4, matches gcd oracle", _kummer),
    ("t^3 over GF(7): 12 off-diagonal pairs, ramification at 0", _pairs),
    ("threshold formulas", _thresholds),
    ("surface invariants of a sample diamond", _surface),
    ("numba and numpy kernels agree", _backends),
)


def run() -> tuple[list[str], bool]:
    lines, ok = [f"backend {K.BACKEND}"], True
    for label, check in CHECKS:
        try:
            good = bool(check())
        except Exception as exc:  # report, keep going
            good, label = False, f"{label} ({type(exc).__name__}: {exc})"
        ok &= good
        lines.append(f"{'PASS' if good else 'FAIL'}  {label}")
    return lines, ok
