"""Acceptance criteria, each at its stated tolerance, one summary line per criterion."""

import contextlib
import csv
import io
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from covlab import config
from covlab.bounds import (
    HodgeDiamond, crossover_holds, crossover_threshold, hodge_candidate_count, hodge_candidates,
    nonempty_threshold, surface_embedding_data, weil_lower_holds,
)
from covlab.cli import main
from covlab.constructions import product_cover
from covlab.covers import (
    EXCEPTIONAL, OFF_DIAGONAL_RAMIFIED, OFF_DIAGONAL_UNRAMIFIED, affine_line_map, fiber_product_pairs,
    injective_on, kummer_exceptionality_oracle, pair_counts, ramification_points, star_report,
)
from covlab.ffield import make_field
from covlab.geometry import AFFINE, PROJECTIVE, VarietyDesc
from covlab.mpoly import Multinomial, parse
from covlab.problem import dumps
from covlab.selftest import run as warm_kernels


@contextlib.contextmanager
def criterion(n, detail=""):
    info = {"detail": detail}
    try:
        yield info
    except BaseException:
        ACCEPTANCE[n] = (False, info["detail"])
        raise
    if ACCEPTANCE.get(n, (True,))[0]:
        ACCEPTANCE[n] = (True, info["detail"])


@pytest.fixture(scope="module", autouse=True)
def warm():
    # JIT compilation is excluded from the timed criteria
    warm_kernels()
    for p in (2, 5, 7, 11):
        star_report(affine_line_map(make_field(p), "x0^3"), 2)


def csv_rows(text):
    return list(csv.DictReader(line for line in io.StringIO(text) if not line.startswith("#")))


def random_suite(n=50, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        p = int(rng.choice([3, 5, 7, 11]))
        F = make_field(p)
        deg = int(rng.integers(1, 6))
        terms = {(deg,): F(int(rng.integers(1, p)))}
        for e in rng.choice(deg, size=min(deg, int(rng.integers(0, 3))), replace=False):
            terms[(int(e),)] = F(int(rng.integers(1, p)))
        out.append(affine_line_map(F, Multinomial(F, 1, terms)))
    return out


SUITE = random_suite()


@pytest.mark.parametrize("p,ell", [(5, 3), (7, 5), (11, 3), (2, 3)])
def test_criterion_1_kummer_bijective(tmp_path, capsys, p, ell):
    with criterion(1, "t -> t^l bijective at m = 1 for (5,3), (7,5), (11,3), (2,3); < 1 s each") as c:
        assert math.gcd(ell, p - 1) == 1
        path = tmp_path / "k.cov"
        path.write_text(dumps(covers={"kummer": affine_line_map(make_field(p), f"x0^{ell}")}))
        t0 = time.perf_counter()
        code = main(["analyze", str(path), "--max-ext", "1", "--format", "csv"])
        elapsed = time.perf_counter() - t0
        out = capsys.readouterr().out
        assert code == 0
        (row,) = csv_rows(out)
        assert row["injective"] == "true" and row["surjective"] == "true"
        assert int(row["image_points"]) == int(row["source_points"]) == p
        assert elapsed < 1.0, elapsed


def test_criterion_2_refutation_pattern():
    with criterion(2, "t -> t^3 over GF(5), m <= 6, bijective exactly when gcd(3, 5^m - 1) = 1; < 10 s") as c:
        f = affine_line_map(make_field(5), "x0^3")
        t0 = time.perf_counter()
        with config.budget(10**8):
            rep = star_report(f, 6)
        elapsed = time.perf_counter() - t0
        assert not rep.truncated and len(rep.rows) == 6
        got = [r.bijective for r in rep.rows]
        oracle = [kummer_exceptionality_oracle(3, 5**m) == EXCEPTIONAL for m in range(1, 7)]
        assert got == oracle == [m % 2 == 1 for m in range(1, 7)]
        assert rep.refuted_at == 2
        assert elapsed < 10.0, elapsed
        c["detail"] += f" ({elapsed:.2f} s)"


def test_criterion_3_fiber_product_consistency():
    with criterion(3, "GF(7) cube: 12 off-diagonal pairs, ramification {0}; 50-cover suite agrees 100%") as c:
        f = affine_line_map(make_field(7), "x0^3")
        pc = pair_counts(f)
        assert pc[OFF_DIAGONAL_RAMIFIED] + pc[OFF_DIAGONAL_UNRAMIFIED] == 12
        listed = [pair for pair in fiber_product_pairs(f) if not pair.diagonal]
        assert len(listed) == 12
        assert [str(P) for P in ramification_points(f)] == ["(0)"]
        agree = total = 0
        for g in SUITE:
            for m in (1, 2):
                by_image = injective_on(g, m)
                by_pairs = not any(not pair.diagonal for pair in fiber_product_pairs(g, m))
                agree += by_image == by_pairs
                total += 1
        assert total == 100
        assert agree == total
        c["detail"] += f" ({agree}/{total} cover-extension cases)"


def test_criterion_4_injective_has_no_unramified_collisions():
    with criterion(4, "injective => zero off-diagonal-unramified pairs on the suite") as c:
        checked = 0
        for g in SUITE:
            for m in (1, 2, 3):
                if injective_on(g, m):
                    checked += 1
                    assert pair_counts(g, m)[OFF_DIAGONAL_UNRAMIFIED] == 0
        assert checked > 0
        c["detail"] += f" ({checked} injective cases, 0 exceptions)"


def least_threshold_by_search(holds):
    """Least C with holds(q) for all q > C, for a predicate monotone in q."""
    if holds(1):
        return 0
    lo, hi = 1, 2
    while not holds(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        lo, hi = (lo, mid) if holds(mid) else (mid, hi)
    return lo


def test_criterion_5_threshold_formulas():
    with criterion(5, "(sigma-1)^2 for all sigma <= 1e4; crossover boundary on 1000 tuples; < 5 s") as c:
        t0 = time.perf_counter()
        for sigma in range(1, 10**4 + 1):
            d = sigma % 4
            C = nonempty_threshold(sigma, d)
            assert C == (sigma - 1) ** 2
            assert C == least_threshold_by_search(lambda q: weil_lower_holds(q, sigma, d))
        rng = np.random.default_rng(5)
        for _ in range(1000):
            dz = int(rng.integers(1, 5))
            dr = int(rng.integers(0, dz))
            sz, sr = int(rng.integers(1, 200)), int(rng.integers(0, 200))
            C = crossover_threshold(sz, dz, sr, dr)
            assert crossover_holds(C + 1, sz, dz, sr, dr)
            assert C == 0 or not crossover_holds(C, sz, dz, sr, dr)
        elapsed = time.perf_counter() - t0
        assert elapsed < 5.0, elapsed
        c["detail"] += f" ({elapsed:.2f} s)"


def test_criterion_6_surface_formulas():
    with criterion(6, "20 random diamonds with K^2 > 0; candidate counts for b1, b2, b3 <= 6") as c:
        rng = np.random.default_rng(6)
        done = 0
        while done < 20:
            v = [1] + [int(x) for x in rng.integers(0, 8, 7)] + [1]
            h = HodgeDiamond.from_flat(v)
            chi = v[0] - v[1] + v[2]
            e = sum((-1) ** (i + j) * v[3 * i + j] for i in range(3) for j in range(3))
            ksq = 12 * chi - e
            if ksq <= 0:
                continue
            s = surface_embedding_data(h)
            assert (s.chi, s.k_squared, s.n) == (chi, ksq, 10 * ksq + chi - 1)
            for t in range(-10, 11):
                val = s.hilbert_value(t)
                assert val.denominator == 1
                assert 2 * val == 25 * ksq * t * t - 5 * ksq * t + 2 * chi
            done += 1
        for b1 in range(7):
            for b2 in range(7):
                for b3 in range(7):
                    n = len(hodge_candidates(b1, b2, b3))
                    assert n == (b1 + 1) * (b2 + 1) * (b2 + 2) // 2 * (b3 + 1) == hodge_candidate_count(b1, b2, b3)


def random_bases(n=5, seed=7):
    rng = np.random.default_rng(seed)
    out = []
    kinds = ["line", "graph", "circle", "p1", "graph"]
    for kind in kinds[:n]:
        p = int(rng.choice([3, 5]))
        F = make_field(p)
        if kind == "line":
            out.append((VarietyDesc(AFFINE, 1, (), 1, F, name="A1"), VarietyDesc(AFFINE, 1, (), 1, F)))
        elif kind == "graph":
            cs = [int(x) for x in rng.integers(0, p, 4)]
            g = parse(f"x1 - ({cs[0]}*x0^3 + {cs[1]}*x0^2 + {cs[2]}*x0 + {cs[3]})", 2, F)
            out.append((VarietyDesc(AFFINE, 2, (g,), 1, F, name="graph"), VarietyDesc(AFFINE, 1, (), 1, F)))
        elif kind == "circle":
            a = int(rng.integers(1, p))
            C = VarietyDesc(AFFINE, 2, (parse(f"x0^2 + x1^2 - {a}", 2, F),), 1, F, name="circle")
            out.append((C, VarietyDesc(AFFINE, 1, (), 1, F)))
        else:
            P1 = VarietyDesc(PROJECTIVE, 1, (), 1, F, name="P1")
            out.append((P1, P1))
    return out


def test_criterion_7_product_cover():
    with criterion(7, "Y x V -> Y surjective and not injective for 5 random bases, m <= 3") as c:
        for Y, V in random_bases():
            f = product_cover(Y, V)
            rep = star_report(f, 3)
            assert len(rep.rows) == 3 and not rep.truncated
            for row in rep.rows:
                assert row.surjective and not row.injective, (Y.name, row)


def test_criterion_8_headline_statement_is_covered_by_property_suites():
    # the statement quantifies over every cover and field; what is checkable is the
    # Kummer refutation pattern and the threshold formulas, exercised by criteria 2-5
    missing = [n for n in (2, 3, 4, 5) if n not in ACCEPTANCE]
    if missing:
        pytest.skip(f"criteria {missing} were not run in this session")
    with criterion(8, "not reproducible numerically; covered by criteria 2-5") as c:
        failed = [n for n in (2, 3, 4, 5) if not ACCEPTANCE[n][0]]
        c["detail"] += f" ({'failed: ' + str(failed) if failed else 'all four pass'})"
        assert not failed
        C = nonempty_threshold(4, 1)
        assert all(weil_lower_holds(q, 4, 1) for q in range(C + 1, C + 100))
