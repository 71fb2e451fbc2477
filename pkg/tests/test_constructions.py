import warnings

import pytest

from covlab.bounds import weil_window
from covlab.constructions import (
    KummerWarning, builtin_examples, kummer_cover, monomials, product_cover, search_section,
)
from covlab.covers import ramified_mask, star_row
from covlab.ffield import make_field
from covlab.geometry import AFFINE, PROJECTIVE, GeometryError, VarietyDesc, count_points, point_codes
from covlab.mpoly import parse


def line(F):
    return VarietyDesc(AFFINE, 1, (), 1, F, name="A1")


def test_kummer_cover_shape_and_rows():
    F = make_field(5)
    f = kummer_cover(line(F), "x0", 3)
    assert f.degree == 3 and f.source.n == 2
    assert str(f.source.equations[0]) == "x1^3 + 4*x0"
    assert star_row(f, 1).bijective and not star_row(f, 2).bijective


def test_kummer_validation():
    F = make_field(5)
    with pytest.raises(ValueError, match="not prime"):
        kummer_cover(line(F), "x0", 4)
    with pytest.raises(ValueError, match="characteristic"):
        kummer_cover(line(F), "x0", 5)
    with pytest.raises(ValueError, match="nonconstant"):
        kummer_cover(line(F), "2", 3)
    with pytest.warns(KummerWarning):
        kummer_cover(line(make_field(7)), "x0", 3)
    cusp_base = VarietyDesc(AFFINE, 1, (), 1, F)
    # u with a double root makes x^3 = u singular over that root
    with pytest.raises(GeometryError, match="singular"):
        kummer_cover(cusp_base, "x0^2", 3)


def test_kummer_over_curve_keeps_type():
    F = make_field(11)
    C = VarietyDesc(AFFINE, 2, (parse("x0^2 + x1^2 - 1", 2, F),), 1, F, (2, 1, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        f = kummer_cover(C, "x0 + 2", 3)
    assert f.source.type_descriptor == (3, 2, 3)
    assert star_row(f, 1).bijective


@pytest.mark.parametrize("p", [2, 3, 5])
def test_product_cover_affine(p):
    F = make_field(p)
    f = product_cover(line(F), line(F))
    assert not f.finite
    for m in (1, 2):
        row = star_row(f, m)
        assert row.surjective and not row.injective and row.fiber_bound_ok is None


def test_product_cover_projective_is_segre():
    F = make_field(3)
    P1 = VarietyDesc(PROJECTIVE, 1, (), 1, F, name="P1")
    f = product_cover(P1, P1)
    assert f.source.n == 3 and len(f.source.equations) == 1
    assert count_points(f.source) == 16
    row = star_row(f, 1)
    assert row.surjective and not row.injective and row.max_fiber == 4
    assert not ramified_mask(f).any()


def test_product_cover_validation():
    F = make_field(3)
    point = VarietyDesc(AFFINE, 1, (parse("x0", 1, F),), 0, F)
    with pytest.raises(ValueError, match=">= 2"):
        product_cover(line(F), point)
    with pytest.raises(GeometryError, match="both"):
        product_cover(line(F), VarietyDesc(PROJECTIVE, 1, (), 1, F))


def test_monomials():
    assert monomials(2, 2) == [(2, 0), (1, 1), (0, 2)]
    assert len(monomials(4, 3)) == 20


@pytest.mark.parametrize("mode", ["fill", "avoid"])
def test_section_search_is_verified_and_deterministic(mode):
    F = make_field(3)
    X = builtin_examples(F)["conic"][0]
    res = search_section(X, 3, mode, trials=60, seed=7)
    assert res is not None and res.mode == mode and res.seed == 7
    Z = res.variety
    if mode == "fill":
        assert (point_codes(Z) == point_codes(X)).all()
    else:
        assert count_points(Z) == 0
    again = search_section(X, 3, mode, trials=60, seed=7)
    assert again.form == res.form and again.trial == res.trial


def test_section_not_found_returns_none():
    F = make_field(3)
    P2 = VarietyDesc(PROJECTIVE, 2, (), 2, F)
    # every form of degree <= 2 vanishes somewhere on P^2(F_3)
    assert search_section(P2, 2, "avoid", trials=20) is None


def test_section_validation():
    F = make_field(3)
    with pytest.raises(GeometryError):
        search_section(line(F), 2)
    with pytest.raises(ValueError):
        search_section(VarietyDesc(PROJECTIVE, 1, (), 1, F), 2, "middle")


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_builtin_examples_satisfy_weil_window(p):
    F = make_field(p)
    for name, (V, b) in builtin_examples(F).items():
        assert V.dim == b.dim
        for m in (1, 2):
            q = F.q**m
            lo, hi = weil_window(q, b.sigma_c, V.dim)
            n = count_points(V, m)
            assert lo - 1e-9 <= n <= hi + 1e-9, (name, q, n)
