import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from covlab import config
from covlab.ffield import enumerate_elements, make_field
from covlab.geometry import (
    AFFINE, PROJECTIVE, GeometryError, Point, VarietyDesc, affine_chart, count_points,
    enumerate_points, from_chart, is_smooth_at, jacobian_rank_at, jacobian_ranks, point_codes,
    singular_points, tangent_space, to_chart,
)
from covlab.mpoly import parse


def brute_count(V, F):
    """Count by nested Python loops over normalized representatives."""
    els = enumerate_elements(F)
    n = 0
    for coords in itertools.product(els, repeat=V.nvars):
        if V.projective:
            nz = [c for c in coords if not c.is_zero()]
            if not nz or nz[0] != F.one:
                continue
        if all(eq.evaluate(coords).is_zero() for eq in V.equations):
            n += 1
    return n


def test_circle_points_and_tangent():
    F = make_field(5)
    C = VarietyDesc(AFFINE, 2, (parse("x0^2 + x1^2 - 1", 2, F),), 1, F)
    pts = enumerate_points(C)
    assert [str(P) for P in pts] == ["(0, 1)", "(0, 4)", "(1, 0)", "(4, 0)"]
    assert all(is_smooth_at(C, P) for P in pts)
    assert tangent_space(C, pts[0]) == [[F(1), F(0)]]


@pytest.mark.parametrize("p,k,n", [(2, 1, 2), (3, 1, 3), (2, 2, 2), (5, 1, 1), (3, 2, 1)])
def test_projective_space_count(p, k, n):
    F = make_field(p, k)
    V = VarietyDesc(PROJECTIVE, n, (), n, F)
    q = F.q
    assert count_points(V) == (q ** (n + 1) - 1) // (q - 1)
    assert count_points(V, 2) == (q ** (2 * n + 2) - 1) // (q**2 - 1)


def test_enumeration_order_and_normalization():
    F = make_field(3)
    pts = enumerate_points(VarietyDesc(PROJECTIVE, 1, (), 1, F))
    assert [str(P) for P in pts] == ["(1:0)", "(1:1)", "(1:2)", "(0:1)"]
    assert Point((F(2), F(1)), projective=True) == Point((F(1), F(2)), projective=True)


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_conic_has_q_plus_one_points(p):
    F = make_field(p)
    C = VarietyDesc(PROJECTIVE, 2, (parse("x0^2 + x1^2 - x2^2", 3, F),), 1, F)
    assert count_points(C) == p + 1
    assert count_points(C, 2) == p * p + 1
    assert singular_points(C) == []


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_elliptic_curve_matches_brute_force_and_hasse(p):
    F = make_field(p)
    E = VarietyDesc(PROJECTIVE, 2, (parse("x1^2*x2 - x0^3 - x0*x2^2 - x2^3", 3, F),), 1, F)
    n = count_points(E)
    assert n == brute_count(E, F)
    assert (n - p - 1) ** 2 <= 4 * p


@st.composite
def random_hypersurfaces(draw):
    F = make_field(draw(st.sampled_from([2, 3, 5])))
    projective = draw(st.booleans())
    nv = 3
    terms = {}
    d = draw(st.integers(1, 3))
    for _ in range(draw(st.integers(1, 4))):
        if projective:
            a = draw(st.integers(0, d))
            b = draw(st.integers(0, d - a))
            e = (a, b, d - a - b)
        else:
            e = tuple(draw(st.integers(0, 2)) for _ in range(nv))
        terms[e] = F(draw(st.integers(1, F.p - 1)))
    from covlab.mpoly import Multinomial

    f = Multinomial(F, nv, terms)
    if projective:
        return VarietyDesc(PROJECTIVE, 2, (f,), 1, F)
    return VarietyDesc(AFFINE, 3, (f,), 2, F)


@given(random_hypersurfaces())
def test_vectorized_count_matches_brute_force(V):
    assert count_points(V) == brute_count(V, V.field)


@given(random_hypersurfaces())
def test_batched_ranks_match_pointwise(V):
    codes = point_codes(V)
    ranks = jacobian_ranks(V, codes)
    for row, r in zip(codes, ranks):
        assert r == jacobian_rank_at(V, Point.from_codes(V.field, row, V.projective))


def test_cusp_is_singular_at_origin():
    F = make_field(7)
    cusp = VarietyDesc(AFFINE, 2, (parse("x1^2 - x0^3", 2, F),), 1, F)
    assert [str(P) for P in singular_points(cusp)] == ["(0, 0)"]


def test_singular_in_projective_chart():
    F = make_field(5)
    nodal = VarietyDesc(PROJECTIVE, 2, (parse("x1^2*x2 - x0^3 - x0^2*x2", 3, F),), 1, F)
    assert [str(P) for P in singular_points(nodal)] == ["(0:0:1)"]


def test_declared_dimension_too_large_is_an_error():
    F = make_field(3)
    V = VarietyDesc(AFFINE, 2, (parse("x0", 2, F), parse("x1", 2, F)), 1, F)
    with pytest.raises(GeometryError, match="exceeds codimension"):
        is_smooth_at(V, Point((F(0), F(0))))


def test_validation():
    F = make_field(3)
    with pytest.raises(GeometryError, match="homogeneous"):
        VarietyDesc(PROJECTIVE, 1, (parse("x0 + 1", 2, F),), 0, F)
    with pytest.raises(GeometryError, match="variables"):
        VarietyDesc(AFFINE, 2, (parse("x0", 3, F),), 1, F)
    with pytest.raises(GeometryError, match="type bound"):
        VarietyDesc(AFFINE, 2, (parse("x0", 2, F), parse("x1", 2, F)), 0, F, (2, 1, 2))
    with pytest.raises(GeometryError, match="zero vector"):
        Point((F(0), F(0)), projective=True)


def test_charts_round_trip():
    F = make_field(5)
    C = VarietyDesc(PROJECTIVE, 2, (parse("x0^2 + x1^2 - x2^2", 3, F),), 1, F)
    A = affine_chart(C, 2)
    for P in enumerate_points(C):
        if not P.coords[2].is_zero():
            Q = to_chart(P, 2)
            assert count_points(A) >= 1
            assert all(eq.evaluate(Q.coords).is_zero() for eq in A.equations)
            assert from_chart(Q, 2) == P


def test_budget_is_checked_before_enumeration():
    F = make_field(101)
    V = VarietyDesc(AFFINE, 3, (), 3, F)
    with config.budget(10**5):
        with pytest.raises(config.BudgetExceeded, match="exceeds budget"):
            point_codes(V)


def test_point_arrays_are_read_only():
    F = make_field(3)
    codes = point_codes(VarietyDesc(AFFINE, 1, (), 1, F))
    with pytest.raises(ValueError):
        codes[0, 0] = 1
    assert np.array_equal(codes[:, 0], np.arange(3))
