import numpy as np
import pytest
from hypothesis import given, strategies as st

from covlab.ffield import make_field
from covlab.mpoly import ZERO_DEGREE, Multinomial, ParseError, jacobian, parse

FIELDS = [make_field(2), make_field(5), make_field(7), make_field(3, 2), make_field(2, 3)]


@st.composite
def polys(draw, nvars=3, field=None):
    F = field or draw(st.sampled_from(FIELDS))
    n = draw(st.integers(0, 5))
    terms = {}
    for _ in range(n):
        e = tuple(draw(st.integers(0, 4)) for _ in range(nvars))
        terms[e] = F.from_code(draw(st.integers(0, F.q - 1)))
    return Multinomial(F, nvars, terms)


@st.composite
def poly_pair_and_point(draw):
    F = draw(st.sampled_from(FIELDS))
    f = draw(polys(field=F))
    g = draw(polys(field=F))
    pt = [F.from_code(draw(st.integers(0, F.q - 1))) for _ in range(3)]
    return f, g, pt


def test_zero_polynomial():
    F = make_field(5)
    z = Multinomial.zero(F, 2)
    assert z.degree == ZERO_DEGREE and z.is_zero() and str(z) == "0"
    assert parse("x0 - x0", 2, F) == z


def test_canonical_print():
    F = make_field(7)
    f = parse("6*x1 + x0^3 - 2 + x0*x1", 2, F)
    assert str(f) == "x0^3 + x0*x1 + 6*x1 + 5"
    g = parse("[1,2]*x0 + [0,1]", 1, make_field(3, 2))
    assert str(g) == "[1,2]*x0 + [0,1]"


def test_parse_errors_report_column():
    F = make_field(5)
    with pytest.raises(ParseError, match="column 5"):
        parse("x0 +* 2", 1, F)
    with pytest.raises(ParseError):
        parse("x3", 2, F)
    with pytest.raises(ParseError):
        parse("(x0", 1, F)
    with pytest.raises(ParseError):
        parse("x0^", 1, F)


def test_precedence():
    F = make_field(11)
    assert parse("-x0^2", 1, F) == -(parse("x0", 1, F) ** 2)
    assert parse("2*(x0 + 1)^2", 1, F) == parse("2*x0^2 + 4*x0 + 2", 1, F)


@given(polys())
def test_print_parse_round_trip(f):
    assert parse(str(f), f.nvars, f.field) == f


@given(poly_pair_and_point())
def test_evaluation_is_a_ring_homomorphism(t):
    f, g, pt = t
    assert (f + g).evaluate(pt) == f.evaluate(pt) + g.evaluate(pt)
    assert (f * g).evaluate(pt) == f.evaluate(pt) * g.evaluate(pt)
    assert (f - g).evaluate(pt) == f.evaluate(pt) - g.evaluate(pt)
    assert (f**2).evaluate(pt) == f.evaluate(pt) ** 2


@given(poly_pair_and_point())
def test_kernel_evaluation_matches_python(t):
    f, _, pt = t
    codes = np.array([[c.code for c in pt]], dtype=np.int64)
    assert f.eval_codes(codes)[0] == f.evaluate(pt).code


@given(poly_pair_and_point())
def test_product_rule(t):
    f, g, _ = t
    for j in range(3):
        assert (f * g).partial(j) == f.partial(j) * g + f * g.partial(j)


@given(polys())
def test_degree_of_product(f):
    g = parse("x0 + x1 + 1", 3, f.field)
    if f.is_zero():
        assert (f * g).is_zero()
    else:
        assert (f * g).degree == f.degree + 1


@given(polys(nvars=2))
def test_homogenize_dehomogenize(f):
    h = f.homogenize()
    assert h.is_homogeneous()
    assert h.dehomogenize() == f


def test_remap_and_map_field():
    from covlab.ffield import extend_field

    F = make_field(3)
    f = parse("x0^2 + 2*x1", 2, F)
    g = f.remap(3, [2, 0])
    assert str(g) == "x2^2 + 2*x0"
    L, emb = extend_field(F, 2)
    assert f.map_field(emb).field == L


def test_jacobian():
    F = make_field(5)
    J = jacobian([parse("x0^2 + x1^2 - 1", 2, F)])
    assert J.shape == (1, 2)
    assert J.evaluate([F(0), F(1)]) == [[F(0), F(2)]]
    assert jacobian([], nvars=3).shape == (0, 3)
    with pytest.raises(ValueError):
        jacobian([])
