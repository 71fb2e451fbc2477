"""Builders for example covers and hypersurface sections.

* :func:`kummer_cover` adjoins an l-th root of a function u on an affine base.
* :func:`product_cover` is the projection Y x V -> Y (not finite when dim V > 0).
* :func:`search_section` looks for a hypersurface section of a projective X
  that contains every rational point, or avoids all of them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from . import linalg
from .bounds import BettiVector
from .covers import CoverDesc
from .ffield import FieldSpec, is_prime
from .geometry import (
    AFFINE, PROJECTIVE, GeometryError, VarietyDesc, count_points, enumerate_points,
    jacobian_ranks, point_codes, singular_points,
)
from .mpoly import Multinomial, parse

DEFAULT_SEED = 20240601


class KummerWarning(UserWarning):
    """gcd(l, q0 - 1) != 1: the cover is built but is not exceptional over the base field."""


def kummer_cover(Y0: VarietyDesc, u: Multinomial | str, ell: int, name: str = "") -> CoverDesc:
    """Source {(y, x) : y in Y0, x^ell = u(y)} projecting to Y0, of degree ell."""
    if Y0.projective:
        raise GeometryError("kummer_cover needs an affine base")
    F = Y0.field
    if isinstance(u, str):
        u = parse(u, Y0.nvars, F)
    if not is_prime(ell):
        raise ValueError(f"ell = {ell} is not prime")
    if ell % F.p == 0:
        raise ValueError(f"ell = {ell} is divisible by the characteristic {F.p}")
    if u.is_constant():
        raise ValueError("u must be a nonconstant function on the base")
    if math.gcd(ell, F.q - 1) != 1:
        warnings.warn(
            f"gcd({ell}, {F.q} - 1) != 1: the Kummer cover is not exceptional over {F}",
            KummerWarning, stacklevel=2,
        )
    N = Y0.n
    lift = list(range(N))
    x = Multinomial.variable(F, N + 1, N)
    eqs = tuple(e.remap(N + 1, lift) for e in Y0.equations) + (x**ell - u.remap(N + 1, lift),)
    td = None
    if Y0.type_descriptor is not None:
        _, r, d = Y0.type_descriptor
        td = (N + 1, r + 1, max(d, ell, int(u.degree)))
    X = VarietyDesc(AFFINE, N + 1, eqs, Y0.dim, F, td, name=f"{Y0.name or 'Y0'}[x^{ell}={u}]")
    bad = singular_points(X, 1)
    if bad:
        raise GeometryError(f"the Kummer total space is singular at rational point {bad[0]}")
    block = tuple(Multinomial.variable(F, N + 1, j) for j in range(N))
    return CoverDesc(X, Y0, (block,), ell, name or f"kummer(ell={ell}, u={u})")


def _segre_index(i, j, b):
    return i * (b + 1) + j


def product_cover(Y: VarietyDesc, V: VarietyDesc, name: str = "") -> CoverDesc:
    """The projection Y x V -> Y.

    Affine factors concatenate coordinates.  Projective factors are embedded
    by Segre, z_ij = y_i v_j, and the projection is given by the chart blocks
    (z_0j, .., z_aj), one for each j.
    """
    if Y.field != V.field:
        raise GeometryError("factors must share a field")
    if count_points(V, 1) < 2:
        raise ValueError("product_cover needs |V(F)| >= 2")
    F = Y.field
    label = name or f"{Y.name or 'Y'} x {V.name or 'V'} -> {Y.name or 'Y'}"
    if not Y.projective and not V.projective:
        nY, nV = Y.n, V.n
        total = nY + nV
        eqs = tuple(e.remap(total, list(range(nY))) for e in Y.equations)
        eqs += tuple(e.remap(total, list(range(nY, total))) for e in V.equations)
        X = VarietyDesc(AFFINE, total, eqs, Y.dim + V.dim, F, name=f"{Y.name or 'Y'}x{V.name or 'V'}")
        block = tuple(Multinomial.variable(F, total, j) for j in range(nY))
        return CoverDesc(X, Y, (block,), count_points(V, 1), label, finite=V.dim == 0)
    if Y.projective and V.projective:
        a, b = Y.n, V.n
        nz = (a + 1) * (b + 1)
        z = [[Multinomial.variable(F, nz, _segre_index(i, j, b)) for j in range(b + 1)] for i in range(a + 1)]
        eqs = []
        for i, k in combinations_with_replacement(range(a + 1), 2):
            for j, l in combinations_with_replacement(range(b + 1), 2):
                if i < k and j < l:
                    eqs.append(z[i][j] * z[k][l] - z[i][l] * z[k][j])
        for e in Y.equations:
            for j in range(b + 1):
                eqs.append(e.remap(nz, [_segre_index(i, j, b) for i in range(a + 1)]))
        for e in V.equations:
            for i in range(a + 1):
                eqs.append(e.remap(nz, [_segre_index(i, j, b) for j in range(b + 1)]))
        X = VarietyDesc(PROJECTIVE, nz - 1, tuple(eqs), Y.dim + V.dim, F,
                        name=f"{Y.name or 'Y'}x{V.name or 'V'}")
        blocks = tuple(tuple(z[i][j] for i in range(a + 1)) for j in range(b + 1))
        return CoverDesc(X, Y, blocks, count_points(V, 1), label, finite=V.dim == 0)
    raise GeometryError("product_cover needs both factors affine or both projective")


# -- hypersurface sections


FILL = "fill"
AVOID = "avoid"


@dataclass(frozen=True)
class SectionResult:
    variety: VarietyDesc
    form: Multinomial
    degree: int
    trial: int
    seed: int
    mode: str


def monomials(nvars: int, d: int) -> list[tuple[int, ...]]:
    """Exponent vectors of total degree d, in descending lexicographic order."""
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, slots - 1)

    if nvars == 0:
        return [()] if d == 0 else []
    rec((), d, nvars)
    return out


def _form(field: FieldSpec, nvars, monos, coeff_codes) -> Multinomial:
    return Multinomial(field, nvars, {e: field.from_code(int(c)) for e, c in zip(monos, coeff_codes)})


def search_section(
    X: VarietyDesc, dmax: int, mode: str = FILL, trials: int = 100, seed: int = DEFAULT_SEED,
) -> SectionResult | None:
    """Randomized search for H with (fill) X(F) in H, or (avoid) X(F) disjoint from H.

    Degrees cycle through 1..dmax by trial index.  In fill mode the form is drawn
    from the space of degree-d forms vanishing on X(F) (a kernel computation),
    and the section must be smooth of dimension dim X - 1 at every rational
    point.  The first success by trial index is returned; None after
    ``trials`` failures.  Each result is re-verified by enumerating Z(F).
    """
    if not X.projective:
        raise GeometryError("search_section needs a projective variety")
    if mode not in (FILL, AVOID):
        raise ValueError(f"mode must be {FILL!r} or {AVOID!r}")
    if dmax < 1 or trials < 1:
        raise ValueError("need dmax >= 1 and trials >= 1")
    if X.dim < 1:
        raise GeometryError("a hypersurface section needs dim X >= 1")
    F = X.field
    codes = point_codes(X, 1)
    pts = enumerate_points(X, 1)
    if singular_points(X, 1):
        raise GeometryError("X must be smooth at its rational points")
    rng = np.random.default_rng(seed)
    kernels = {}
    for t in range(trials):
        d = 1 + t % dmax
        monos = monomials(X.nvars, d)
        if mode == FILL:
            if d not in kernels:
                rows = [[_mono_value(P, e) for e in monos] for P in pts]
                kernels[d] = linalg.nullspace(rows, F, len(monos)) if rows else [
                    [F.one if i == j else F.zero for i in range(len(monos))] for j in range(len(monos))
                ]
            basis = kernels[d]
            if not basis:
                continue
            lam = rng.integers(0, F.q, size=len(basis))
            coeffs = [F.zero] * len(monos)
            for c, v in zip(lam, basis):
                cf = F.from_code(int(c))
                coeffs = [a + cf * b for a, b in zip(coeffs, v)]
            H = Multinomial(F, X.nvars, dict(zip(monos, coeffs)))
        else:
            H = _form(F, X.nvars, monos, rng.integers(0, F.q, size=len(monos)))
        if H.is_zero():
            continue
        Z = VarietyDesc(PROJECTIVE, X.n, X.equations + (H,), X.dim - 1, F, name=f"{X.name or 'X'}&H{t}")
        vals = H.eval_codes(codes)
        if mode == FILL:
            if (vals != 0).any():
                continue
            if codes.shape[0] and (jacobian_ranks(Z, codes) != X.n - Z.dim).any():
                continue
            ok = count_points(Z, 1) == codes.shape[0] and np.array_equal(point_codes(Z, 1), codes)
        else:
            if (vals == 0).any():
                continue
            ok = count_points(Z, 1) == 0
        if not ok:
            raise AssertionError("section failed re-verification by enumeration")  # pragma: no cover
        return SectionResult(Z, H, d, t, seed, mode)
    return None


def _mono_value(P, e):
    v = P.field.one
    for x, k in zip(P.coords, e):
        if k:
            v = v * x**k
    return v


# -- reference varieties with known Betti numbers


def builtin_examples(field: FieldSpec) -> dict[str, tuple[VarietyDesc, BettiVector]]:
    """Smooth projective varieties over ``field`` with their Betti vectors."""
    F = field
    out = {
        "P1": (VarietyDesc(PROJECTIVE, 1, (), 1, F, name="P1"), BettiVector((1, 0, 1))),
        "P2": (VarietyDesc(PROJECTIVE, 2, (), 2, F, name="P2"), BettiVector((1, 0, 1, 0, 1))),
        "quadric_surface": (
            VarietyDesc(PROJECTIVE, 3, (parse("x0*x3 - x1*x2", 4, F),), 2, F, name="quadric_surface"),
            BettiVector((1, 0, 2, 0, 1)),
        ),
    }
    if F.p != 2:
        out["conic"] = (
            VarietyDesc(PROJECTIVE, 2, (parse("x0^2 + x1^2 - x2^2", 3, F),), 1, F, name="conic"),
            BettiVector((1, 0, 1)),
        )
    if F.p not in (2, 31):
        # y^2 z = x^3 + x z^2 + z^3, discriminant -16 * 31
        out["elliptic"] = (
            VarietyDesc(PROJECTIVE, 2, (parse("x1^2*x2 - x0^3 - x0*x2^2 - x2^3", 3, F),), 1, F,
                        name="elliptic"),
            BettiVector((1, 2, 1)),
        )
    return out
