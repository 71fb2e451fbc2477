"""Affine and projective varieties as vanishing loci, and their rational points.

Points are enumerated exhaustively from the ambient space.  Projective space
is covered by the charts ``x_0 = .. = x_{i-1} = 0, x_i = 1``, so every point
is produced exactly once, already normalized, in the order (chart index, then
lexicographic code order of the free coordinates).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from . import _kernels as K
from . import linalg
from .config import check_budget
from .ffield import Element, FieldSpec, extend_field
from .mpoly import Multinomial, jacobian

AFFINE = "affine"
PROJECTIVE = "projective"

_CHUNK = 1 << 16


class GeometryError(ValueError):
    """A point or variety violates a geometric precondition."""


@dataclass(frozen=True)
class VarietyDesc:
    """Vanishing locus of ``equations`` in affine or projective N-space.

    ``dim`` is declared by the caller and used for smoothness checks;
    it is never computed.
    """

    ambient: str
    n: int
    equations: tuple[Multinomial, ...]
    dim: int
    field: FieldSpec
    type_descriptor: tuple[int, int, int] | None = None
    name: str = dc_field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "equations", tuple(self.equations))
        if self.ambient not in (AFFINE, PROJECTIVE):
            raise GeometryError(f"unknown ambient {self.ambient!r}")
        if self.n < 0:
            raise GeometryError("ambient dimension must be >= 0")
        if not 0 <= self.dim <= self.n:
            raise GeometryError(f"declared dimension {self.dim} outside [0, {self.n}]")
        for eq in self.equations:
            if eq.nvars != self.nvars:
                raise GeometryError(f"equation {eq} has {eq.nvars} variables, ambient needs {self.nvars}")
            if eq.field != self.field:
                raise GeometryError(f"equation {eq} is over {eq.field}, variety over {self.field}")
            if self.ambient == PROJECTIVE and not eq.is_homogeneous():
                raise GeometryError(f"projective equation {eq} is not homogeneous")
        if self.type_descriptor is not None:
            N, r, d = self.type_descriptor
            object.__setattr__(self, "type_descriptor", (int(N), int(r), int(d)))
            if len(self.equations) > r:
                raise GeometryError(f"{len(self.equations)} equations exceed type bound r = {r}")
            if any(eq.degree > d for eq in self.equations):
                raise GeometryError(f"an equation exceeds type degree bound d = {d}")

    @property
    def nvars(self) -> int:
        return self.n + 1 if self.ambient == PROJECTIVE else self.n

    @property
    def projective(self) -> bool:
        return self.ambient == PROJECTIVE

    def ambient_count(self, q: int) -> int:
        if self.projective:
            return (q ** (self.n + 1) - 1) // (q - 1)
        return q**self.n

    def base_change(self, m: int) -> VarietyDesc:
        """The same equations read over the degree-m extension field."""
        return _base_change(self, m)

    def __str__(self):
        eqs = ", ".join(str(e) for e in self.equations) or "(no equations)"
        return f"{self.ambient} {self.n} over {self.field}: {eqs}"


@functools.lru_cache(maxsize=256)
def _base_change(V: VarietyDesc, m: int) -> VarietyDesc:
    if m == 1:
        return V
    L, emb = extend_field(V.field, m)
    return VarietyDesc(
        V.ambient, V.n, tuple(eq.map_field(emb) for eq in V.equations),
        V.dim, L, V.type_descriptor, V.name,
    )


def normalize(coords: Sequence[Element]) -> tuple[Element, ...]:
    """Scale a nonzero projective vector so its first nonzero entry is 1."""
    lead = next((c for c in coords if not c.is_zero()), None)
    if lead is None:
        raise GeometryError("the zero vector is not a projective point")
    inv = lead.inverse()
    return tuple(c * inv for c in coords)


@dataclass(frozen=True)
class Point:
    coords: tuple[Element, ...]
    projective: bool = False

    def __post_init__(self):
        coords = tuple(self.coords)
        if coords:
            F = coords[0].field
            if any(c.field != F for c in coords):
                raise GeometryError("point coordinates lie in different fields")
        if self.projective:
            coords = normalize(coords)
        object.__setattr__(self, "coords", coords)

    @property
    def field(self) -> FieldSpec:
        return self.coords[0].field

    @property
    def codes(self) -> tuple[int, ...]:
        return tuple(c.code for c in self.coords)

    @classmethod
    def from_codes(cls, field: FieldSpec, codes, projective=False) -> Point:
        return cls(tuple(field.from_code(int(c)) for c in codes), projective)

    def chart_index(self) -> int:
        """Index of the first nonzero (hence unit) coordinate of a projective point."""
        return next(i for i, c in enumerate(self.coords) if not c.is_zero())

    def __str__(self):
        sep = ":" if self.projective else ", "
        return "(" + sep.join(str(c) for c in self.coords) + ")"


def ambient_codes(V: VarietyDesc, chunk: int = _CHUNK):
    """Yield the ambient points of V, as (n, nvars) code arrays, in enumeration order."""
    q = V.field.q
    N = V.n
    if not V.projective:
        total = q**N
        weights = np.array([q ** (N - 1 - j) for j in range(N)], dtype=np.int64)
        for start in range(0, total, chunk):
            ids = np.arange(start, min(start + chunk, total), dtype=np.int64)
            yield (ids[:, None] // weights[None, :]) % q
        return
    for i in range(N + 1):
        free = N - i
        total = q**free
        weights = np.array([q ** (free - 1 - j) for j in range(free)], dtype=np.int64)
        for start in range(0, total, chunk):
            ids = np.arange(start, min(start + chunk, total), dtype=np.int64)
            block = np.zeros((ids.size, N + 1), dtype=np.int64)
            block[:, i] = 1
            if free:
                block[:, i + 1:] = (ids[:, None] // weights[None, :]) % q
            yield block


def point_codes(V: VarietyDesc, m: int = 1) -> np.ndarray:
    """All F_{q^m}-points of V as an (npoints, nvars) array of element codes."""
    L = extend_field(V.field, m)[0] if m > 1 else V.field
    check_budget(V.ambient_count(L.q), f"points of {V.name or 'variety'} over {L}")
    return _point_codes(V, m)


@functools.lru_cache(maxsize=128)
def _point_codes(V: VarietyDesc, m: int) -> np.ndarray:
    W = V.base_change(m)
    out = []
    for block in ambient_codes(W):
        mask = np.ones(block.shape[0], dtype=bool)
        for eq in W.equations:
            mask = _masked_zero(eq, block, mask)
        out.append(block[mask])
    if not out:
        return np.zeros((0, W.nvars), dtype=np.int64)
    result = np.concatenate(out)
    result.setflags(write=False)
    return result


def _masked_zero(eq, block, mask):
    res = np.zeros(block.shape[0], dtype=bool)
    idx = np.nonzero(mask)[0]
    if idx.size:
        res[idx] = eq.eval_codes(block[idx]) == 0
    return res


def enumerate_points(V: VarietyDesc, m: int = 1) -> list[Point]:
    """The F_{q^m}-rational points of V in deterministic order."""
    codes = point_codes(V, m)
    L = V.base_change(m).field
    return [Point.from_codes(L, row, V.projective) for row in codes]


def count_points(V: VarietyDesc, m: int = 1) -> int:
    return int(point_codes(V, m).shape[0])


def over_field(V: VarietyDesc, field: FieldSpec) -> VarietyDesc:
    """V base-changed to ``field``, which must be an extension built by extend_field."""
    if field == V.field:
        return V
    if field.p != V.field.p or field.k % V.field.k:
        raise GeometryError(f"{field} is not an extension of {V.field}")
    W = V.base_change(field.k // V.field.k)
    if W.field != field:
        raise GeometryError(f"{field} is not the standard extension of {V.field}")
    return W


def _check_point(V: VarietyDesc, P: Point) -> VarietyDesc:
    if len(P.coords) != V.nvars:
        raise GeometryError(f"point {P} has {len(P.coords)} coordinates, ambient needs {V.nvars}")
    if P.projective != V.projective:
        raise GeometryError("point and variety disagree on affine/projective ambient")
    return over_field(V, P.field)


def contains(V: VarietyDesc, P: Point) -> bool:
    W = _check_point(V, P)
    return all(eq.evaluate(P.coords).is_zero() for eq in W.equations)


def _chart_jacobian_rows(W: VarietyDesc, P: Point):
    """Evaluated equation Jacobian at P in the affine chart containing P."""
    if not W.projective:
        J = _jacobian_of(W.equations, W.nvars)
        return J.evaluate(P.coords), W.n
    i = P.chart_index()
    J = _jacobian_of(W.equations, W.nvars)
    rows = [[v for l, v in enumerate(row) if l != i] for row in J.evaluate(P.coords)]
    return rows, W.n


@functools.lru_cache(maxsize=256)
def _jacobian_of(equations, nvars):
    return jacobian(equations, nvars)


def jacobian_rank_at(V: VarietyDesc, P: Point) -> int:
    W = _check_point(V, P)
    if not contains(W, P):
        raise GeometryError(f"point {P} does not lie on the variety")
    rows, N = _chart_jacobian_rows(W, P)
    return linalg.rank(rows, W.field, N)


def is_smooth_at(V: VarietyDesc, P: Point) -> bool:
    """Jacobian criterion against the declared dimension."""
    r = jacobian_rank_at(V, P)
    expected = V.n - V.dim
    if r > expected:
        raise GeometryError(
            f"Jacobian rank {r} at {P} exceeds codimension {expected}: declared dimension {V.dim} is too large"
        )
    return r == expected


def tangent_space(V: VarietyDesc, P: Point) -> list[list[Element]]:
    """Kernel basis of the evaluated equation Jacobian (chart coordinates for projective V)."""
    W = _check_point(V, P)
    if not contains(W, P):
        raise GeometryError(f"point {P} does not lie on the variety")
    rows, N = _chart_jacobian_rows(W, P)
    return linalg.nullspace(rows, W.field, N)


def affine_chart(V: VarietyDesc, i: int) -> VarietyDesc:
    """The open piece x_i != 0 of a projective variety, as an affine variety."""
    if not V.projective:
        raise GeometryError("affine_chart needs a projective variety")
    if not 0 <= i <= V.n:
        raise GeometryError(f"chart index {i} out of range [0, {V.n}]")
    eqs = tuple(eq.dehomogenize(i) for eq in V.equations)
    return VarietyDesc(AFFINE, V.n, eqs, V.dim, V.field, V.type_descriptor, V.name)


def to_chart(P: Point, i: int) -> Point:
    """Affine coordinates of a projective point in chart i (x_i != 0 required)."""
    xi = P.coords[i]
    if xi.is_zero():
        raise GeometryError(f"point {P} is not in chart {i}")
    inv = xi.inverse()
    return Point(tuple(c * inv for j, c in enumerate(P.coords) if j != i))


def from_chart(Q: Point, i: int) -> Point:
    coords = list(Q.coords)
    coords.insert(i, Q.field.one)
    return Point(tuple(coords), projective=True)


# -- vectorized helpers shared with the cover analyzer

def chart_partials(polys: Sequence[Multinomial], codes: np.ndarray, projective: bool) -> np.ndarray:
    """Evaluated partials, shape (npoints, len(polys), N), in the chart of each point.

    For projective points the chart is the first nonzero coordinate (equal to 1
    after normalization) and that column is dropped; the partials of the
    homogeneous forms there agree with those of the dehomogenized equations.
    """
    codes = np.asarray(codes, dtype=np.int64)
    npts, nv = codes.shape
    full = np.zeros((npts, len(polys), nv), dtype=np.int64)
    for r, f in enumerate(polys):
        for l in range(nv):
            full[:, r, l] = f.partial(l).eval_codes(codes)
    if not projective:
        return full
    chart = np.argmax(codes != 0, axis=1)
    keep = np.arange(nv)[None, :].repeat(npts, axis=0)
    keep = keep[keep != chart[:, None]].reshape(npts, nv - 1)
    return np.take_along_axis(full, keep[:, None, :], axis=2)


def jacobian_ranks(V: VarietyDesc, codes: np.ndarray) -> np.ndarray:
    """Rank of the equation Jacobian at each row of ``codes`` (points of V over V.field)."""
    codes = np.asarray(codes, dtype=np.int64)
    if not V.equations or codes.shape[0] == 0:
        return np.zeros(codes.shape[0], dtype=np.int64)
    mats = chart_partials(V.equations, codes, V.projective)
    p, k, mod = V.field.kparams
    return K.batch_rank(mats, p, k, mod)


def singular_points(V: VarietyDesc, m: int = 1) -> list[Point]:
    """Rational points where the Jacobian rank falls below the codimension."""
    codes = point_codes(V, m)
    W = V.base_change(m)
    ranks = jacobian_ranks(W, codes)
    expected = V.n - V.dim
    if np.any(ranks > expected):
        bad = Point.from_codes(W.field, codes[np.argmax(ranks > expected)], V.projective)
        raise GeometryError(f"Jacobian rank at {bad} exceeds codimension {expected}")
    return [Point.from_codes(W.field, row, V.projective) for row in codes[ranks < expected]]
