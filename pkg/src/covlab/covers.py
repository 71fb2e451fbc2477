"""Finite covers f: X -> Y and their behaviour on rational points.

Everything here is evidence gathered by exhaustive enumeration over
F_{q^m} for the tested degrees m.  Only Kummer covers t -> t^l get an exact
exceptionality decision (:func:`kummer_exceptionality_oracle`); for other
covers :func:`star_report` never claims more than "consistent with
exceptional up to M".

A map is given by one or more *blocks* of polynomials in the source
variables.  For a projective target a block is defined at a point when its
values are not all zero; all defined blocks must agree after normalization.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from . import _kernels as K
from . import linalg
from .config import BudgetExceeded, check_budget
from .ffield import extend_field, is_prime, prime_power
from .geometry import (
    GeometryError, Point, VarietyDesc, chart_partials, contains, over_field,
    point_codes, tangent_space,
)
from .mpoly import Multinomial, jacobian

EXCEPTIONAL = "exceptional"
NOT_EXCEPTIONAL = "not-exceptional"

CONSISTENT = "consistent-with-exceptional"
REFUTED = "refuted"
INDETERMINATE = "indeterminate"

DIAGONAL = "diagonal"
OFF_DIAGONAL_RAMIFIED = "off-diagonal-ramified"
OFF_DIAGONAL_UNRAMIFIED = "off-diagonal-unramified"

METHODOLOGY = (
    "Counts are exact enumerations of rational points over each tested extension. "
    "A source point is ramified when the differential of the map, restricted to the "
    "tangent space of the source, has rank below dim Y; for finite covers dim Y = dim X, "
    "and the cover degree plays no role in the threshold. "
    "Smoothness is checked only at rational points. "
    "The map is verified to land on the target at every analysed extension degree and "
    "at load time up to the configured verification depth. "
    "Verdicts are evidence relative to the tested fields and never certify exceptionality."
)


class CoverError(ValueError):
    """The cover definition is inconsistent (off-target image, undefined map, chart clash)."""

    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class SingularSourceError(GeometryError):
    def __init__(self, point):
        self.point = point
        super().__init__(f"source is singular at rational point {point}")


class NotGenericallyEtale(ValueError):
    """Every rational source point is ramified, as for an inseparable map."""

    def __init__(self, points, m):
        self.points = points
        self.m = m
        super().__init__(
            f"the differential drops rank at all {len(points)} source points over degree {m}: "
            "the map is not generically etale"
        )


@dataclass(frozen=True)
class CoverDesc:
    source: VarietyDesc
    target: VarietyDesc
    maps: tuple[tuple[Multinomial, ...], ...]
    degree: int
    name: str = dc_field(default="", compare=False)
    finite: bool = True

    def __post_init__(self):
        maps = self.maps
        if maps and isinstance(maps[0], Multinomial):
            maps = (maps,)
        maps = tuple(tuple(block) for block in maps)
        object.__setattr__(self, "maps", maps)
        X, Y = self.source, self.target
        if not maps:
            raise CoverError("a cover needs at least one map block")
        if X.field != Y.field:
            raise CoverError(f"source over {X.field} but target over {Y.field}")
        if X.projective and not Y.projective:
            raise CoverError("maps from a projective source to an affine target are not supported")
        for block in maps:
            if len(block) != Y.nvars:
                raise CoverError(f"map block has {len(block)} components, target needs {Y.nvars}")
            for g in block:
                if g.nvars != X.nvars or g.field != X.field:
                    raise CoverError(f"map component {g} is not a polynomial on the source")
            if X.projective:
                degs = {g.degree for g in block if not g.is_zero()}
                if len(degs) > 1 or not all(g.is_homogeneous() for g in block):
                    raise CoverError("map blocks on a projective source must be forms of one degree")
        if self.finite and X.dim != Y.dim:
            raise CoverError(f"dim X = {X.dim} differs from dim Y = {Y.dim}")
        if self.degree < 1:
            raise CoverError("cover degree must be >= 1")

    @property
    def field(self):
        return self.source.field


# -- per-extension data


@dataclass
class _Data:
    m: int
    field: object
    source: VarietyDesc
    target: VarietyDesc
    blocks: tuple
    src: np.ndarray          # (n, nvars_X) source point codes
    images: np.ndarray       # (n, nvars_Y) normalized image codes
    block_used: np.ndarray   # (n,) index of the block evaluated at each point
    _ramified: np.ndarray | None = None


def _check_cover_budget(f: CoverDesc, m: int):
    L = extend_field(f.field, m)[0]
    check_budget(f.source.ambient_count(L.q), f"source points over {L}")
    check_budget(f.target.ambient_count(L.q), f"target points over {L}")


def _normalize_rows(vals, kp):
    p, k, mod = kp
    nz = vals != 0
    defined = nz.any(axis=1)
    lead_idx = np.argmax(nz, axis=1)
    lead = vals[np.arange(vals.shape[0]), lead_idx]
    inv = K.inv(np.where(defined, lead, 1), p, k, mod)
    return K.mul(vals, inv[:, None], p, k, mod), defined


def _eval_block(block, codes):
    out = np.zeros((codes.shape[0], len(block)), dtype=np.int64)
    for j, g in enumerate(block):
        out[:, j] = g.eval_codes(codes)
    return out


def _images(f: CoverDesc, blocks, src, field, X, Y):
    n = src.shape[0]
    kp = field.kparams
    if not Y.projective:
        images = _eval_block(blocks[0], src)
        for b in blocks[1:]:
            other = _eval_block(b, src)
            bad = np.nonzero((other != images).any(axis=1))[0]
            if bad.size:
                P = Point.from_codes(field, src[bad[0]], X.projective)
                raise CoverError(f"map blocks disagree at {P}", P)
        return images, np.zeros(n, dtype=np.int64)
    images = np.zeros((n, Y.nvars), dtype=np.int64)
    used = np.full(n, -1, dtype=np.int64)
    for bi, b in enumerate(blocks):
        vals, defined = _normalize_rows(_eval_block(b, src), kp)
        fresh = defined & (used < 0)
        clash = defined & (used >= 0) & (vals != images).any(axis=1)
        if clash.any():
            P = Point.from_codes(field, src[np.argmax(clash)], X.projective)
            raise CoverError(f"map blocks disagree at {P}", P)
        images[fresh] = vals[fresh]
        used[fresh] = bi
    if (used < 0).any():
        P = Point.from_codes(field, src[np.argmax(used < 0)], X.projective)
        raise CoverError(f"map is undefined at {P} (all components vanish)", P)
    return images, used


@functools.lru_cache(maxsize=64)
def _data(f: CoverDesc, m: int) -> _Data:
    X = f.source.base_change(m)
    Y = f.target.base_change(m)
    L = X.field
    if m == 1:
        blocks = f.maps
    else:
        emb = extend_field(f.field, m)[1]
        blocks = tuple(tuple(g.map_field(emb) for g in b) for b in f.maps)
    src = point_codes(f.source, m)
    images, used = _images(f, blocks, src, L, X, Y)
    for eq in Y.equations:
        vals = eq.eval_codes(images)
        if (vals != 0).any():
            i = int(np.argmax(vals != 0))
            P = Point.from_codes(L, src[i], X.projective)
            Q = Point.from_codes(L, images[i], Y.projective)
            raise CoverError(f"map sends source point {P} to {Q}, which is off the target", P)
    return _Data(m, L, X, Y, blocks, src, images, used)


def _get(f: CoverDesc, m: int) -> _Data:
    if m < 1:
        raise ValueError("extension degree must be >= 1")
    _check_cover_budget(f, m)
    return _data(f, m)


def verify_cover(f: CoverDesc, depth: int = 2):
    """Check that f maps rational points onto Y for every m <= depth."""
    for m in range(1, depth + 1):
        _get(f, m)


def _ramified_mask(f: CoverDesc, d: _Data) -> np.ndarray:
    if d._ramified is not None:
        return d._ramified
    X, Y, L = d.source, d.target, d.field
    p, k, mod = L.kparams
    n = d.src.shape[0]
    N = X.n
    jeq = chart_partials(X.equations, d.src, X.projective)
    r_eq = K.batch_rank(jeq, p, k, mod) if X.equations else np.zeros(n, dtype=np.int64)
    codim = N - X.dim
    if (r_eq > codim).any():
        P = Point.from_codes(L, d.src[np.argmax(r_eq > codim)], X.projective)
        raise GeometryError(f"Jacobian rank at {P} exceeds codimension {codim}: declared dimension too large")
    if (r_eq < codim).any():
        raise SingularSourceError(Point.from_codes(L, d.src[np.argmax(r_eq < codim)], X.projective))
    ramified = np.zeros(n, dtype=bool)
    for bi, block in enumerate(d.blocks):
        idx = np.nonzero(d.block_used == bi)[0]
        if idx.size == 0:
            continue
        pts = d.src[idx]
        jf = chart_partials(block, pts, X.projective)
        if Y.projective:
            vals = _eval_block(block, pts)
            lead = np.argmax(vals != 0, axis=1)
            rows = []
            for kk in range(Y.nvars):
                # d(F_k / F_j) up to the unit factor F_j^-2
                fj = vals[np.arange(idx.size), lead]
                fk = vals[:, kk]
                gj = jf[np.arange(idx.size), lead, :]
                row = K.sub(K.mul(fj[:, None], jf[:, kk, :], p, k, mod),
                            K.mul(fk[:, None], gj, p, k, mod), p, k, mod)
                rows.append(row)
            # the row for k = lead is identically zero, so keeping it leaves the rank unchanged
            jf = np.stack(rows, axis=1) if rows else np.zeros((idx.size, 0, N), dtype=np.int64)
        mats = np.concatenate([jeq[idx], jf], axis=1)
        r_tot = K.batch_rank(mats, p, k, mod)
        ramified[idx] = (r_tot - r_eq[idx]) < Y.dim
    d._ramified = ramified
    return ramified


# -- public operations


def _field_degree(f: CoverDesc, P: Point) -> int:
    F, L = f.field, P.field
    if L.p != F.p or L.k % F.k:
        raise GeometryError(f"{L} is not an extension of {F}")
    return L.k // F.k


def apply(f: CoverDesc, P: Point) -> Point:
    """Image of a single source point, evaluated element by element."""
    X = over_field(f.source, P.field)
    if not contains(X, P):
        raise CoverError(f"point {P} is not on the source", P)
    m = _field_degree(f, P)
    blocks = f.maps if m == 1 else _mapped_blocks(f, m)
    Y = f.target.base_change(m)
    image = None
    for block in blocks:
        vals = tuple(g.evaluate(P.coords) for g in block)
        if Y.projective:
            if all(v.is_zero() for v in vals):
                continue
            Q = Point(vals, projective=True)
        else:
            Q = Point(vals)
        if image is not None and Q != image:
            raise CoverError(f"map blocks disagree at {P}", P)
        image = Q
    if image is None:
        raise CoverError(f"map is undefined at {P} (all components vanish)", P)
    if not contains(Y, image):
        raise CoverError(f"map sends source point {P} to {image}, which is off the target", P)
    return image


@functools.lru_cache(maxsize=64)
def _mapped_blocks(f: CoverDesc, m: int):
    emb = extend_field(f.field, m)[1]
    return tuple(tuple(g.map_field(emb) for g in b) for b in f.maps)


def _points(d: _Data, codes, projective):
    return [Point.from_codes(d.field, row, projective) for row in codes]


def image_set(f: CoverDesc, m: int = 1) -> set[Point]:
    d = _get(f, m)
    return set(_points(d, np.unique(d.images, axis=0), f.target.projective))


def image_count(f: CoverDesc, m: int = 1) -> int:
    d = _get(f, m)
    if d.images.shape[0] == 0:
        return 0
    return int(np.unique(d.images, axis=0).shape[0])


def fiber(f: CoverDesc, Q: Point, m: int = 1) -> set[Point]:
    d = _get(f, m)
    if not contains(d.target, Q):
        raise CoverError(f"point {Q} is not on the target", Q)
    hit = (d.images == np.array(Q.codes, dtype=np.int64)[None, :]).all(axis=1)
    return set(_points(d, d.src[hit], f.source.projective))


def fiber_sizes(f: CoverDesc, m: int = 1) -> dict[tuple[int, ...], int]:
    """Size of every nonempty fiber, keyed by image point codes; empty fibers are omitted."""
    d = _get(f, m)
    if d.images.shape[0] == 0:
        return {}
    uniq, counts = np.unique(d.images, axis=0, return_counts=True)
    return {tuple(int(c) for c in row): int(n) for row, n in zip(uniq, counts)}


def injective_on(f: CoverDesc, m: int = 1) -> bool:
    return image_count(f, m) == _get(f, m).src.shape[0]


def surjective_on(f: CoverDesc, m: int = 1) -> bool:
    # images already lie on the target, so equality of sets is equality of counts
    return image_count(f, m) == point_codes(f.target, m).shape[0]


def ramified_mask(f: CoverDesc, m: int = 1) -> np.ndarray:
    """Boolean mask over the enumerated source points (order of enumerate_points)."""
    return _ramified_mask(f, _get(f, m)).copy()


def ramification_points(f: CoverDesc, m: int = 1) -> list[Point]:
    """Source points where the differential restricted to the tangent space drops rank."""
    d = _get(f, m)
    mask = _ramified_mask(f, d)
    pts = _points(d, d.src[mask], f.source.projective)
    if d.src.shape[0] and mask.all():
        raise NotGenericallyEtale(pts, m)
    return pts


def branch_points(f: CoverDesc, m: int = 1) -> list[Point]:
    d = _get(f, m)
    mask = _ramified_mask(f, d)
    if d.src.shape[0] and mask.all():
        raise NotGenericallyEtale(_points(d, d.src[mask], f.source.projective), m)
    if not mask.any():
        return []
    return _points(d, np.unique(d.images[mask], axis=0), f.target.projective)


def is_ramified_at(f: CoverDesc, P: Point) -> bool:
    """Pointwise ramification test via an explicit tangent-space basis.

    Independent of the batched rank computation used by ramification_points:
    the differential is evaluated numerically, composed with a kernel basis of
    the equation Jacobian, and its rank compared with dim Y.
    """
    X = over_field(f.source, P.field)
    Y = f.target.base_change(_field_degree(f, P))
    L = P.field
    m = _field_degree(f, P)
    basis = tangent_space(X, P)
    codim = X.n - X.dim
    if len(basis) != X.dim:
        if len(basis) > X.dim:
            raise SingularSourceError(P)
        raise GeometryError(f"Jacobian rank at {P} exceeds codimension {codim}")
    blocks = f.maps if m == 1 else _mapped_blocks(f, m)
    for block in blocks:
        vals = [g.evaluate(P.coords) for g in block]
        if Y.projective and all(v.is_zero() for v in vals):
            continue
        J = jacobian(block, X.nvars).evaluate(P.coords)
        if X.projective:
            i = P.chart_index()
            J = [[v for l, v in enumerate(row) if l != i] for row in J]
        if Y.projective:
            j = next(t for t, v in enumerate(vals) if not v.is_zero())
            J = [[vals[j] * a - vals[kk] * b for a, b in zip(J[kk], J[j])]
                 for kk in range(len(vals)) if kk != j]
        image_vectors = [[sum((row[c] * v[c] for c in range(len(v))), L.zero) for row in J] for v in basis]
        return linalg.rank(image_vectors, L, len(J)) < Y.dim
    raise CoverError(f"map is undefined at {P}", P)


@dataclass(frozen=True)
class PairClass:
    first: Point
    second: Point
    kind: str

    @property
    def diagonal(self) -> bool:
        return self.kind == DIAGONAL


def fiber_product_pairs(f: CoverDesc, m: int = 1) -> list[PairClass]:
    """All ordered rational pairs (P1, P2) with f(P1) = f(P2), classified.

    Images come from :func:`apply` on each point and are bucketed in a dict,
    so this path shares no code with :func:`injective_on`'s vectorized count.
    """
    d = _get(f, m)
    X = f.source
    mask = _ramified_mask(f, d)
    buckets: dict[Point, list[int]] = {}
    points = _points(d, d.src, X.projective)
    for i, P in enumerate(points):
        buckets.setdefault(apply(f, P), []).append(i)
    check_budget(sum(len(b) ** 2 for b in buckets.values()), "fiber product pairs")
    pairs = []
    for members in buckets.values():
        for i in members:
            for j in members:
                if i == j:
                    kind = DIAGONAL
                elif mask[i] or mask[j]:
                    kind = OFF_DIAGONAL_RAMIFIED
                else:
                    kind = OFF_DIAGONAL_UNRAMIFIED
                pairs.append(PairClass(points[i], points[j], kind))
    return pairs


def pair_counts(f: CoverDesc, m: int = 1) -> dict[str, int]:
    """Counts of each PairClass kind, computed from fiber sizes without listing pairs."""
    d = _get(f, m)
    n = d.src.shape[0]
    if n == 0:
        return {DIAGONAL: 0, OFF_DIAGONAL_RAMIFIED: 0, OFF_DIAGONAL_UNRAMIFIED: 0}
    mask = _ramified_mask(f, d)
    _, inverse, counts = np.unique(d.images, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    unram = np.bincount(inverse, weights=(~mask).astype(np.int64), minlength=counts.size).astype(np.int64)
    off = int(np.sum(counts * (counts - 1)))
    off_unram = int(np.sum(unram * (unram - 1)))
    return {DIAGONAL: n, OFF_DIAGONAL_RAMIFIED: off - off_unram, OFF_DIAGONAL_UNRAMIFIED: off_unram}


# -- reports


@dataclass(frozen=True)
class StarRow:
    m: int
    q: int
    source_points: int
    target_points: int
    image_points: int
    injective: bool
    surjective: bool
    max_fiber: int
    ramified_points: int
    branch_points: int
    off_diagonal_pairs: int
    off_diagonal_unramified: int
    fiber_bound_ok: bool | None
    all_ramified: bool

    @property
    def bijective(self) -> bool:
        return self.injective and self.surjective

    @property
    def equivalence_holds(self) -> bool:
        """Injectivity and surjectivity agree at this field."""
        return self.injective == self.surjective


@dataclass
class StarReport:
    cover: str
    field: str
    degree: int
    max_ext: int
    rows: list[StarRow]
    verdict: str
    refuted_at: int | None = None
    tested_up_to: int = 0
    truncated: bool = False
    truncation: str = ""
    methodology: str = METHODOLOGY

    @property
    def verdict_text(self) -> str:
        if self.verdict == REFUTED:
            return f"refuted-at {self.refuted_at}"
        if self.verdict == CONSISTENT:
            return f"consistent-with-exceptional up to {self.tested_up_to}"
        return INDETERMINATE


def star_row(f: CoverDesc, m: int) -> StarRow:
    d = _get(f, m)
    n_src = int(d.src.shape[0])
    n_tgt = int(point_codes(f.target, m).shape[0])
    mask = _ramified_mask(f, d)
    if n_src:
        uniq, counts = np.unique(d.images, axis=0, return_counts=True)
        n_img, max_fiber = int(uniq.shape[0]), int(counts.max())
        n_branch = int(np.unique(d.images[mask], axis=0).shape[0]) if mask.any() else 0
    else:
        n_img = max_fiber = n_branch = 0
    pc = pair_counts(f, m)
    return StarRow(
        m=m, q=d.field.q, source_points=n_src, target_points=n_tgt, image_points=n_img,
        injective=n_img == n_src, surjective=n_img == n_tgt, max_fiber=max_fiber,
        ramified_points=int(mask.sum()), branch_points=n_branch,
        off_diagonal_pairs=pc[OFF_DIAGONAL_RAMIFIED] + pc[OFF_DIAGONAL_UNRAMIFIED],
        off_diagonal_unramified=pc[OFF_DIAGONAL_UNRAMIFIED],
        fiber_bound_ok=max_fiber <= f.degree if f.finite else None,
        all_ramified=bool(n_src) and bool(mask.all()),
    )


def star_report(f: CoverDesc, max_ext: int) -> StarReport:
    """Per-extension injectivity/surjectivity evidence for m = 1..max_ext.

    The first degree at which f fails to be bijective refutes exceptionality
    over that field; a budget overrun stops the sweep and marks the report
    truncated, keeping every completed row.
    """
    if max_ext < 1:
        raise ValueError("max_ext must be >= 1")
    rows = []
    truncated, why = False, ""
    for m in range(1, max_ext + 1):
        try:
            rows.append(star_row(f, m))
        except BudgetExceeded as exc:
            truncated, why = True, f"stopped at m = {m}: {exc}"
            break
    report = StarReport(
        cover=f.name, field=str(f.field), degree=f.degree, max_ext=max_ext, rows=rows,
        verdict=INDETERMINATE, tested_up_to=len(rows), truncated=truncated, truncation=why,
    )
    bad = next((r.m for r in rows if not r.bijective), None)
    if bad is not None:
        report.verdict, report.refuted_at = REFUTED, bad
    elif rows:
        report.verdict = CONSISTENT
    return report


def kummer_exceptionality_oracle(ell: int, q: int) -> str:
    """Exact decision for t -> t^ell over F_q: exceptional iff gcd(ell, q - 1) = 1."""
    p, _ = prime_power(q)
    if not is_prime(ell):
        raise ValueError(f"exponent {ell} is not prime")
    if ell % p == 0:
        raise ValueError(f"exponent {ell} is divisible by the characteristic {p}: not tamely ramified")
    return EXCEPTIONAL if math.gcd(ell, q - 1) == 1 else NOT_EXCEPTIONAL


def affine_line_map(field, poly: Multinomial | str, degree: int | None = None, name: str = "") -> CoverDesc:
    """Cover A^1 -> A^1 given by a univariate polynomial in x0."""
    from .geometry import AFFINE
    from .mpoly import parse

    if isinstance(poly, str):
        poly = parse(poly, 1, field)
    A1 = VarietyDesc(AFFINE, 1, (), 1, field, name="A1")
    deg = degree if degree is not None else max(int(poly.degree), 1)
    return CoverDesc(A1, A1, ((poly,),), deg, name or f"x0 -> {poly}")


def identity_cover(V: VarietyDesc) -> CoverDesc:
    block = tuple(Multinomial.variable(V.field, V.nvars, j) for j in range(V.nvars))
    return CoverDesc(V, V, (block,), 1, f"identity on {V.name or 'variety'}")


__all__ = [
    "CoverDesc", "CoverError", "SingularSourceError", "NotGenericallyEtale", "PairClass",
    "StarRow", "StarReport", "apply", "image_set", "image_count", "fiber", "fiber_sizes",
    "injective_on", "surjective_on", "ramified_mask", "ramification_points", "branch_points",
    "is_ramified_at", "fiber_product_pairs", "pair_counts", "star_row", "star_report",
    "verify_cover", "kummer_exceptionality_oracle", "affine_line_map", "identity_cover",
    "METHODOLOGY", "EXCEPTIONAL", "NOT_EXCEPTIONAL", "CONSISTENT", "REFUTED", "INDETERMINATE",
    "DIAGONAL", "OFF_DIAGONAL_RAMIFIED", "OFF_DIAGONAL_UNRAMIFIED",
]
