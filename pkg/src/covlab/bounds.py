"""Effective constants: point-count thresholds, Betti-sum bounds, surface formulas.

The working point-count estimate for a smooth geometrically irreducible Z of
dimension d with compact Betti sum sigma is the Weil-type window

    | #Z(F_q) - q^d | <= (sigma - 1) * q^(d - 1/2)

(the top class contributes q^d, every other class has weight <= 2d - 1).
All comparisons below are done in exact integer arithmetic by squaring away
the half-integer powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

SURFACE_INDICES = [(i, j) for i in range(3) for j in range(3)]


@dataclass(frozen=True)
class BettiVector:
    b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(int(x) for x in self.b))
        if any(x < 0 for x in self.b):
            raise ValueError("Betti numbers are nonnegative")
        if len(self.b) % 2 != 1:
            raise ValueError("need b_0 .. b_{2 dim}")

    @property
    def sigma_c(self) -> int:
        return sum(self.b)

    @property
    def dim(self) -> int:
        return (len(self.b) - 1) // 2


@dataclass(frozen=True)
class HodgeDiamond:
    """Hodge numbers h[i][j] = h^{i,j} of a surface, 0 <= i, j <= 2."""

    h: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        h = tuple(tuple(int(x) for x in row) for row in self.h)
        if len(h) != 3 or any(len(row) != 3 for row in h):
            raise ValueError("a surface diamond is a 3x3 array")
        if any(x < 0 for row in h for x in row):
            raise ValueError("Hodge numbers are nonnegative")
        if h[0][0] != 1 or h[2][2] != 1:
            raise ValueError("h^{0,0} = h^{2,2} = 1 for a surface")
        object.__setattr__(self, "h", h)

    def __getitem__(self, ij):
        i, j = ij
        return self.h[i][j]

    @classmethod
    def from_flat(cls, values) -> HodgeDiamond:
        """From h00,h01,h02,h10,h11,h12,h20,h21,h22 (row i, column j)."""
        values = [int(v) for v in values]
        if len(values) != 9:
            raise ValueError("expected 9 Hodge numbers h00,h01,...,h22")
        return cls(tuple(tuple(values[3 * i:3 * i + 3]) for i in range(3)))

    def flat(self) -> tuple[int, ...]:
        return tuple(x for row in self.h for x in row)

    def betti(self) -> tuple[int, ...]:
        """Anti-diagonal sums b_0..b_4."""
        return tuple(sum(self.h[i][s - i] for i in range(3) if 0 <= s - i <= 2) for s in range(5))


# -- thresholds


def weil_lower_holds(q: int, sigma: int, d: int) -> bool:
    """Exact test of q^d - (sigma - 1) q^(d - 1/2) > 0."""
    s = sigma - 1
    if s <= 0:
        return True
    # q^d > s q^(d - 1/2)  <=>  q^(2d + 1) > s^2 q^(2d)
    return q ** (2 * d + 1) > s * s * q ** (2 * d)


def weil_window(q: int, sigma: int, d: int) -> tuple[float, float]:
    """(lower, upper) estimate for #Z(F_q) from the working Weil window."""
    dev = (sigma - 1) * q ** (d - 0.5)
    return q**d - dev, q**d + dev


def nonempty_threshold(sigma_c: int, d: int) -> int:
    """Least C such that every q > C makes the Weil lower bound positive: (sigma_c - 1)^2."""
    if sigma_c < 1:
        raise ValueError("sigma_c must be >= 1")
    if d < 0:
        raise ValueError("dimension must be >= 0")
    return (sigma_c - 1) ** 2


def crossover_holds(q: int, sigma_z: int, d_z: int, sigma_r: int, d_r: int) -> bool:
    """Exact test of q^dZ - (sigmaZ - 1) q^(dZ - 1/2) > sigmaR q^dR."""
    lhs = q**d_z - sigma_r * q**d_r
    s = sigma_z - 1
    if s == 0:
        return lhs > 0
    if lhs <= 0:
        return False
    # lhs > s * q^(dZ - 1/2)  <=>  lhs^2 > s^2 q^(2 dZ - 1)
    return lhs * lhs > s * s * q ** (2 * d_z - 1)


def crossover_threshold(sigma_z: int, d_z: int, sigma_r: int, d_r: int) -> int:
    """Least C such that for all q > C the Z lower bound beats the ramification upper bound.

    Dividing by q^dR, the condition reads s^(2e-1) (s - (sigmaZ - 1)) > sigmaR with
    s = sqrt(q), e = dZ - dR >= 1; the left side is increasing once positive, so the
    predicate is monotone in q and a doubling-then-bisection search is exact.
    """
    if d_z <= d_r:
        raise ValueError("need d_Z > d_R")
    if sigma_z < 1 or sigma_r < 0 or d_r < 0:
        raise ValueError("need sigma_Z >= 1, sigma_R >= 0, d_R >= 0")

    def holds(q):
        return crossover_holds(q, sigma_z, d_z, sigma_r, d_r)

    if holds(1):
        return 0
    lo, hi = 1, 2  # holds(lo) is False
    while not holds(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if holds(mid):
            hi = mid
        else:
            lo = mid
    return lo


def cover_betti_bound(deg_g: int, sigma: int) -> int:
    """Betti-sum bound deg(g) * sigma for an etale Galois cover of a base with constant sigma."""
    if deg_g < 1 or sigma < 1:
        raise ValueError("need deg_g >= 1 and sigma >= 1")
    return deg_g * sigma


def galois_closure_threshold(n: int, sigma: int) -> int:
    """Nonemptiness threshold for a Galois closure of degree at most n!."""
    return nonempty_threshold(cover_betti_bound(math.factorial(n), sigma), 1)


# -- surfaces


@dataclass(frozen=True)
class SurfaceEmbeddingData:
    chi: int
    k_squared: int
    n: int
    hilbert: tuple[Fraction, Fraction, Fraction]  # coefficients of T^2, T, 1

    def hilbert_value(self, t: int) -> Fraction:
        a, b, c = self.hilbert
        return a * t * t + b * t + c


def euler_characteristic_o(h: HodgeDiamond) -> int:
    return sum((-1) ** i * h[0, i] for i in range(3))


def k_squared(h: HodgeDiamond) -> int:
    return 12 * euler_characteristic_o(h) - sum((-1) ** (i + j) * h[i, j] for i, j in SURFACE_INDICES)


def surface_embedding_data(h: HodgeDiamond) -> SurfaceEmbeddingData:
    """chi(O), K^2, the 5K embedding dimension N and the Hilbert polynomial of the image."""
    chi = euler_characteristic_o(h)
    ksq = k_squared(h)
    if ksq <= 0:
        raise ValueError(f"K^2 = {ksq} <= 0: not a surface of general type with very ample 5K")
    n = 10 * ksq + chi - 1
    hilbert = (Fraction(25, 2) * ksq, Fraction(-5, 2) * ksq, Fraction(chi))
    data = SurfaceEmbeddingData(chi, ksq, n, hilbert)
    for t in range(-10, 11):
        if data.hilbert_value(t).denominator != 1:
            raise AssertionError(f"Hilbert polynomial not integral at T = {t}")  # pragma: no cover
    return data


def hodge_candidates(b1: int, b2: int, b3: int) -> list[HodgeDiamond]:
    """Every surface diamond with h00 = h22 = 1 and anti-diagonal sums b1, b2, b3.

    Hodge symmetry is not imposed.  Order: h10 ascending, then h20, then h11,
    then h21.
    """
    if min(b1, b2, b3) < 0:
        raise ValueError("Betti numbers are nonnegative")
    out = []
    for h10 in range(b1 + 1):
        for h20 in range(b2 + 1):
            for h11 in range(b2 - h20 + 1):
                h02 = b2 - h20 - h11
                for h21 in range(b3 + 1):
                    out.append(HodgeDiamond((
                        (1, b1 - h10, h02),
                        (h10, h11, b3 - h21),
                        (h20, h21, 1),
                    )))
    return out


def hodge_candidate_count(b1: int, b2: int, b3: int) -> int:
    return (b1 + 1) * math.comb(b2 + 2, 2) * (b3 + 1)
