"""Exact arithmetic in prime fields F_p and their extensions F_{p^k}.

Elements are dense coefficient vectors in the power basis of a root of the
field's modulus.  Each element also has an integer *code*
``c0 + c1*p + ... + c_{k-1}*p^(k-1)``; codes are what the vectorized kernels
operate on, and element enumeration follows ascending code order (the
coefficient vector read as base-p digits, constant term least significant).
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as K
from .config import check_budget

# p*p must fit in int64 inside the kernels
MAX_CHARACTERISTIC = 2**31 - 1


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    f = 3
    while f <= r:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, k) with q = p**k, or raise ValueError."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    k, rest = 0, q
    while rest % p == 0:
        rest //= p
        k += 1
    if rest != 1:
        raise ValueError(f"{q} is not a prime power")
    return p, k


# -- univariate polynomials over F_p (coefficient lists, constant term first)

def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_divmod(a, b, p):
    a = _trim(a)
    b = _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv_lead = pow(b[-1], -1, p)
    quot = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        c = a[-1] * inv_lead % p
        shift = len(a) - len(b)
        quot[shift] = c
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        a = _trim(a)
    return quot, a


def _poly_mulmod(a, b, m, p):
    prod = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    return _poly_divmod(prod, m, p)[1]


def _poly_pow(base, e, m, p):
    result = [1]
    base = _poly_divmod(base, m, p)[1]
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, m, p)
        e >>= 1
        if e:
            base = _poly_mulmod(base, base, m, p)
    return result


def _poly_gcd(a, b, p):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _poly_divmod(a, b, p)[1]
    return a


def _poly_sub(a, b, p):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def irreducible_exhaustive(f: Sequence[int], p: int) -> bool:
    """Irreducibility by ruling out every divisor of degree <= deg/2 (deg <= 4)."""
    f = _trim([c % p for c in f])
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    if k > 4:
        raise ValueError("exhaustive test only implemented for degree <= 4")
    for r in range(p):
        if sum(c * pow(r, i, p) for i, c in enumerate(f)) % p == 0:
            return False
    if k == 4:
        for c0 in range(p):
            for c1 in range(p):
                if not _poly_divmod(f, [c0, c1, 1], p)[1]:
                    return False
    return True


def irreducible_rabin(f: Sequence[int], p: int) -> bool:
    """Rabin's test: x^(p^k) = x mod f and gcd(x^(p^(k/r)) - x, f) = 1 for primes r | k."""
    f = _trim([c % p for c in f])
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True

    def frob_iter(times):
        h = [0, 1]
        for _ in range(times):
            h = _poly_pow(h, p, f, p)
        return h

    if _poly_sub(frob_iter(k), [0, 1], p):
        return False
    for r in (d for d in range(2, k + 1) if k % d == 0 and is_prime(d)):
        g = _poly_gcd(_poly_sub(frob_iter(k // r), [0, 1], p), f, p)
        if len(g) > 1:
            return False
    return True


def is_irreducible(f: Sequence[int], p: int) -> bool:
    k = len(_trim([c % p for c in f])) - 1
    if k <= 4:
        return irreducible_exhaustive(f, p)
    return irreducible_rabin(f, p)


# -- fields and elements

@dataclass(frozen=True)
class FieldSpec:
    """The field F_{p^k}; ``modulus`` lists c0..ck of the monic modulus."""

    p: int
    k: int = 1
    modulus: tuple[int, ...] | None = None

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.p > MAX_CHARACTERISTIC:
            raise ValueError(f"characteristic {self.p} exceeds machine-word bound")
        if self.k < 1:
            raise ValueError("extension degree must be >= 1")
        if self.k == 1:
            if self.modulus is not None:
                raise ValueError("prime fields carry no modulus")
            return
        if self.modulus is None or len(self.modulus) != self.k + 1:
            raise ValueError(f"GF({self.p}^{self.k}) needs a degree-{self.k} modulus")
        if self.modulus[-1] != 1:
            raise ValueError(f"modulus {list(self.modulus)} is not monic")
        if any(not 0 <= c < self.p for c in self.modulus):
            raise ValueError(f"modulus {list(self.modulus)} has unreduced coefficients")
        if not is_irreducible(self.modulus, self.p):
            raise ValueError(f"modulus {list(self.modulus)} is reducible over GF({self.p})")

    @property
    def q(self) -> int:
        return self.p**self.k

    @functools.cached_property
    def kparams(self):
        """(p, k, low modulus coefficients) as passed to the kernels."""
        if self.k == 1:
            mod = np.zeros(1, dtype=np.int64)
        else:
            mod = np.array(self.modulus[:-1], dtype=np.int64)
        return self.p, self.k, mod

    def __call__(self, value) -> Element:
        if isinstance(value, Element):
            if value.field != self:
                raise ValueError("element belongs to a different field")
            return value
        if isinstance(value, (int, np.integer)):
            return Element(self, (int(value) % self.p,) + (0,) * (self.k - 1))
        coeffs = tuple(int(c) % self.p for c in value)
        if len(coeffs) > self.k:
            raise ValueError(f"too many coefficients for {self}")
        return Element(self, coeffs + (0,) * (self.k - len(coeffs)))

    def from_code(self, code: int) -> Element:
        code = int(code)
        coeffs = []
        for _ in range(self.k):
            coeffs.append(code % self.p)
            code //= self.p
        return Element(self, tuple(coeffs))

    @property
    def zero(self) -> Element:
        return self(0)

    @property
    def one(self) -> Element:
        return self(1)

    @property
    def gen(self) -> Element:
        """Root of the modulus (``1`` for prime fields)."""
        return self.one if self.k == 1 else self((0, 1))

    def __str__(self):
        return f"GF({self.p})" if self.k == 1 else f"GF({self.p}^{self.k})"


@dataclass(frozen=True)
class Element:
    field: FieldSpec
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.field.k:
            raise ValueError("coefficient vector length must equal the extension degree")

    @property
    def code(self) -> int:
        c = 0
        for v in reversed(self.coeffs):
            c = c * self.field.p + v
        return c

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def _coerce(self, other):
        if isinstance(other, Element):
            if other.field != self.field:
                raise ValueError(f"mismatched fields {self.field} and {other.field}")
            return other
        if isinstance(other, (int, np.integer)):
            return self.field(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.field.p
        return Element(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return Element(self.field, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        F = self.field
        p, k = F.p, F.k
        if k == 1:
            return Element(F, (self.coeffs[0] * other.coeffs[0] % p,))
        prod = [0] * (2 * k - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] = (prod[i + j] + a * b) % p
        low = F.modulus[:-1]
        for d in range(2 * k - 2, k - 1, -1):
            c = prod[d]
            if c:
                for j, m in enumerate(low):
                    prod[d - k + j] = (prod[d - k + j] - c * m) % p
        return Element(F, tuple(prod[:k]))

    __rmul__ = __mul__

    def inverse(self) -> Element:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a finite field")
        F = self.field
        if F.k == 1:
            return Element(F, (pow(self.coeffs[0], -1, F.p),))
        return self ** (F.q - 2)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, e: int):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __str__(self):
        if self.field.k == 1:
            return str(self.coeffs[0])
        return "[" + ",".join(str(c) for c in self.coeffs) + "]"

    def __repr__(self):
        return f"Element({self}, {self.field})"


_ELEMENT_LITERAL = re.compile(r"^\s*\[\s*(-?\d+(?:\s*,\s*-?\d+)*)\s*\]\s*$")


def parse_element(text: str, F: FieldSpec) -> Element:
    """Parse ``"[c0,c1,...]"`` or a bare integer into an element of ``F``."""
    text = text.strip()
    m = _ELEMENT_LITERAL.match(text)
    if m:
        return F([int(c) for c in m.group(1).split(",")])
    try:
        return F(int(text))
    except ValueError:
        raise ValueError(f"malformed element literal {text!r}") from None


@functools.lru_cache(maxsize=None)
def _first_irreducible(p: int, k: int) -> tuple[int, ...]:
    for code in range(p**k):
        low = []
        c = code
        for _ in range(k):
            low.append(c % p)
            c //= p
        f = tuple(low) + (1,)
        if is_irreducible(f, p):
            return f
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


def make_field(p: int, k: int = 1) -> FieldSpec:
    """F_{p^k} with the first monic irreducible modulus in ascending code order."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if k < 1:
        raise ValueError("extension degree must be >= 1")
    check_budget(p**k, f"field GF({p}^{k})")
    if k == 1:
        return FieldSpec(p)
    return FieldSpec(p, k, _first_irreducible(p, k))


_FIELD_LITERAL = re.compile(r"^\s*GF\(\s*(\d+)\s*(?:\^\s*(\d+)\s*)?\)\s*$")


def parse_field(text: str, modulus: Sequence[int] | None = None) -> FieldSpec:
    """Parse ``"GF(p)"`` or ``"GF(p^k)"``; an explicit modulus overrides the default."""
    m = _FIELD_LITERAL.match(text)
    if not m:
        raise ValueError(f"malformed field literal {text!r}")
    p = int(m.group(1))
    k = int(m.group(2) or 1)
    if modulus is None:
        return make_field(p, k)
    check_budget(p**k, f"field GF({p}^{k})")
    return FieldSpec(p, k, tuple(int(c) for c in modulus))


def arith(a: Element, b: Element, op: str) -> Element:
    if a.field != b.field:
        raise ValueError(f"mismatched fields {a.field} and {b.field}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def power(a: Element, e: int) -> Element:
    if e < 0:
        raise ValueError("exponent must be nonnegative")
    return a**e


def frobenius(a: Element, F: FieldSpec | None = None) -> Element:
    """Absolute Frobenius a -> a^p."""
    if F is not None and a.field != F:
        raise ValueError("element is not in the given field")
    return a**a.field.p


def enumerate_elements(F: FieldSpec) -> list[Element]:
    check_budget(F.q, f"elements of {F}")
    return [F.from_code(c) for c in range(F.q)]


@dataclass(frozen=True)
class Embedding:
    """Field embedding determined by the image of the source generator."""

    source: FieldSpec
    target: FieldSpec
    gen_image: Element

    def __call__(self, a: Element) -> Element:
        if a.field != self.source:
            raise ValueError("element is not in the embedding's source field")
        result = self.target.zero
        g = self.target.one
        for c in a.coeffs:
            if c:
                result = result + g * c
            g = g * self.gen_image
        return result

    def code_table(self) -> np.ndarray:
        """Image codes of all source codes, as an array indexed by code."""
        return _embedding_table(self)


@functools.lru_cache(maxsize=64)
def _embedding_table(emb: Embedding) -> np.ndarray:
    if emb.source.k == 1:
        return np.arange(emb.source.p, dtype=np.int64)
    return np.array([emb(emb.source.from_code(c)).code for c in range(emb.source.q)], dtype=np.int64)


def _find_root(coeffs: Sequence[int], L: FieldSpec) -> Element:
    """Smallest-code root in L of a polynomial with prime-field coefficients."""
    p, k, mod = L.kparams
    exps = np.arange(len(coeffs), dtype=np.int64)[:, None]
    cs = np.array(coeffs, dtype=np.int64)
    chunk = 1 << 18
    for start in range(0, L.q, chunk):
        pts = np.arange(start, min(start + chunk, L.q), dtype=np.int64)[:, None]
        vals = K.eval_poly(pts, exps, cs, p, k, mod)
        hits = np.nonzero(vals == 0)[0]
        if hits.size:
            return L.from_code(int(pts[hits[0], 0]))
    raise ValueError(f"polynomial {list(coeffs)} has no root in {L}")


@functools.lru_cache(maxsize=None)
def _extend(F: FieldSpec, m: int):
    if m == 1:
        return F, Embedding(F, F, F.gen)
    L = make_field(F.p, F.k * m)
    if F.k == 1:
        return L, Embedding(F, L, L.one)
    check_budget(L.q, f"root search for embedding {F} -> {L}")
    return L, Embedding(F, L, _find_root(F.modulus, L))


def extend_field(F: FieldSpec, m: int) -> tuple[FieldSpec, Embedding]:
    """The degree-m extension of ``F`` and the embedding of ``F`` into it."""
    if m < 1:
        raise ValueError("extension degree must be >= 1")
    check_budget(F.q**m, f"extension of {F} by degree {m}")
    return _extend(F, m)
