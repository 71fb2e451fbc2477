"""Sparse multivariate polynomials over a finite field.

A :class:`Multinomial` maps exponent vectors to nonzero coefficients.  It is
immutable; all arithmetic returns new objects.  Canonical printing uses
graded lexicographic order (higher total degree first, ties broken by the
exponent vector in descending lexicographic order), with coefficients shown
normalized, so ``parse(str(f))`` reproduces ``f`` exactly.

Expression grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)?
    atom   := INT | VAR | '[' INT (',' INT)* ']' | '(' expr ')'

``VAR`` is ``x0 .. x{nvars-1}``; a bracketed list is an element literal
``[c0,c1,...]`` of an extension field.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels as K
from .ffield import Element, Embedding, FieldSpec

# degree of the zero polynomial
ZERO_DEGREE = float("-inf")


class ParseError(ValueError):
    def __init__(self, message, text="", pos=None):
        self.text = text
        self.pos = pos
        if pos is not None:
            message = f"{message} at column {pos + 1} in {text!r}"
        super().__init__(message)


class Multinomial:
    __slots__ = ("field", "nvars", "terms", "_arrays", "_hash")

    def __init__(self, field: FieldSpec, nvars: int, terms: Mapping[tuple, Element] | None = None):
        clean = {}
        for exps, c in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError(f"exponent vector {exps} does not have length {nvars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = field(c)
            if not c.is_zero():
                if exps in clean:
                    c = clean[exps] + c
                    if c.is_zero():
                        del clean[exps]
                        continue
                clean[exps] = c
        self.field = field
        self.nvars = nvars
        self.terms = clean
        self._arrays = None
        self._hash = None

    # constructors

    @classmethod
    def zero(cls, field, nvars):
        return cls(field, nvars)

    @classmethod
    def constant(cls, field, nvars, c):
        return cls(field, nvars, {(0,) * nvars: field(c)})

    @classmethod
    def variable(cls, field, nvars, j):
        if not 0 <= j < nvars:
            raise IndexError(f"variable index {j} out of range for {nvars} variables")
        exps = [0] * nvars
        exps[j] = 1
        return cls(field, nvars, {tuple(exps): field.one})

    # basic properties

    @property
    def degree(self):
        if not self.terms:
            return ZERO_DEGREE
        return max(sum(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def __eq__(self, other):
        if not isinstance(other, Multinomial):
            return NotImplemented
        return self.field == other.field and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, self.nvars, frozenset(self.terms.items())))
        return self._hash

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Multinomial):
            if other.field != self.field or other.nvars != self.nvars:
                raise ValueError("polynomials over different fields or variable counts")
            return other
        if isinstance(other, (int, np.integer, Element)):
            return Multinomial.constant(self.field, self.nvars, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms[e] + c if e in terms else c
        return Multinomial(self.field, self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Multinomial(self.field, self.nvars, {e: -c for e, c in self.terms.items()})

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
        terms: dict[tuple, Element] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                c = c1 * c2
                terms[e] = terms[e] + c if e in terms else c
        return Multinomial(self.field, self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers of polynomials are undefined")
        result = Multinomial.constant(self.field, self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # evaluation

    def evaluate(self, point: Sequence[Element]) -> Element:
        if len(point) != self.nvars:
            raise ValueError(f"point has {len(point)} coordinates, polynomial has {self.nvars} variables")
        F = self.field
        pt = [F(x) for x in point]
        acc = F.zero
        for exps, c in self.terms.items():
            term = c
            for x, e in zip(pt, exps):
                if e:
                    term = term * x**e
            acc = acc + term
        return acc

    def kernel_arrays(self):
        """(exponents (T, nvars), coefficient codes (T,)) for the kernels."""
        if self._arrays is None:
            items = sorted(self.terms.items())
            exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), self.nvars)
            coeffs = np.array([c.code for _, c in items], dtype=np.int64)
            self._arrays = (np.ascontiguousarray(exps), coeffs)
        return self._arrays

    def eval_codes(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at every row of an (n, nvars) array of element codes."""
        points = np.asarray(points, dtype=np.int64)
        if points.ndim != 2 or points.shape[1] != self.nvars:
            raise ValueError("points must have shape (n, nvars)")
        exps, coeffs = self.kernel_arrays()
        if not self.terms:
            return np.zeros(points.shape[0], dtype=np.int64)
        p, k, mod = self.field.kparams
        return K.eval_poly(points, exps, coeffs, p, k, mod)

    # calculus and charts

    def partial(self, j: int) -> Multinomial:
        if not 0 <= j < self.nvars:
            raise IndexError(f"variable index {j} out of range for {self.nvars} variables")
        terms = {}
        for e, c in self.terms.items():
            if e[j] == 0:
                continue
            ex = list(e)
            ex[j] -= 1
            terms[tuple(ex)] = c * e[j]
        return Multinomial(self.field, self.nvars, terms)

    def homogenize(self, d: int | None = None) -> Multinomial:
        """Pad every term to total degree ``d`` with a new last variable."""
        if d is None:
            d = max(self.degree, 0)
        if d < self.degree:
            raise ValueError(f"target degree {d} is below total degree {self.degree}")
        terms = {e + (d - sum(e),): c for e, c in self.terms.items()}
        return Multinomial(self.field, self.nvars + 1, terms)

    def dehomogenize(self, i: int | None = None) -> Multinomial:
        """Set variable ``i`` (default: last) to 1 and drop it."""
        if i is None:
            i = self.nvars - 1
        if not 0 <= i < self.nvars:
            raise IndexError(f"chart index {i} out of range for {self.nvars} variables")
        terms: dict[tuple, Element] = {}
        for e, c in self.terms.items():
            ex = e[:i] + e[i + 1:]
            terms[ex] = terms[ex] + c if ex in terms else c
        return Multinomial(self.field, self.nvars - 1, terms)

    def map_field(self, emb: Embedding) -> Multinomial:
        if emb.source != self.field:
            raise ValueError("embedding source does not match the polynomial's field")
        return Multinomial(emb.target, self.nvars, {e: emb(c) for e, c in self.terms.items()})

    def remap(self, nvars: int, positions: Sequence[int]) -> Multinomial:
        """Move variable j to position ``positions[j]`` in a ring with ``nvars`` variables."""
        if len(positions) != self.nvars:
            raise ValueError("one target position per variable required")
        terms = {}
        for e, c in self.terms.items():
            ex = [0] * nvars
            for j, pos in enumerate(positions):
                ex[pos] += e[j]
            terms[tuple(ex)] = c
        return Multinomial(self.field, nvars, terms)

    # printing

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            mono = "*".join(f"x{j}" if e == 1 else f"x{j}^{e}" for j, e in enumerate(exps) if e)
            one = c == self.field.one
            if not mono:
                parts.append(str(c))
            elif one:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"Multinomial({self}, nvars={self.nvars}, {self.field})"


# -- parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|x(\d+)|([-+*^()\[\],])|(\S))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace remains
            break
        start = m.start(m.lastindex)
        if m.group(1) is not None:
            tokens.append(("int", int(m.group(1)), start))
        elif m.group(2) is not None:
            tokens.append(("var", int(m.group(2)), start))
        elif m.group(3) is not None:
            tokens.append((m.group(3), None, start))
        else:
            if m.group(4).isalpha():
                word = re.match(r"[A-Za-z_]\w*", text[start:]).group(0)
                raise ParseError(f"unknown variable {word!r}", text, start)
            raise ParseError(f"unexpected character {m.group(4)!r}", text, start)
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, nvars, field):
        self.text = text
        self.nvars = nvars
        self.field = field
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[0]!r}", self.text, tok[2])
        self.i += 1
        return tok

    def parse(self):
        if self.peek() == "end":
            raise ParseError("empty expression", self.text, 0)
        f = self.expr()
        if self.peek() != "end":
            tok = self.tokens[self.i]
            raise ParseError(f"unexpected token {tok[0]!r}", self.text, tok[2])
        return f

    def expr(self):
        f = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            g = self.term()
            f = f + g if op == "+" else f - g
        return f

    def term(self):
        f = self.unary()
        while self.peek() == "*":
            self.take()
            f = f * self.unary()
        return f

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self):
        f = self.atom()
        if self.peek() == "^":
            self.take()
            e = self.take("int")[1]
            f = f**e
        return f

    def atom(self):
        kind, val, pos = self.tokens[self.i]
        if kind == "int":
            self.take()
            return Multinomial.constant(self.field, self.nvars, val)
        if kind == "var":
            self.take()
            if val >= self.nvars:
                raise ParseError(f"unknown variable 'x{val}' (only {self.nvars} variables)", self.text, pos)
            return Multinomial.variable(self.field, self.nvars, val)
        if kind == "[":
            self.take()
            coeffs = [self.take("int")[1]]
            while self.peek() == ",":
                self.take()
                coeffs.append(self.take("int")[1])
            self.take("]")
            if len(coeffs) > self.field.k:
                raise ParseError(f"element literal has more than {self.field.k} coefficients", self.text, pos)
            return Multinomial.constant(self.field, self.nvars, self.field(coeffs))
        if kind == "(":
            self.take()
            f = self.expr()
            self.take(")")
            return f
        raise ParseError(f"unexpected token {kind!r}", self.text, pos)


def parse(text: str, nvars: int, field: FieldSpec) -> Multinomial:
    return _Parser(text, nvars, field).parse()


# -- Jacobians

@dataclass(frozen=True)
class JacobianMatrix:
    """Formal partials: ``entries[i][j]`` is d f_i / d x_j."""

    entries: tuple[tuple[Multinomial, ...], ...]
    nvars: int

    @property
    def shape(self):
        return len(self.entries), self.nvars

    def evaluate(self, point: Sequence[Element]) -> list[list[Element]]:
        return [[g.evaluate(point) for g in row] for row in self.entries]


def jacobian(fs: Iterable[Multinomial], nvars: int | None = None) -> JacobianMatrix:
    fs = list(fs)
    if fs:
        field = fs[0].field
        nvars = fs[0].nvars if nvars is None else nvars
        for f in fs:
            if f.field != field or f.nvars != nvars:
                raise ValueError("jacobian needs polynomials over one field and variable set")
    elif nvars is None:
        raise ValueError("nvars is required for an empty polynomial list")
    return JacobianMatrix(tuple(tuple(f.partial(j) for j in range(nvars)) for f in fs), nvars)
