"""The covlab stanza file format.

Grammar (one item per line, ``#`` starts a comment)::

    file     := "covlab-format 1" stanza*
    stanza   := "[" kind name "]" entry*
    kind     := "field" | "variety" | "cover"
    entry    := key "=" value

    field:   gf = GF(p) | GF(p^k)        modulus = [c0, .., ck]   (optional)
    variety: field = NAME   ambient = affine N | projective N   dim = D
             equation = EXPR (repeatable)   type = (N, r, d)      (optional)
    cover:   source = NAME   target = NAME   map = [EXPR, ..] (repeatable, one per block)
             degree = n   finite = true | false                   (optional, default true)

Names are referenced only after their stanza.  Polynomials are in x0..x{n-1}
with element literals ``[c0,c1,..]`` for non-prime fields.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field as dc_field

from .covers import CoverDesc, CoverError, verify_cover
from .ffield import FieldSpec, parse_field
from .geometry import AFFINE, PROJECTIVE, GeometryError, VarietyDesc
from .mpoly import ParseError, parse

HEADER = "covlab-format 1"

_STANZA = re.compile(r"^\[\s*(field|variety|cover)\s+([A-Za-z_][A-Za-z0-9_.\-]*)\s*\]$")
_ENTRY = re.compile(r"^([a-z_]+)\s*=\s*(.*)$")
_KEYS = {
    "field": {"gf", "modulus"},
    "variety": {"field", "ambient", "dim", "equation", "type"},
    "cover": {"source", "target", "map", "degree", "finite"},
}
_REPEATABLE = {"equation", "map"}
_REQUIRED = {
    "field": ("gf",),
    "variety": ("field", "ambient", "dim"),
    "cover": ("source", "target", "map", "degree"),
}


class ProblemParseError(ValueError):
    """Malformed input; carries the 1-based line number."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = f"{path or '<input>'}:{line}: " if line is not None else ""
        super().__init__(where + message)


class ProblemValidationError(ValueError):
    """Well-formed input that violates a mathematical rule; names the stanza."""

    def __init__(self, message, stanza=None, witness=None):
        self.stanza = stanza
        self.witness = witness
        super().__init__(f"[{stanza}] {message}" if stanza else message)


@dataclass
class Problem:
    fields: dict[str, FieldSpec] = dc_field(default_factory=dict)
    varieties: dict[str, VarietyDesc] = dc_field(default_factory=dict)
    covers: dict[str, CoverDesc] = dc_field(default_factory=dict)

    def __iter__(self):
        # unpacks as (fields, varieties, covers)
        return iter((self.fields, self.varieties, self.covers))


@dataclass
class _Stanza:
    kind: str
    name: str
    line: int
    entries: dict = dc_field(default_factory=dict)
    lines: dict = dc_field(default_factory=dict)

    @property
    def label(self):
        return f"{self.kind} {self.name}"


def split_top_level(text: str) -> list[str]:
    """Split on commas not nested in brackets or parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise ValueError("unbalanced brackets")
        if ch == "," and depth == 0:
            out.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    if depth:
        raise ValueError("unbalanced brackets")
    tail = "".join(cur).strip()
    if tail or out:
        out.append(tail)
    return out


def _bracketed(value: str, open_="[", close="]") -> list[str]:
    value = value.strip()
    if not (value.startswith(open_) and value.endswith(close)):
        raise ValueError(f"expected {open_}...{close}, got {value!r}")
    items = split_top_level(value[1:-1])
    if any(not s for s in items):
        raise ValueError(f"empty item in {value!r}")
    return items


def _read_stanzas(text: str, path=None) -> list[_Stanza]:
    lines = text.splitlines()
    body = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(lines)]
    body = [(n, ln) for n, ln in body if ln]
    if not body or body[0][1] != HEADER:
        raise ProblemParseError(f"first line must be {HEADER!r}", body[0][0] if body else 1, path)
    stanzas: list[_Stanza] = []
    for n, ln in body[1:]:
        if ln.startswith("["):
            m = _STANZA.match(ln)
            if not m:
                raise ProblemParseError(f"malformed stanza header {ln!r}", n, path)
            stanzas.append(_Stanza(m.group(1), m.group(2), n))
            continue
        m = _ENTRY.match(ln)
        if not m:
            raise ProblemParseError(f"expected 'key = value', got {ln!r}", n, path)
        if not stanzas:
            raise ProblemParseError("entry outside any stanza", n, path)
        st = stanzas[-1]
        key, value = m.group(1), m.group(2).strip()
        if key not in _KEYS[st.kind]:
            raise ProblemParseError(f"unknown key {key!r} in {st.kind} stanza", n, path)
        if key in _REPEATABLE:
            st.entries.setdefault(key, []).append(value)
            st.lines.setdefault(key, []).append(n)
        elif key in st.entries:
            raise ProblemParseError(f"duplicate key {key!r}", n, path)
        else:
            st.entries[key] = value
            st.lines[key] = n
    for st in stanzas:
        for key in _REQUIRED[st.kind]:
            if key not in st.entries:
                raise ProblemParseError(f"{st.kind} stanza {st.name!r} lacks {key!r}", st.line, path)
    return stanzas


def _int(st, key, path):
    try:
        return int(st.entries[key])
    except ValueError:
        raise ProblemParseError(f"{key!r} must be an integer", st.lines[key], path) from None


def _build_field(st, path) -> FieldSpec:
    modulus = None
    if "modulus" in st.entries:
        try:
            modulus = [int(c) for c in _bracketed(st.entries["modulus"])]
        except ValueError as exc:
            raise ProblemParseError(f"bad modulus: {exc}", st.lines["modulus"], path) from None
    try:
        return parse_field(st.entries["gf"], modulus)
    except ValueError as exc:
        if "malformed" in str(exc):
            raise ProblemParseError(str(exc), st.lines["gf"], path) from None
        raise ProblemValidationError(str(exc), st.label) from None


def _build_variety(st, prob, path) -> VarietyDesc:
    fname = st.entries["field"]
    if fname not in prob.fields:
        raise ProblemValidationError(f"unknown field {fname!r}", st.label)
    F = prob.fields[fname]
    parts = st.entries["ambient"].split()
    if len(parts) != 2 or parts[0] not in (AFFINE, PROJECTIVE) or not parts[1].isdigit():
        raise ProblemParseError("ambient must be 'affine N' or 'projective N'", st.lines["ambient"], path)
    ambient, n = parts[0], int(parts[1])
    nvars = n + 1 if ambient == PROJECTIVE else n
    eqs = []
    for text, ln in zip(st.entries.get("equation", []), st.lines.get("equation", [])):
        try:
            eqs.append(parse(text, nvars, F))
        except ParseError as exc:
            raise ProblemParseError(f"equation: {exc}", ln, path) from None
    td = None
    if "type" in st.entries:
        try:
            td = tuple(int(v) for v in _bracketed(st.entries["type"], "(", ")"))
            if len(td) != 3:
                raise ValueError("type needs three integers (N, r, d)")
        except ValueError as exc:
            raise ProblemParseError(str(exc), st.lines["type"], path) from None
    try:
        return VarietyDesc(ambient, n, tuple(eqs), _int(st, "dim", path), F, td, name=st.name)
    except GeometryError as exc:
        raise ProblemValidationError(str(exc), st.label) from None


def _build_cover(st, prob, path, verify_depth) -> CoverDesc:
    ends = []
    for key in ("source", "target"):
        name = st.entries[key]
        if name not in prob.varieties:
            raise ProblemValidationError(f"unknown {key} variety {name!r}", st.label)
        ends.append(prob.varieties[name])
    X, Y = ends
    blocks = []
    for text, ln in zip(st.entries["map"], st.lines["map"]):
        try:
            blocks.append(tuple(parse(e, X.nvars, X.field) for e in _bracketed(text)))
        except (ParseError, ValueError) as exc:
            raise ProblemParseError(f"map: {exc}", ln, path) from None
    finite = True
    if "finite" in st.entries:
        v = st.entries["finite"].lower()
        if v not in ("true", "false"):
            raise ProblemParseError("finite must be true or false", st.lines["finite"], path)
        finite = v == "true"
    try:
        f = CoverDesc(X, Y, tuple(blocks), _int(st, "degree", path), st.name, finite=finite)
        verify_cover(f, verify_depth)
    except CoverError as exc:
        raise ProblemValidationError(str(exc), st.label, getattr(exc, "witness", None)) from None
    except GeometryError as exc:
        raise ProblemValidationError(str(exc), st.label) from None
    return f


def loads(text: str, verify_depth: int = 1, path=None) -> Problem:
    if verify_depth < 1:
        raise ValueError("verify_depth must be >= 1")
    prob = Problem()
    for st in _read_stanzas(text, path):
        taken = prob.fields.keys() | prob.varieties.keys() | prob.covers.keys()
        if st.name in taken:
            raise ProblemValidationError(f"name {st.name!r} already defined", st.label)
        if st.kind == "field":
            prob.fields[st.name] = _build_field(st, path)
        elif st.kind == "variety":
            prob.varieties[st.name] = _build_variety(st, prob, path)
        else:
            prob.covers[st.name] = _build_cover(st, prob, path, verify_depth)
    return prob


def load_problem(path, verify_depth: int = 1) -> Problem:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), verify_depth, path)


# -- writing


def _field_lines(name, F: FieldSpec):
    out = [f"[field {name}]", f"gf = {F}"]
    if F.k > 1:
        out.append("modulus = [" + ", ".join(str(c) for c in F.modulus) + "]")
    return out


def _variety_lines(name, V: VarietyDesc, fname):
    out = [f"[variety {name}]", f"field = {fname}", f"ambient = {V.ambient} {V.n}", f"dim = {V.dim}"]
    out += [f"equation = {e}" for e in V.equations]
    if V.type_descriptor is not None:
        out.append("type = ({}, {}, {})".format(*V.type_descriptor))
    return out


def dumps(fields=None, varieties=None, covers=None, comment: str = "") -> str:
    """Serialize named objects; referenced fields and varieties are added as needed."""
    fields = dict(fields or {})
    varieties = dict(varieties or {})
    covers = {_fresh(k, ()): f for k, f in (covers or {}).items()}

    def fname_of(F):
        for k, v in fields.items():
            if v == F:
                return k
        k = _fresh(f"F{len(fields)}", fields.keys() | varieties.keys() | covers.keys())
        fields[k] = F
        return k

    def vname_of(V):
        for k, v in varieties.items():
            if v == V:
                return k
        k = _fresh(V.name or "V", fields.keys() | varieties.keys() | covers.keys())
        varieties[k] = V
        return k

    for f in covers.values():
        vname_of(f.source)
        vname_of(f.target)
    for V in varieties.values():
        fname_of(V.field)
    lines = [HEADER]
    if comment:
        lines += [f"# {c}" if c else "#" for c in comment.splitlines()]
    for k, F in fields.items():
        lines += [""] + _field_lines(k, F)
    for k, V in varieties.items():
        lines += [""] + _variety_lines(k, V, fname_of(V.field))
    for k, f in covers.items():
        lines += ["", f"[cover {k}]", f"source = {vname_of(f.source)}", f"target = {vname_of(f.target)}"]
        lines += ["map = [" + ", ".join(str(g) for g in block) + "]" for block in f.maps]
        lines.append(f"degree = {f.degree}")
        if not f.finite:
            lines.append("finite = false")
    return "\n".join(lines) + "\n"


def _fresh(base, taken):
    base = re.sub(r"[^A-Za-z0-9_.\-]", "_", base)
    if not re.match(r"[A-Za-z_]", base):
        base = "V_" + base
    name, i = base, 1
    while name in taken:
        i += 1
        name = f"{base}_{i}"
    return name
