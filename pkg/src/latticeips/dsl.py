"""Line-oriented text format for models.

Example::

    version = 1

    [poset]
    elements = 0 1
    covers = 0<1

    [states]
    names = empty young adult

    [grid]
    topology = torus
    size = 6

    [map grow]
    arity = 1
    offsets = 0
    table = young->adult
    rate = 1

States are written as canonical lattice indices or as names from
``[states]``. Unlisted table inputs map to themselves. ``#`` starts a
comment. Every error carries a 1-based line and column.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .errors import (
    BadOffset,
    ModelSyntaxError,
    NotAPartialOrder,
    NotAdditive,
    UnknownState,
)
from .graphical import TOPOLOGIES, Family, Model, build_model
from .lattice import downset_lattice, validate_poset
from .maps import LocalFunction

VERSION = 1

SECTION_KEYS = {
    "poset": {"elements", "covers"},
    "states": {"names"},
    "grid": {"topology", "size"},
    "maps": set(),
    "map": {"arity", "offsets", "table", "rate", "rate_table"},
}

_HEADER = re.compile(r"\[\s*([A-Za-z_]+)(?:\s+(\S+?))?\s*\]$")
_KEYVAL = re.compile(r"([A-Za-z_]\w*)\s*=\s*(.*)$")
_MAP_NAME = re.compile(r"[A-Za-z_][\w+\-.]*$")
_WORD = re.compile(r"[^\s<,()\->:=]+")
_SITE = re.compile(r"[+-]?\w+")
_RATE = re.compile(r"[^\s,()]+")
_NUMBER = re.compile(r"[+]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True)
class ModelSpecSource:
    text: str
    origin: str = "<string>"


@dataclass
class _Value:
    text: str
    line: int
    col: int


@dataclass
class _Section:
    kind: str
    name: Optional[str]
    line: int
    col: int
    values: dict = field(default_factory=dict)


class _Scanner:
    """Cursor over one value string, reporting columns in the source line."""

    def __init__(self, value: _Value, origin: str):
        self.s = value.text
        self.pos = 0
        self.v = value
        self.origin = origin

    def error(self, msg, cls=ModelSyntaxError, pos=None):
        pos = self.pos if pos is None else pos
        return cls(msg, self.v.line, self.v.col + pos, self.origin)

    def ws(self):
        while self.pos < len(self.s) and self.s[self.pos].isspace():
            self.pos += 1

    def done(self) -> bool:
        self.ws()
        return self.pos >= len(self.s)

    def expect(self, lit: str):
        self.ws()
        if not self.s.startswith(lit, self.pos):
            found = self.s[self.pos:self.pos + 8] or "end of line"
            raise self.error(f"expected {lit!r}, found {found!r}")
        self.pos += len(lit)

    def peek(self, lit: str) -> bool:
        self.ws()
        return self.s.startswith(lit, self.pos)

    def word(self, what="a value", pattern=None) -> tuple[str, int]:
        self.ws()
        m = (pattern or _WORD).match(self.s, self.pos)
        if not m:
            raise self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(0), m.start()


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            yield lineno, body


def _read_sections(src: ModelSpecSource) -> list:
    origin = src.origin
    sections = []
    seen_version = False
    current = None
    seen_singletons = {}
    map_names = {}
    for lineno, body in _lines(src.text):
        col = len(body) - len(body.lstrip()) + 1
        stripped = body.strip()
        if not seen_version:
            m = _KEYVAL.match(stripped)
            if not m or m.group(1) != "version":
                raise ModelSyntaxError("first statement must be 'version = 1'", lineno, col, origin)
            if m.group(2).strip() != str(VERSION):
                raise ModelSyntaxError(
                    f"unsupported version {m.group(2).strip()!r}", lineno,
                    col + m.start(2), origin,
                )
            seen_version = True
            continue
        if stripped.startswith("["):
            m = _HEADER.match(stripped)
            if not m:
                raise ModelSyntaxError("malformed section header", lineno, col, origin)
            kind, name = m.group(1), m.group(2)
            if kind not in SECTION_KEYS:
                raise ModelSyntaxError(f"unknown section [{kind}]", lineno, col, origin)
            if kind == "map":
                if name is None or not _MAP_NAME.match(name):
                    raise ModelSyntaxError("map section needs a name", lineno, col, origin)
                if name in map_names:
                    raise ModelSyntaxError(
                        f"map {name!r} already defined on line {map_names[name]}",
                        lineno, col, origin,
                    )
                map_names[name] = lineno
            else:
                if name is not None:
                    raise ModelSyntaxError(f"section [{kind}] takes no name", lineno, col, origin)
                if kind in seen_singletons:
                    raise ModelSyntaxError(
                        f"section [{kind}] repeated (first on line {seen_singletons[kind]})",
                        lineno, col, origin,
                    )
                seen_singletons[kind] = lineno
            current = _Section(kind, name, lineno, col)
            sections.append(current)
            continue
        m = _KEYVAL.match(stripped)
        if not m:
            raise ModelSyntaxError("expected 'key = value'", lineno, col, origin)
        if current is None:
            raise ModelSyntaxError("statement outside any section", lineno, col, origin)
        key = m.group(1)
        if key not in SECTION_KEYS[current.kind]:
            raise ModelSyntaxError(
                f"unknown key {key!r} in [{current.kind}]", lineno, col, origin
            )
        if key in current.values:
            raise ModelSyntaxError(f"duplicate key {key!r}", lineno, col, origin)
        current.values[key] = _Value(m.group(2).strip(), lineno, col + m.start(2))
    if not seen_version:
        raise ModelSyntaxError("empty model: missing 'version = 1'", 1, 1, origin)
    return sections


def _require(sec: _Section, key: str, origin: str) -> _Value:
    if key not in sec.values:
        raise ModelSyntaxError(f"[{sec.kind}] is missing '{key}'", sec.line, sec.col, origin)
    return sec.values[key]


def _words(v: _Value, origin: str) -> list:
    return [(m.group(0), v.col + m.start()) for m in re.finditer(r"\S+", v.text)]


def _parse_rate(v: _Value, text: str, col: int, origin: str) -> float:
    if not _NUMBER.match(text):
        raise ModelSyntaxError(f"expected a non-negative decimal, found {text!r}", v.line, col, origin)
    r = float(text)
    if not math.isfinite(r):
        raise ModelSyntaxError(f"rate {text!r} is not finite", v.line, col, origin)
    return r


def _parse_int(v: _Value, text: str, col: int, origin: str, cls=ModelSyntaxError) -> int:
    if not re.fullmatch(r"[+-]?\d+", text):
        raise cls(f"expected an integer, found {text!r}", v.line, col, origin)
    return int(text)


def _build_poset(sec: _Section, origin: str):
    elems_v = _require(sec, "elements", origin)
    elems = _words(elems_v, origin)
    for name, col in elems:
        if not _WORD.fullmatch(name):
            raise ModelSyntaxError(f"bad element name {name!r}", elems_v.line, col, origin)
    labels = [e for e, _ in elems]
    seen = {}
    for name, col in elems:
        if name in seen:
            raise ModelSyntaxError(f"duplicate element {name!r}", elems_v.line, col, origin)
        seen[name] = col
    pairs = []
    cov = sec.values.get("covers")
    if cov is not None:
        for tok, col in _words(cov, origin):
            parts = tok.split("<")
            if len(parts) < 2 or any(not p for p in parts):
                raise ModelSyntaxError(f"expected 'a<b', found {tok!r}", cov.line, col, origin)
            off = 0
            for p in parts:
                if p not in seen:
                    raise ModelSyntaxError(f"unknown element {p!r}", cov.line, col + off, origin)
                off += len(p) + 1
            pairs.extend(zip(parts, parts[1:]))
    try:
        return validate_poset(labels, pairs)
    except NotAPartialOrder as exc:
        line = cov.line if cov is not None else elems_v.line
        err = type(exc)(f"{origin}:{line}: {exc}")
        err.line = line
        raise err from None


class _StateResolver:
    def __init__(self, q: int, names: Optional[tuple]):
        self.q = q
        self.by_name = {n: k for k, n in enumerate(names)} if names else {}

    def __call__(self, tok: str, sc: _Scanner, col: int) -> int:
        if tok in self.by_name:
            return self.by_name[tok]
        if tok.isdigit() and int(tok) < self.q:
            return int(tok)
        raise sc.error(f"unknown state {tok!r} (|S| = {self.q})", UnknownState, col)


def _parse_tuple(sc: _Scanner, arity: int, resolve) -> tuple:
    if arity == 1 and not sc.peek("("):
        tok, col = sc.word("a state")
        return (resolve(tok, sc, col),)
    sc.expect("(")
    out = []
    for k in range(arity):
        if k:
            sc.expect(",")
        tok, col = sc.word("a state")
        out.append(resolve(tok, sc, col))
    sc.expect(")")
    return tuple(out)


def _parse_table(v: _Value, arity: int, resolve, origin: str) -> dict:
    sc = _Scanner(v, origin)
    rows = {}
    first = True
    while not sc.done():
        if not first:
            sc.expect(",")
        first = False
        sc.ws()
        start = sc.pos
        x = _parse_tuple(sc, arity, resolve)
        sc.expect("->")
        y = _parse_tuple(sc, arity, resolve)
        if x in rows:
            raise sc.error(f"input {x} listed twice", pos=start)
        rows[x] = y
    return rows


def _parse_rate_table(v: _Value, arity: int, size: int, origin: str) -> tuple:
    sc = _Scanner(v, origin)
    out = {}
    while not sc.done():
        sc.ws()
        start = sc.pos
        if arity == 1 and not sc.peek("("):
            tok, col = sc.word("a site", _SITE)
            key = (_parse_int(v, tok, v.col + col, origin, BadOffset),)
        else:
            sc.expect("(")
            key = []
            for k in range(arity):
                if k:
                    sc.expect(",")
                tok, col = sc.word("a site", _SITE)
                key.append(_parse_int(v, tok, v.col + col, origin, BadOffset))
            sc.expect(")")
            key = tuple(key)
        for site in key:
            if not 0 <= site < size:
                raise sc.error(f"site {site} outside grid of size {size}", BadOffset, start)
        if len(set(key)) != len(key):
            raise sc.error(f"window {key} repeats a site", BadOffset, start)
        sc.expect(":")
        tok, col = sc.word("a rate", _RATE)
        r = _parse_rate(v, tok, v.col + col, origin)
        if key in out:
            raise sc.error(f"window {key} listed twice", pos=start)
        out[key] = r
    return tuple(sorted(out.items()))


def _build_family(sec: _Section, lattice, resolve, size: int, origin: str) -> Family:
    av = _require(sec, "arity", origin)
    if av.text not in ("1", "2"):
        raise ModelSyntaxError(f"arity must be 1 or 2, found {av.text!r}", av.line, av.col, origin)
    arity = int(av.text)
    ov = _require(sec, "offsets", origin)
    offs = [(_parse_int(ov, t, c, origin, BadOffset), c) for t, c in _words(ov, origin)]
    if len(offs) != arity:
        raise BadOffset(f"arity {arity} needs {arity} offset(s), found {len(offs)}",
                        ov.line, ov.col, origin)
    offsets = tuple(d for d, _ in offs)
    if len(set(offsets)) != arity:
        raise BadOffset("offsets must be distinct", ov.line, offs[-1][1], origin)
    for d, c in offs:
        if abs(d) >= size:
            raise BadOffset(f"offset {d} does not fit a grid of size {size}", ov.line, c, origin)
    tv = sec.values.get("table", _Value("", sec.line, sec.col))
    rows = _parse_table(tv, arity, resolve, origin)
    try:
        template = LocalFunction.from_rows(lattice, offsets, rows)
    except ValueError as exc:
        raise ModelSyntaxError(str(exc), tv.line, tv.col, origin) from None
    has_rate, has_table = "rate" in sec.values, "rate_table" in sec.values
    if has_rate == has_table:
        raise ModelSyntaxError(
            f"map {sec.name!r} needs exactly one of 'rate' and 'rate_table'",
            sec.line, sec.col, origin,
        )
    if has_rate:
        rv = sec.values["rate"]
        return Family(sec.name, template, rate=_parse_rate(rv, rv.text, rv.col, origin))
    table = _parse_rate_table(sec.values["rate_table"], arity, size, origin)
    return Family(sec.name, template, rate_table=table)


def parse_model(src: Union[str, ModelSpecSource], origin: str = "<string>") -> Model:
    """Parse model text into a validated Model.

    Raises ModelSyntaxError (or its subclasses UnknownState, BadOffset) with
    a position, NotAPartialOrder for cyclic covers, and NotAdditive when a
    map table fails the additivity check.
    """
    if isinstance(src, str):
        src = ModelSpecSource(src, origin)
    origin = src.origin
    sections = _read_sections(src)
    by_kind = {}
    for sec in sections:
        by_kind.setdefault(sec.kind, []).append(sec)
    last_line = max([1] + [v.line for s in sections for v in s.values.values()] + [s.line for s in sections])
    for kind in ("poset", "grid"):
        if kind not in by_kind:
            raise ModelSyntaxError(f"missing [{kind}] section", last_line, 1, origin)
    delta = _build_poset(by_kind["poset"][0], origin)
    lattice = downset_lattice(delta)

    names = None
    if "states" in by_kind:
        sec = by_kind["states"][0]
        nv = _require(sec, "names", origin)
        words = _words(nv, origin)
        if len(words) != len(lattice):
            raise ModelSyntaxError(
                f"need {len(lattice)} state names, found {len(words)}", nv.line, nv.col, origin
            )
        seen = set()
        for w, c in words:
            if w.isdigit() or not _WORD.fullmatch(w):
                raise ModelSyntaxError(f"bad state name {w!r}", nv.line, c, origin)
            if w in seen:
                raise ModelSyntaxError(f"duplicate state name {w!r}", nv.line, c, origin)
            seen.add(w)
        names = tuple(w for w, _ in words)

    grid = by_kind["grid"][0]
    tv = _require(grid, "topology", origin)
    if tv.text not in TOPOLOGIES:
        raise ModelSyntaxError(f"topology must be line or torus, found {tv.text!r}",
                               tv.line, tv.col, origin)
    sv = _require(grid, "size", origin)
    size = _parse_int(sv, sv.text, sv.col, origin)
    if size < 1:
        raise ModelSyntaxError("grid size must be positive", sv.line, sv.col, origin)

    resolve = _StateResolver(len(lattice), names)
    families = [
        _build_family(sec, lattice, resolve, size, origin) for sec in by_kind.get("map", [])
    ]
    try:
        return build_model(delta, size, tv.text, families, names)
    except NotAdditive as exc:
        sec = next(s for s in by_kind["map"] if s.name == exc.family)
        exc.line = sec.line
        raise


def load_model(path: Union[str, Path]) -> Model:
    path = Path(path)
    return parse_model(ModelSpecSource(path.read_text(encoding="utf-8"), str(path)))


# ---------------------------------------------------------------------------
# canonical printing


def _fmt_rate(r: float) -> str:
    text = repr(float(r))
    return text[:-2] if text.endswith(".0") else text


def format_model(model: Model) -> str:
    """Canonical text for ``model``; parsing it gives an equal Model."""
    delta = model.delta
    names = model.state_names

    def st(a):
        return names[a] if names else str(a)

    def tup(xs, arity):
        inner = ",".join(st(a) for a in xs)
        return inner if arity == 1 else f"({inner})"

    out = [f"version = {VERSION}", "", "[poset]"]
    out.append("elements = " + " ".join(str(e) for e in delta.elements))
    covers = sorted(delta.covers())
    if covers:
        out.append("covers = " + " ".join(f"{delta.elements[a]}<{delta.elements[b]}" for a, b in covers))
    if names:
        out += ["", "[states]", "names = " + " ".join(names)]
    out += ["", "[grid]", f"topology = {model.topology}", f"size = {model.size}"]
    for fam in model.families:
        k = fam.arity
        out += ["", f"[map {fam.name}]", f"arity = {k}",
                "offsets = " + " ".join(str(d) for d in fam.offsets)]
        rows = sorted(fam.template.changed_rows().items())
        if rows:
            out.append("table = " + ", ".join(f"{tup(x, k)}->{tup(y, k)}" for x, y in rows))
        if fam.rate is not None:
            out.append(f"rate = {_fmt_rate(fam.rate)}")
        else:
            entries = " ".join(
                f"({','.join(str(s) for s in sites)}):{_fmt_rate(r)}" for sites, r in fam.rate_table
            )
            out.append(f"rate_table = {entries}")
    return "\n".join(out) + "\n"


__all__ = ["ModelSpecSource", "parse_model", "load_model", "format_model", "VERSION"]
