"""Additive local maps on S^Gamma and connection-set maps on the extended grid.

A window configuration is a tuple of state indices, one per window site.
Tables are indexed by the mixed-radix code ``sum(x[p] * |S|**p)``.

Subsets of the extended grid Lambda x Delta are Python ints used as bitsets;
extended site ``(i, sigma)`` is bit ``i * |Delta| + sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Sequence

from .errors import GridMismatch, NotAdditive, TooLarge
from .lattice import Lattice, downset_lattice, order_dual

ENUMERATION_GUARD = 10**6


class ExtendedSite(NamedTuple):
    site: int
    level: int

    def __str__(self) -> str:
        return f"({self.site},{self.level})"


# ---------------------------------------------------------------------------
# window codes


def _radix(lattice: Lattice, k: int) -> int:
    size = len(lattice) ** k
    if size > ENUMERATION_GUARD:
        raise TooLarge(f"|S|^|window| = {size} exceeds guard {ENUMERATION_GUARD}")
    return size


def encode_window(values: Sequence[int], q: int) -> int:
    code = 0
    for v in reversed(values):
        code = code * q + v
    return code


def decode_window(code: int, q: int, k: int) -> tuple:
    out = []
    for _ in range(k):
        code, r = divmod(code, q)
        out.append(r)
    return tuple(out)


@lru_cache(maxsize=None)
def dual_lattice(lattice: Lattice) -> Lattice:
    """S' realised as the down-sets of the order dual of Delta (= up-sets of Delta)."""
    return downset_lattice(order_dual(lattice.delta))


@lru_cache(maxsize=None)
def complement_indices(lattice: Lattice) -> tuple:
    """``c[a]`` is the index in S' of the complement of state ``a`` of S (and vice versa)."""
    other = dual_lattice(lattice)
    full = (1 << lattice.depth) - 1
    return tuple(other.index_of_mask(full ^ m) for m in lattice.masks)


def encode(values: Sequence[int], lattice: Lattice) -> int:
    """Extended-grid bitset of a configuration (down-set for S, up-set for S')."""
    d = lattice.depth
    bits = 0
    masks = lattice.masks
    for i, v in enumerate(values):
        bits |= masks[v] << (i * d)
    return bits


def decode(bits: int, lattice: Lattice, n: int) -> tuple:
    """Inverse of :func:`encode`; raises ValueError if ``bits`` is not a state."""
    d = lattice.depth
    full = (1 << d) - 1
    out = []
    for i in range(n):
        mask = (bits >> (i * d)) & full
        try:
            out.append(lattice.index_of_mask(mask))
        except KeyError:
            raise ValueError(f"site {i}: levels {mask:b} do not form a state") from None
    return tuple(out)


def bits_to_sites(bits: int, depth: int) -> frozenset:
    out = []
    k = 0
    while bits:
        if bits & 1:
            out.append(ExtendedSite(*divmod(k, depth)))
        bits >>= 1
        k += 1
    return frozenset(out)


def sites_to_bits(points: Iterable, depth: int) -> int:
    bits = 0
    for i, s in points:
        bits |= 1 << (i * depth + s)
    return bits


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class Configuration:
    """An assignment site -> state index over the grid ``0..n-1``."""

    lattice: Lattice
    values: tuple

    def __post_init__(self):
        q = len(self.lattice)
        if any(not 0 <= v < q for v in self.values):
            raise ValueError(f"values {self.values} outside 0..{q - 1}")

    @classmethod
    def zeros(cls, lattice: Lattice, n: int) -> "Configuration":
        return cls(lattice, (lattice.bottom,) * n)

    @classmethod
    def unit(cls, lattice: Lattice, n: int, i: int, a: int) -> "Configuration":
        """e^a_i: state ``a`` at site ``i``, bottom elsewhere."""
        vals = [lattice.bottom] * n
        vals[i] = a
        return cls(lattice, tuple(vals))

    @classmethod
    def from_bits(cls, lattice: Lattice, bits: int, n: int) -> "Configuration":
        return cls(lattice, decode(bits, lattice, n))

    def __len__(self) -> int:
        return len(self.values)

    def to_bits(self) -> int:
        return encode(self.values, self.lattice)

    def _same_grid(self, other: "Configuration"):
        if len(other) != len(self) or other.lattice != self.lattice:
            raise GridMismatch("configurations live on different grids or lattices")

    def join(self, other: "Configuration") -> "Configuration":
        self._same_grid(other)
        j = self.lattice.join
        return Configuration(self.lattice, tuple(j[a][b] for a, b in zip(self.values, other.values)))

    def meet(self, other: "Configuration") -> "Configuration":
        self._same_grid(other)
        m = self.lattice.meet
        return Configuration(self.lattice, tuple(m[a][b] for a, b in zip(self.values, other.values)))

    def le(self, other: "Configuration") -> bool:
        self._same_grid(other)
        return all(self.lattice.le[a][b] for a, b in zip(self.values, other.values))


def phi(x: Configuration, y: Configuration) -> int:
    """1{x <= y'} for x over S and y over S'."""
    if len(x) != len(y):
        raise GridMismatch("x and y have different grids")
    if y.lattice != dual_lattice(x.lattice):
        raise GridMismatch("y must take values in the dual lattice of x")
    return int(x.to_bits() & y.to_bits() == 0)


def psi(x: Configuration, y: Configuration) -> int:
    """1{x meets y} on the extended grid; x a down-set, y an up-set."""
    return 1 - phi(x, y)


# ---------------------------------------------------------------------------
# local functions


@dataclass(frozen=True)
class LocalFunction:
    """A map S^window -> S^window stored as an explicit table of codes."""

    lattice: Lattice
    window: tuple
    table: tuple

    def __post_init__(self):
        if len(set(self.window)) != len(self.window):
            raise ValueError(f"window sites must be distinct: {self.window}")
        if len(self.table) != len(self.lattice) ** len(self.window):
            raise ValueError("table size does not match |S|^|window|")

    @classmethod
    def from_rule(cls, lattice: Lattice, window: Sequence, rule: Callable) -> "LocalFunction":
        window = tuple(window)
        q, k = len(lattice), len(window)
        size = _radix(lattice, k)
        table = tuple(
            encode_window(tuple(rule(decode_window(c, q, k))), q) for c in range(size)
        )
        return cls(lattice, window, table)

    @classmethod
    def from_rows(cls, lattice: Lattice, window: Sequence, rows: Mapping) -> "LocalFunction":
        """Rows map input tuples to output tuples; unlisted inputs are fixed."""
        rows = {tuple(k): tuple(v) for k, v in rows.items()}
        return cls.from_rule(lattice, window, lambda x: rows.get(x, x))

    @classmethod
    def identity(cls, lattice: Lattice, window: Sequence) -> "LocalFunction":
        return cls.from_rule(lattice, window, lambda x: x)

    @classmethod
    def zero(cls, lattice: Lattice, window: Sequence) -> "LocalFunction":
        return cls.from_rule(lattice, window, lambda x: (lattice.bottom,) * len(x))

    @property
    def q(self) -> int:
        return len(self.lattice)

    def __call__(self, values: Sequence[int]) -> tuple:
        k = len(self.window)
        return decode_window(self.table[encode_window(values, self.q)], self.q, k)

    def inputs(self):
        k = len(self.window)
        return (decode_window(c, self.q, k) for c in range(len(self.table)))

    def changed_rows(self) -> dict:
        """The non-identity rows of the table, keyed by input tuple, in code order."""
        k = len(self.window)
        out = {}
        for c, img in enumerate(self.table):
            if img != c:
                out[decode_window(c, self.q, k)] = decode_window(img, self.q, k)
        return out

    def relabel(self, window: Sequence) -> "LocalFunction":
        return LocalFunction(self.lattice, tuple(window), self.table)

    def unit_input(self, p: int, a: int) -> tuple:
        x = [self.lattice.bottom] * len(self.window)
        x[p] = a
        return tuple(x)

    def position(self, site) -> Optional[int]:
        try:
            return self.window.index(site)
        except ValueError:
            return None


def _join_tuples(lattice: Lattice, x: Sequence[int], y: Sequence[int]) -> tuple:
    j = lattice.join
    return tuple(j[a][b] for a, b in zip(x, y))


def additivity_witness(f: LocalFunction):
    """None if ``f`` is additive, else ``"zero"`` or a failing pair ``(x, y)``.

    Uses that f is additive iff f(0) = 0, each single-site restriction
    a -> f(e^a_p) preserves joins, and f(x) is the join of f(e^{x(p)}_p).
    """
    lat = f.lattice
    k = len(f.window)
    _radix(lat, k)
    zero = (lat.bottom,) * k
    if f(zero) != zero:
        return "zero"
    q = f.q
    for p in range(k):
        for a in range(q):
            for b in range(a + 1, q):
                ea, eb = f.unit_input(p, a), f.unit_input(p, b)
                if f(_join_tuples(lat, ea, eb)) != _join_tuples(lat, f(ea), f(eb)):
                    return (ea, eb)
    units = [[f(f.unit_input(p, a)) for a in range(q)] for p in range(k)]
    for x in f.inputs():
        acc = zero
        for p in range(k):
            acc = _join_tuples(lat, acc, units[p][x[p]])
        if f(x) != acc:
            return _split_witness(f, x)
    return None


def _split_witness(f: LocalFunction, x: tuple):
    # f(x) differs from the join of its single-site parts: peel sites off
    # until the split x = e_p v rest itself violates additivity.
    lat = f.lattice
    x = list(x)
    for p in range(len(x)):
        if x[p] == lat.bottom:
            continue
        head = f.unit_input(p, x[p])
        rest = list(x)
        rest[p] = lat.bottom
        whole = tuple(x)
        if f(whole) != _join_tuples(lat, f(head), f(tuple(rest))):
            return (head, tuple(rest))
        x = rest
    raise AssertionError("decomposition failure without witness")


def check_additive(f: LocalFunction) -> bool:
    return additivity_witness(f) is None


def require_additive(f: LocalFunction, family=None) -> None:
    w = additivity_witness(f)
    if w is not None:
        raise NotAdditive(w, family)


def matrix_element(m: LocalFunction, i, j) -> tuple:
    """The single-site map a -> m(e^a_i)(j) as a tuple indexed by a.

    ``i`` and ``j`` are grid sites; sites off the window act as identity.
    """
    lat = m.lattice
    pi, pj = m.position(i), m.position(j)
    q = len(lat)
    if pi is None or pj is None:
        if i == j:
            return tuple(range(q))
        return (lat.bottom,) * q
    return tuple(m(m.unit_input(pi, a))[pj] for a in range(q))


def is_zero_map(lattice: Lattice, f: Sequence[int]) -> bool:
    return all(v == lattice.bottom for v in f)


def is_identity_map(f: Sequence[int]) -> bool:
    return all(v == a for a, v in enumerate(f))


def relevant_pairs(m: LocalFunction) -> frozenset:
    lat = m.lattice
    return frozenset(
        (i, j)
        for i in m.window
        for j in m.window
        if matrix_element(m, i, j)[lat.top] != lat.bottom
    )


def changed_sites(m: LocalFunction) -> frozenset:
    lat = m.lattice
    out = set()
    for j in m.window:
        if not is_identity_map(matrix_element(m, j, j)):
            out.add(j)
        elif any(
            not is_zero_map(lat, matrix_element(m, i, j)) for i in m.window if i != j
        ):
            out.add(j)
    return frozenset(out)


def dual_local(m: LocalFunction) -> LocalFunction:
    """The unique map on (S')^window with phi(m(x), y) = phi(x, m^(y)).

    m^(y)' is the greatest z with m(z) <= y'. Since m(z)(j) is the join of
    m[i,j](z(i)), the condition splits per source site i.
    """
    lat = m.lattice
    dlat = dual_lattice(lat)
    comp = complement_indices(lat)  # S -> S'
    back = complement_indices(dlat)  # S' -> S
    k = len(m.window)
    q = len(lat)
    mats = [[matrix_element(m, i, j) for j in m.window] for i in m.window]
    # best[p][pj][b]: greatest a with mats[p][pj](a) <= b, b in S
    le, join = lat.le, lat.join

    def greatest_below(p, bound):
        acc = lat.bottom
        for a in range(q):
            if all(le[mats[p][pj][a]][bound[pj]] for pj in range(k)):
                acc = join[acc][a]
        return acc

    def rule(y):
        bound = tuple(back[v] for v in y)
        return tuple(comp[greatest_below(p, bound)] for p in range(k))

    return LocalFunction.from_rule(dlat, m.window, rule)


# ---------------------------------------------------------------------------
# connection-set maps on the extended grid


@dataclass(frozen=True)
class ArrowBlockMap:
    """Countably additive map on subsets of the extended grid.

    Its connection set is the arrows plus the diagonal at every extended
    site that is not blocked.
    """

    arrows: frozenset = frozenset()
    blocks: frozenset = frozenset()

    def __post_init__(self):
        arrows = frozenset((ExtendedSite(*a), ExtendedSite(*b)) for a, b in self.arrows)
        blocks = frozenset(ExtendedSite(*b) for b in self.blocks)
        for a, b in arrows:
            if a == b:
                raise ValueError(f"self-loop arrow at {a}")
        object.__setattr__(self, "arrows", arrows)
        object.__setattr__(self, "blocks", blocks)

    def apply(self, x: Iterable) -> frozenset:
        x = frozenset(ExtendedSite(*p) for p in x)
        out = set(x - self.blocks)
        out.update(b for a, b in self.arrows if a in x)
        return frozenset(out)

    def transpose(self) -> "ArrowBlockMap":
        return ArrowBlockMap(frozenset((b, a) for a, b in self.arrows), self.blocks)

    def sites(self) -> frozenset:
        pts = {p.site for p in self.blocks}
        for a, b in self.arrows:
            pts.add(a.site)
            pts.add(b.site)
        return frozenset(pts)

    def connection_set(self, points: Iterable) -> frozenset:
        """M restricted to ``points`` (the diagonal is only listed there)."""
        points = [ExtendedSite(*p) for p in points]
        diag = {(p, p) for p in points if p not in self.blocks}
        return frozenset(diag | set(self.arrows))

    @classmethod
    def from_connection_set(cls, relation: Iterable, points: Iterable) -> "ArrowBlockMap":
        relation = {(ExtendedSite(*a), ExtendedSite(*b)) for a, b in relation}
        arrows = frozenset((a, b) for a, b in relation if a != b)
        blocks = frozenset(ExtendedSite(*p) for p in points) - {a for a, b in relation if a == b}
        return cls(arrows, blocks)

    def relabel(self, mapping: Mapping) -> "ArrowBlockMap":
        def mv(p):
            return ExtendedSite(mapping[p.site], p.level)

        return ArrowBlockMap(
            frozenset((mv(a), mv(b)) for a, b in self.arrows),
            frozenset(mv(p) for p in self.blocks),
        )

    def relabel_levels(self, mapping: Mapping) -> "ArrowBlockMap":
        def mv(p):
            return ExtendedSite(p.site, mapping[p.level])

        return ArrowBlockMap(
            frozenset((mv(a), mv(b)) for a, b in self.arrows),
            frozenset(mv(p) for p in self.blocks),
        )

    def render_text(self, site_names: Optional[Sequence] = None) -> str:
        def fmt(p):
            s = site_names[p.site] if site_names is not None else p.site
            return f"({s},{p.level})"

        lines = [f"{fmt(a)} -> {fmt(b)}" for a, b in sorted(self.arrows)]
        lines += [f"block {fmt(p)}" for p in sorted(self.blocks)]
        return "\n".join(lines)

    def compile(self, depth: int) -> "CompiledMap":
        block_bits = sites_to_bits(self.blocks, depth)
        arrows = tuple(
            sorted(
                (a.site * depth + a.level, b.site * depth + b.level) for a, b in self.arrows
            )
        )
        return CompiledMap(block_bits, arrows)


@dataclass(frozen=True)
class CompiledMap:
    """Bitset form of an ArrowBlockMap: clear blocked bits, then follow arrows."""

    block_bits: int
    arrows: tuple  # ((src_bit, tgt_bit), ...)

    def __call__(self, x: int) -> int:
        out = x & ~self.block_bits
        for a, b in self.arrows:
            if x >> a & 1:
                out |= 1 << b
        return out

    def transpose(self) -> "CompiledMap":
        return CompiledMap(self.block_bits, tuple(sorted((b, a) for a, b in self.arrows)))


# ---------------------------------------------------------------------------
# rate conditions


@dataclass(frozen=True)
class RateReport:
    """Suprema over sites of the three summability sums.

    ``diagonal``: sum of r_m over m with m[i,i] != id;
    ``inflow``: sum of r_m * #{j != i: m[j,i] != o};
    ``outflow``: sum of r_m * #{j != i: m[i,j] != o}.
    """

    diagonal: float
    inflow: float
    outflow: float

    def as_tuple(self) -> tuple:
        return (self.diagonal, self.inflow, self.outflow)


def check_rate_conditions(instances: Iterable, sites: Iterable) -> RateReport:
    """``instances`` yields ``(LocalFunction placed on grid sites, rate)`` pairs."""
    sites = list(sites)
    diag = dict.fromkeys(sites, 0.0)
    inflow = dict.fromkeys(sites, 0.0)
    outflow = dict.fromkeys(sites, 0.0)
    for m, rate in instances:
        if rate == 0:
            continue
        lat = m.lattice
        for i in m.window:
            if not is_identity_map(matrix_element(m, i, i)):
                diag[i] += rate
            for j in m.window:
                if i != j and not is_zero_map(lat, matrix_element(m, i, j)):
                    outflow[i] += rate
                    inflow[j] += rate
    return RateReport(
        max(diag.values(), default=0.0),
        max(inflow.values(), default=0.0),
        max(outflow.values(), default=0.0),
    )


def all_window_inputs(lattice: Lattice, k: int):
    return product(range(len(lattice)), repeat=k)
