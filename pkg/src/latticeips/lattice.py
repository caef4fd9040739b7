"""Finite posets, finite (distributive) lattices and Birkhoff's representation.

Elements are addressed by index internally; labels are opaque hashables
kept only for presentation and lookup. Down-sets of a poset are stored as
bitmasks over its element indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Hashable, Iterable, Optional, Sequence

from .errors import (
    CycleError,
    DuplicateElement,
    NotALattice,
    NotDistributive,
    TooLarge,
    UnknownElement,
)

MAX_DOWNSET_POSET = 20
MAX_ISO_SEARCH = 8


def _iter_bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


@dataclass(frozen=True)
class Poset:
    """A finite partial order.

    ``le[a][b]`` is True iff element ``a`` is below or equal to element ``b``
    (indices into ``elements``).
    """

    elements: tuple
    le: tuple  # tuple[tuple[bool, ...], ...]

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, label: Hashable) -> int:
        try:
            return self.elements.index(label)
        except ValueError:
            raise UnknownElement(f"{label!r} is not an element of the poset") from None

    def lt(self, a: int, b: int) -> bool:
        return a != b and self.le[a][b]

    def down_mask(self, a: int) -> int:
        """Bitmask of the principal down-set of element ``a``."""
        return sum(1 << b for b in range(len(self)) if self.le[b][a])

    def up_mask(self, a: int) -> int:
        return sum(1 << b for b in range(len(self)) if self.le[a][b])

    def is_downset(self, mask: int) -> bool:
        return all((mask | self.down_mask(a)) == mask for a in _iter_bits(mask))

    def is_upset(self, mask: int) -> bool:
        return all((mask | self.up_mask(a)) == mask for a in _iter_bits(mask))

    def covers(self) -> list[tuple[int, int]]:
        """Cover pairs ``(a, b)`` with ``a < b`` and nothing strictly between."""
        n = len(self)
        out = []
        for a in range(n):
            for b in range(n):
                if self.lt(a, b) and not any(
                    self.lt(a, c) and self.lt(c, b) for c in range(n)
                ):
                    out.append((a, b))
        return out

    def relabel(self, labels: Sequence) -> "Poset":
        return Poset(tuple(labels), self.le)


def _closure(n: int, pairs: Iterable[tuple[int, int]]) -> list[list[bool]]:
    le = [[i == j for j in range(n)] for i in range(n)]
    for a, b in pairs:
        le[a][b] = True
    for k in range(n):
        for i in range(n):
            if le[i][k]:
                row_k = le[k]
                row_i = le[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return le


def validate_poset(elements: Iterable, pairs: Iterable[tuple] = ()) -> Poset:
    """Build a Poset from labels and ``(a, b)`` pairs meaning ``a <= b``.

    Pairs may be cover relations or any generating set; the stored order is
    their reflexive-transitive closure.
    """
    elements = tuple(elements)
    seen = set()
    for e in elements:
        if e in seen:
            raise DuplicateElement(f"duplicate element {e!r}")
        seen.add(e)
    idx = {e: i for i, e in enumerate(elements)}
    int_pairs = []
    for a, b in pairs:
        for v in (a, b):
            if v not in idx:
                raise UnknownElement(f"{v!r} is not an element of the poset")
        int_pairs.append((idx[a], idx[b]))
    n = len(elements)
    le = _closure(n, int_pairs)
    for i in range(n):
        for j in range(i + 1, n):
            if le[i][j] and le[j][i]:
                raise CycleError(
                    f"{elements[i]!r} <= {elements[j]!r} <= {elements[i]!r}: order has a cycle"
                )
    return Poset(elements, tuple(tuple(r) for r in le))


def order_dual(poset: Poset) -> Poset:
    n = len(poset)
    return Poset(
        poset.elements,
        tuple(tuple(poset.le[j][i] for j in range(n)) for i in range(n)),
    )


def self_dual_iso(poset: Poset) -> Optional[dict]:
    """Return an order-reversing bijection of ``poset`` (as a label dict), or None."""
    n = len(poset)
    if n > MAX_ISO_SEARCH:
        raise TooLarge(f"self-duality search limited to {MAX_ISO_SEARCH} elements, got {n}")
    for perm in permutations(range(n)):
        if all(
            poset.le[a][b] == poset.le[perm[b]][perm[a]]
            for a in range(n)
            for b in range(n)
        ):
            return {poset.elements[a]: poset.elements[perm[a]] for a in range(n)}
    return None


def poset_isomorphism(p: Poset, q: Poset) -> Optional[tuple[int, ...]]:
    """Index map ``f`` with ``p.le[a][b] == q.le[f[a]][f[b]]``, or None."""
    n = len(p)
    if len(q) != n:
        return None
    # cheap invariant: sorted (down-size, up-size) profiles must agree
    def profile(r):
        return sorted(
            (sum(r.le[b][a] for b in range(n)), sum(r.le[a][b] for b in range(n)))
            for a in range(n)
        )

    if profile(p) != profile(q):
        return None
    for perm in permutations(range(n)):
        if all(p.le[a][b] == q.le[perm[a]][perm[b]] for a in range(n) for b in range(n)):
            return perm
    return None


@dataclass(frozen=True)
class Lattice:
    """A finite lattice with explicit meet/join tables.

    When built by :func:`downset_lattice`, ``delta`` is the underlying poset
    and ``masks[k]`` is the down-set (bitmask over ``delta``) representing
    element ``k``.
    """

    elements: tuple
    le: tuple
    meet: tuple
    join: tuple
    bottom: int
    top: int
    delta: Optional[Poset] = None
    masks: Optional[tuple] = None
    _mask_index: dict = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def index(self, label: Hashable) -> int:
        try:
            return self.elements.index(label)
        except ValueError:
            raise UnknownElement(f"{label!r} is not an element of the lattice") from None

    def index_of_mask(self, mask: int) -> int:
        return self._mask_index[mask]

    @property
    def depth(self) -> int:
        """Number of levels of the extended grid per site (|delta|)."""
        return len(self.delta)

    def principal(self, sigma: int) -> int:
        """State index of the principal down-set of delta element ``sigma``."""
        return self._mask_index[self.delta.down_mask(sigma)]

    def as_poset(self) -> Poset:
        return Poset(self.elements, self.le)


def _tables_from_order(n: int, le) -> tuple[tuple, tuple]:
    meet = [[0] * n for _ in range(n)]
    join = [[0] * n for _ in range(n)]
    for a in range(n):
        for b in range(n):
            lower = [c for c in range(n) if le[c][a] and le[c][b]]
            upper = [c for c in range(n) if le[a][c] and le[b][c]]
            glb = [c for c in lower if all(le[d][c] for d in lower)]
            lub = [c for c in upper if all(le[c][d] for d in upper)]
            if len(glb) != 1 or len(lub) != 1:
                raise NotALattice(f"elements {a} and {b} lack a unique meet or join")
            meet[a][b] = glb[0]
            join[a][b] = lub[0]
    return tuple(map(tuple, meet)), tuple(map(tuple, join))


def lattice_from_order(elements: Iterable, pairs: Iterable[tuple] = ()) -> Lattice:
    """Build a Lattice from an order given as generating ``a <= b`` pairs."""
    p = validate_poset(elements, pairs)
    n = len(p)
    if n == 0:
        raise NotALattice("a lattice needs at least one element")
    meet, join = _tables_from_order(n, p.le)
    bottom = next(a for a in range(n) if all(p.le[a][b] for b in range(n)))
    top = next(a for a in range(n) if all(p.le[b][a] for b in range(n)))
    return Lattice(p.elements, p.le, meet, join, bottom, top)


def downset_lattice(delta: Poset) -> Lattice:
    """The lattice of down-sets of ``delta`` ordered by inclusion.

    Elements are ``frozenset``s of delta labels, in canonical order:
    by cardinality, then lexicographically by sorted member indices.
    """
    n = len(delta)
    if n > MAX_DOWNSET_POSET:
        raise TooLarge(f"down-set enumeration limited to |delta| <= {MAX_DOWNSET_POSET}")
    # grow down-sets by adding minimal elements of the complement
    found = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for mask in frontier:
            for a in range(n):
                if not mask >> a & 1 and (delta.down_mask(a) & ~(1 << a)) & ~mask == 0:
                    new = mask | (1 << a)
                    if new not in found:
                        found.add(new)
                        nxt.append(new)
        frontier = nxt
    masks = sorted(found, key=lambda m: (bin(m).count("1"), list(_iter_bits(m))))
    k = len(masks)
    index = {m: i for i, m in enumerate(masks)}
    le = tuple(tuple((masks[a] & ~masks[b]) == 0 for b in range(k)) for a in range(k))
    meet = tuple(tuple(index[masks[a] & masks[b]] for b in range(k)) for a in range(k))
    join = tuple(tuple(index[masks[a] | masks[b]] for b in range(k)) for a in range(k))
    labels = tuple(frozenset(delta.elements[i] for i in _iter_bits(m)) for m in masks)
    return Lattice(
        labels, le, meet, join, 0, k - 1, delta=delta, masks=tuple(masks), _mask_index=index
    )


def is_distributive(lat: Lattice) -> bool:
    n = len(lat)
    m, j = lat.meet, lat.join
    return all(
        m[a][j[b][c]] == j[m[a][b]][m[a][c]]
        for a in range(n)
        for b in range(n)
        for c in range(n)
    )


def lower_covers(lat: Lattice, a: int) -> list[int]:
    n = len(lat)
    below = [b for b in range(n) if b != a and lat.le[b][a]]
    return [b for b in below if not any(c != b and lat.le[b][c] for c in below)]


def join_irreducibles(lat: Lattice) -> Poset:
    """Poset of join-irreducible elements (exactly one lower cover), in lattice order.

    Raises NotDistributive unless ``a -> {irreducibles <= a}`` is an order
    isomorphism onto the down-sets of the result.
    """
    if not is_distributive(lat):
        raise NotDistributive("distributive law fails")
    n = len(lat)
    irr = [a for a in range(n) if a != lat.bottom and len(lower_covers(lat, a)) == 1]
    p = Poset(
        tuple(lat.elements[a] for a in irr),
        tuple(tuple(lat.le[a][b] for b in irr) for a in irr),
    )
    images = [sum(1 << k for k, b in enumerate(irr) if lat.le[b][a]) for a in range(n)]
    if len(set(images)) != n or not all(p.is_downset(m) for m in images):
        raise NotDistributive("Birkhoff map is not a bijection onto down-sets")
    if len(downset_lattice(p)) != n:
        raise NotDistributive("Birkhoff map is not onto")
    return p


def birkhoff_map(lat: Lattice, irr: Poset) -> tuple[int, ...]:
    """For each element of ``lat``, the index in ``downset_lattice(irr)`` of its image."""
    dl = downset_lattice(irr)
    irr_idx = [lat.index(e) for e in irr.elements]
    out = []
    for a in range(len(lat)):
        mask = sum(1 << k for k, b in enumerate(irr_idx) if lat.le[b][a])
        out.append(dl.index_of_mask(mask))
    return tuple(out)


def lattices_isomorphic_via(lat: Lattice, other: Lattice, f: Sequence[int]) -> bool:
    n = len(lat)
    return (
        len(other) == n
        and len(set(f)) == n
        and all(lat.le[a][b] == other.le[f[a]][f[b]] for a in range(n) for b in range(n))
    )


def chain(n: int) -> Poset:
    """The ``n``-element chain 0 < 1 < ... < n-1 with integer labels."""
    return validate_poset(range(n), [(i, i + 1) for i in range(n - 1)])


def antichain(n: int) -> Poset:
    return validate_poset(range(n), [])
