"""Minimal and maximal additive extensions of local maps to the extended grid.

A local map m on S^window with S = down-sets of Delta is viewed as a map on
down-sets of window x Delta. Its extensions are connection-set maps on all
subsets; the minimal one that also extends the dual of m has connection set
N minus (N_down intersected with N_up).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import TooLarge
from .maps import (
    ArrowBlockMap,
    ExtendedSite,
    LocalFunction,
    dual_local,
    encode,
    require_additive,
)

DIRECT_CHECK_GUARD = 10**5


@dataclass(frozen=True)
class ExtensionTriple:
    points: tuple
    N: frozenset
    N_down: frozenset
    N_up: frozenset

    def off_diagonal(self) -> frozenset:
        return frozenset((a, b) for a, b in self.N if a != b)


def extend_to(m: LocalFunction, sites: Iterable) -> LocalFunction:
    """``m`` on the larger window ``sites`` (identity on the added sites)."""
    sites = tuple(dict.fromkeys(tuple(m.window) + tuple(sites)))
    if sites == m.window:
        return m
    pos = [sites.index(s) for s in m.window]

    def rule(x):
        out = list(x)
        img = m(tuple(x[p] for p in pos))
        for p, v in zip(pos, img):
            out[p] = v
        return tuple(out)

    return LocalFunction.from_rule(m.lattice, sites, rule)


def _points(lattice, sites) -> tuple:
    return tuple(ExtendedSite(i, s) for i in sites for s in range(lattice.depth))


def extension_triple(m: LocalFunction, sites: Optional[Iterable] = None) -> ExtensionTriple:
    """N, N_down and N_up of ``m`` over ``sites`` (default: the window).

    Sites outside the window contribute through the identity map.
    """
    lat = m.lattice
    delta = lat.delta
    d = lat.depth
    sites = tuple(m.window) if sites is None else tuple(dict.fromkeys(sites))
    N = set()
    for i in sites:
        p = m.position(i)
        for sigma in range(d):
            src = ExtendedSite(i, sigma)
            if p is None:
                for tau in range(d):
                    if delta.le[tau][sigma]:
                        N.add((src, ExtendedSite(i, tau)))
                continue
            img = m(m.unit_input(p, lat.principal(sigma)))
            for pj, j in enumerate(m.window):
                mask = lat.masks[img[pj]]
                for tau in range(d):
                    if mask >> tau & 1:
                        N.add((src, ExtendedSite(j, tau)))
    N = frozenset(N)
    le = delta.le
    N_down = frozenset(
        (a, b)
        for a, b in N
        if any(
            (ExtendedSite(a.site, s), b) in N
            for s in range(d)
            if s != a.level and le[s][a.level]
        )
    )
    N_up = frozenset(
        (a, b)
        for a, b in N
        if any(
            (a, ExtendedSite(b.site, t)) in N
            for t in range(d)
            if t != b.level and le[b.level][t]
        )
    )
    return ExtensionTriple(_points(lat, sites), N, N_down, N_up)


def minimal_extension(m: LocalFunction, family=None) -> ArrowBlockMap:
    """Smallest connection-set map extending ``m`` whose transpose extends its dual."""
    require_additive(m, family)
    tri = extension_triple(m)
    return ArrowBlockMap.from_connection_set(tri.N - (tri.N_down & tri.N_up), tri.points)


def maximal_extension(m: LocalFunction, sites: Iterable) -> ArrowBlockMap:
    """Largest extension of ``m``, materialised over the full list of grid ``sites``.

    Generally nonlocal: off-window sites acquire arrows (j,s) -> (j,t) for t < s.
    """
    require_additive(m)
    sites = tuple(dict.fromkeys(tuple(sites) + tuple(m.window)))
    tri = extension_triple(m, sites)
    return ArrowBlockMap.from_connection_set(tri.N, tri.points)


def _sandwich(relation: frozenset, tri: ExtensionTriple) -> tuple[bool, bool]:
    inside = relation <= tri.N
    return (
        inside and (tri.N - tri.N_down) <= relation,
        inside and (tri.N - tri.N_up) <= relation,
    )


def _involved_sites(A: ArrowBlockMap, m: LocalFunction) -> tuple:
    return tuple(dict.fromkeys(tuple(m.window) + tuple(sorted(A.sites()))))


def restricts_to(A: ArrowBlockMap, m: LocalFunction) -> bool:
    """Direct check that A(x) = m(x) for every down-set x of the involved sites."""
    sites = _involved_sites(A, m)
    full = extend_to(m, sites)
    return _direct_agree(A, full, sites, transpose=False)


def dual_restricts_to(A: ArrowBlockMap, m: LocalFunction) -> bool:
    """Direct check that transpose(A)(y) = dual(m)(y) for every up-set y."""
    sites = _involved_sites(A, m)
    full = dual_local(extend_to(m, sites))
    return _direct_agree(A, full, sites, transpose=True)


def _direct_agree(A, f: LocalFunction, sites, transpose: bool) -> bool:
    if len(f.table) > DIRECT_CHECK_GUARD:
        raise TooLarge(f"direct extension check over {len(f.table)} configurations")
    lat = f.lattice
    d = lat.depth
    pos = {s: k for k, s in enumerate(sites)}
    compiled = A.relabel(pos).compile(d)
    if transpose:
        compiled = compiled.transpose()
    for x in f.inputs():
        if compiled(encode(x, lat)) != encode(f(x), lat):
            return False
    return True


def is_valid_extension(
    A: ArrowBlockMap, m: LocalFunction, cross_check: bool = True
) -> tuple[bool, bool]:
    """(A extends m, transpose(A) extends the dual of m), via the sandwich conditions.

    With ``cross_check`` the answer is re-derived by direct evaluation when
    the enumeration is small enough; a disagreement raises AssertionError.
    """
    sites = _involved_sites(A, m)
    tri = extension_triple(m, sites)
    result = _sandwich(A.connection_set(tri.points), tri)
    if cross_check and len(m.lattice) ** len(sites) <= DIRECT_CHECK_GUARD:
        direct = (restricts_to(A, m), dual_restricts_to(A, m))
        if direct != result:
            raise AssertionError(f"sandwich test {result} disagrees with direct {direct}")
    return result


def minimality_check(A: ArrowBlockMap, m: LocalFunction) -> bool:
    """True iff dropping any single pair of A's connection set breaks an extension."""
    sites = _involved_sites(A, m)
    tri = extension_triple(m, sites)
    M = A.connection_set(tri.points)
    if _sandwich(M, tri) != (True, True):
        return False
    return all(_sandwich(M - {p}, tri) != (True, True) for p in M)


__all__ = [
    "ExtensionTriple",
    "extension_triple",
    "minimal_extension",
    "maximal_extension",
    "is_valid_extension",
    "minimality_check",
    "restricts_to",
    "dual_restricts_to",
    "extend_to",
]
