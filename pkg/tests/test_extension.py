import pytest
from hypothesis import given, strategies as st

from latticeips.errors import NotAdditive
from latticeips.extension import (
    extension_triple,
    is_valid_extension,
    maximal_extension,
    minimal_extension,
    minimality_check,
)
from latticeips.lattice import antichain, downset_lattice
from latticeips.maps import ArrowBlockMap, ExtendedSite as E, LocalFunction, dual_local
from latticeips.models import (
    death_map,
    demote_map,
    grow_map,
    infect_map,
    young_death_map,
)
from oracles import (
    brute_N,
    relation_dual_extends,
    relation_extends,
    relation_of,
)
from strategies import additive_maps

I, J = 0, 1

# arrows and blocking symbols of the two-stage maps
TABLE = {
    "grow": ({(E(I, 0), E(I, 1))}, set()),
    "young_death": ({(E(I, 1), E(I, 0))}, {E(I, 0)}),
    "demote": ({(E(I, 1), E(I, 0))}, {E(I, 1)}),
    "death": (set(), {E(I, 0), E(I, 1)}),
    "infect": ({(E(I, 1), E(J, 0))}, set()),
}


def _maps(lat):
    return {
        "grow": grow_map(lat, I),
        "young_death": young_death_map(lat, I),
        "demote": demote_map(lat, I),
        "death": death_map(lat, I),
        "infect": infect_map(lat, I, J),
    }


@pytest.mark.parametrize("name", sorted(TABLE))
def test_two_stage_table(lat3, name):
    A = minimal_extension(_maps(lat3)[name])
    arrows, blocks = TABLE[name]
    assert A.arrows == arrows and A.blocks == blocks


@pytest.mark.parametrize("name", sorted(TABLE))
def test_dual_table_reverses_arrows_keeps_blocks(lat3, name):
    A = minimal_extension(_maps(lat3)[name]).transpose()
    arrows, blocks = TABLE[name]
    assert A.arrows == {(b, a) for a, b in arrows}
    assert A.blocks == blocks


def test_infection_dual_arrow(lat3):
    A = minimal_extension(infect_map(lat3, I, J)).transpose()
    assert A.arrows == {(E(J, 0), E(I, 1))}


def test_non_additive_rejected(lat3):
    f = LocalFunction.from_rows(lat3, (0,), {(1,): (2,), (2,): (1,)})
    with pytest.raises(NotAdditive):
        minimal_extension(f)


def test_triple_of_infection(lat3):
    tri = extension_triple(infect_map(lat3, I, J))
    diag = {(p, p) for p in tri.points}
    below = {(E(s, 1), E(s, 0)) for s in (I, J)}
    assert tri.N == diag | below | {(E(I, 1), E(J, 0))}
    # identity contributes (k,1)->(k,0) at both sites, so the common part has two pairs
    assert tri.N_down & tri.N_up == below


def test_triple_of_identity(lat3):
    tri = extension_triple(LocalFunction.identity(lat3, (I,)))
    le = {(E(I, s), E(I, t)) for s in range(2) for t in range(2) if t <= s}
    lt = {(E(I, 1), E(I, 0))}
    assert tri.N == le
    assert tri.N_down == lt and tri.N_up == lt


def test_triple_of_zero(lat3):
    assert extension_triple(LocalFunction.zero(lat3, (I, J))).N == frozenset()


@pytest.mark.parametrize("n", [2, 5, 10])
def test_maximal_extension_nonlocal(lat3, n):
    A = maximal_extension(grow_map(lat3, 0), range(n))
    extra = {(E(j, 1), E(j, 0)) for j in range(1, n)}
    assert A.arrows == {(E(0, 0), E(0, 1)), (E(0, 1), E(0, 0))} | extra
    assert A.blocks == frozenset()
    assert is_valid_extension(A, grow_map(lat3, 0), cross_check=(n <= 5)) == (True, True)
    assert not minimality_check(A, grow_map(lat3, 0))


def test_maximal_of_identity(lat3):
    A = maximal_extension(LocalFunction.identity(lat3, (0,)), range(3))
    assert A.arrows == {(E(j, 1), E(j, 0)) for j in range(3)}
    assert not A.blocks


def test_antichain_maximal_equals_minimal():
    lat = downset_lattice(antichain(2))
    # swap the two levels between two sites: an additive map on the Boolean lattice
    idx = lat.index_of_mask
    m = LocalFunction.from_rule(lat, (0, 1), lambda x: (idx(lat.masks[x[0]] & 1 | lat.masks[x[1]] & 2), x[1]))
    assert maximal_extension(m, (0, 1)) == minimal_extension(m)


def test_valid_extension_examples(lat3):
    m = demote_map(lat3, I)
    tri = extension_triple(m)
    A = ArrowBlockMap.from_connection_set(tri.N - tri.N_down, tri.points)
    assert is_valid_extension(A, m) == (True, False)
    ident = LocalFunction.identity(lat3, (I,))
    empty = ArrowBlockMap.from_connection_set(set(), [E(I, 0), E(I, 1)])
    assert is_valid_extension(empty, ident) == (False, False)


def test_minimality_examples(lat3):
    assert minimality_check(minimal_extension(infect_map(lat3, I, J)), infect_map(lat3, I, J))
    ident = LocalFunction.identity(lat3, (I,))
    assert minimal_extension(ident) == ArrowBlockMap()
    assert minimality_check(ArrowBlockMap(), ident)


def test_union_formula_fails_for_young_death(lat3):
    # removing N_down | N_up instead of their intersection breaks the extension
    m = young_death_map(lat3, I)
    tri = extension_triple(m)
    A = ArrowBlockMap.from_connection_set(tri.N - (tri.N_down | tri.N_up), tri.points)
    assert is_valid_extension(A, m) != (True, True)


@given(additive_maps())
def test_triple_matches_definition(m):
    N, Nd, Nu = brute_N(m, len(m.window))
    tri = extension_triple(m)
    pos = {s: p for p, s in enumerate(m.window)}

    def conv(rel):
        return {((pos[a.site], a.level), (pos[b.site], b.level)) for a, b in rel}

    assert conv(tri.N) == N and conv(tri.N_down) == Nd and conv(tri.N_up) == Nu


@given(additive_maps())
def test_N_upward_monotone_in_source(m):
    tri = extension_triple(m)
    le = m.lattice.delta.le
    for a, b in tri.N:
        for s in range(m.lattice.depth):
            if le[a.level][s]:
                assert (E(a.site, s), b) in tri.N


@given(additive_maps())
def test_minimal_extension_restricts_correctly(m):
    k = len(m.window)
    A = minimal_extension(m)
    M = relation_of(A, m.window, m.lattice.depth)
    assert relation_extends(M, m, k)
    assert relation_dual_extends(M, m, k)
    assert is_valid_extension(A, m) == (True, True)


@given(additive_maps())
def test_minimal_extension_is_minimal_by_brute_force(m):
    k = len(m.window)
    M = relation_of(minimal_extension(m), m.window, m.lattice.depth)
    for p in M:
        smaller = M - {p}
        assert not (relation_extends(smaller, m, k) and relation_dual_extends(smaller, m, k))
    assert minimality_check(minimal_extension(m), m)


@given(additive_maps())
def test_sandwich(m):
    tri = extension_triple(m)
    M = minimal_extension(m).connection_set(tri.points)
    assert tri.N - tri.N_down <= M <= tri.N
    assert tri.N - tri.N_up <= M


@given(additive_maps(), st.data())
def test_sandwich_agrees_with_direct_for_random_relations(m, data):
    # any relation between N \ (N_down & N_up) ... N: validity as predicted
    tri = extension_triple(m)
    optional = sorted(tri.N_down | tri.N_up)
    keep = data.draw(st.sets(st.sampled_from(optional))) if optional else set()
    M = (tri.N - (tri.N_down | tri.N_up)) | keep
    A = ArrowBlockMap.from_connection_set(M, tri.points)
    # cross_check raises if the characterisation and direct evaluation disagree
    is_valid_extension(A, m, cross_check=True)


def test_dual_local_is_transpose_restriction(lat3):
    m = infect_map(lat3, I, J)
    M = relation_of(minimal_extension(m), m.window, 2)
    d = dual_local(m)
    table = {y: d(y) for y in d.inputs()}
    assert relation_dual_extends(M, m, 2, table)
