import pytest
from hypothesis import given

from latticeips.errors import (
    CycleError,
    DuplicateElement,
    NotALattice,
    NotDistributive,
    TooLarge,
    UnknownElement,
)
from latticeips.lattice import (
    antichain,
    birkhoff_map,
    chain,
    downset_lattice,
    is_distributive,
    join_irreducibles,
    lattice_from_order,
    lattices_isomorphic_via,
    order_dual,
    poset_isomorphism,
    self_dual_iso,
    validate_poset,
)
from oracles import brute_downsets
from strategies import posets


def test_closure_is_transitive():
    p = validate_poset("abc", [("a", "b"), ("b", "c")])
    assert p.le[p.index("a")][p.index("c")]
    assert p.covers() == [(0, 1), (1, 2)]


def test_cycle_rejected():
    with pytest.raises(CycleError):
        validate_poset("abc", [("a", "b"), ("b", "c"), ("c", "a")])


def test_duplicate_and_unknown():
    with pytest.raises(DuplicateElement):
        validate_poset("aa", [])
    with pytest.raises(UnknownElement):
        validate_poset("ab", [("a", "z")])


def test_two_chain_canonical_order():
    lat = downset_lattice(validate_poset(["0", "1"], [("0", "1")]))
    assert lat.masks == (0, 1, 3)
    assert lat.elements == (frozenset(), frozenset({"0"}), frozenset({"0", "1"}))
    assert lat.depth == 2 and lat.principal(1) == 2


def test_antichain_gives_boolean_lattice():
    lat = downset_lattice(antichain(3))
    assert len(lat) == 8
    assert is_distributive(lat)


def test_chain_sizes():
    for n in range(6):
        assert len(downset_lattice(chain(n))) == n + 1


def test_guard():
    with pytest.raises(TooLarge):
        downset_lattice(antichain(21))


def test_diamond_and_pentagon_not_distributive():
    m3 = lattice_from_order("0abc1", [("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")])
    n5 = lattice_from_order("0abc1", [("0", "a"), ("a", "b"), ("b", "1"), ("0", "c"), ("c", "1")])
    for lat in (m3, n5):
        assert not is_distributive(lat)
        with pytest.raises(NotDistributive):
            join_irreducibles(lat)


def test_not_a_lattice():
    with pytest.raises(NotALattice):
        lattice_from_order("abcd", [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")])


def test_join_irreducibles_of_explicit_lattice():
    # 2 x 3 grid: join-irreducibles form a 1-chain plus a 2-chain
    elems = [(i, j) for i in range(2) for j in range(3)]
    pairs = [(a, b) for a in elems for b in elems if a != b and a[0] <= b[0] and a[1] <= b[1]]
    lat = lattice_from_order(elems, pairs)
    irr = join_irreducibles(lat)
    assert sorted(irr.elements) == [(0, 1), (0, 2), (1, 0)]
    f = birkhoff_map(lat, irr)
    assert lattices_isomorphic_via(lat, downset_lattice(irr), f)


def test_self_duality():
    assert self_dual_iso(chain(3)) == {0: 2, 1: 1, 2: 0}
    vee = validate_poset("abc", [("a", "b"), ("a", "c")])
    assert self_dual_iso(vee) is None
    with pytest.raises(TooLarge):
        self_dual_iso(antichain(9))


@given(posets())
def test_downsets_match_brute_force(p):
    lat = downset_lattice(p)
    assert sorted(lat.masks) == brute_downsets(p)


@given(posets())
def test_meet_join_are_intersection_union(p):
    lat = downset_lattice(p)
    m = lat.masks
    for a in range(len(lat)):
        for b in range(len(lat)):
            assert m[lat.meet[a][b]] == m[a] & m[b]
            assert m[lat.join[a][b]] == m[a] | m[b]
    assert lat.bottom == 0 and m[lat.top] == (1 << len(p)) - 1


@given(posets(max_n=5))
def test_downset_lattice_is_distributive(p):
    assert is_distributive(downset_lattice(p))


@given(posets(max_n=5))
def test_birkhoff_round_trip(p):
    lat = downset_lattice(p)
    irr = join_irreducibles(lat)
    assert poset_isomorphism(irr, p) is not None
    assert lattices_isomorphic_via(lat, downset_lattice(irr), birkhoff_map(lat, irr))


@given(posets())
def test_order_dual_is_involution(p):
    assert order_dual(order_dual(p)) == p
    # up-sets of p are down-sets of its dual
    assert len(downset_lattice(order_dual(p))) == len(downset_lattice(p))


@given(posets(max_n=5))
def test_canonical_order_sorted_by_size_then_members(p):
    masks = downset_lattice(p).masks
    keys = [(bin(m).count("1"), [i for i in range(len(p)) if m >> i & 1]) for m in masks]
    assert keys == sorted(keys)


def test_spec_examples_small_cases():
    empty = downset_lattice(validate_poset([], []))
    assert len(empty) == 1 and empty.elements == (frozenset(),)
    assert len(join_irreducibles(empty)) == 0
    three = downset_lattice(chain(2))
    assert poset_isomorphism(join_irreducibles(three), chain(2)) is not None
    boolean = downset_lattice(antichain(2))
    assert poset_isomorphism(join_irreducibles(boolean), antichain(2)) is not None
    iso = self_dual_iso(antichain(3))
    assert iso is not None
    assert self_dual_iso(validate_poset(["0", "1"], [("0", "1")])) == {"0": "1", "1": "0"}


def test_every_chain_is_distributive():
    for n in range(1, 6):
        assert is_distributive(lattice_from_order(range(n), [(i, i + 1) for i in range(n - 1)]))
