import pytest
from hypothesis import given, strategies as st

from latticeips.graphical import (
    backward_flow,
    direct_forward_flow,
    forward_flow,
    sample_timeline,
    timeline_from_events,
)
from latticeips.maps import Configuration, ExtendedSite as E, bits_to_sites, sites_to_bits
from latticeips.models import TwoStageParams, two_stage_model
from latticeips.percolation import (
    PathStep,
    connection_set_between,
    path_end,
    reach_backward,
    reach_forward,
    validate_path,
    witness_path,
)

SMALL = two_stage_model(TwoStageParams(lam=2, gamma=1, delta1=0.5, delta2=0.3, size=4))
POINTS = [E(i, s) for i in range(4) for s in range(2)]
seeds = st.integers(0, 2**32)
times = st.lists(st.floats(0, 3), min_size=3, max_size=3).map(sorted)


def one_event(model, name, sites, t=0.5):
    return timeline_from_events(model, [(t, model.instance_index[(name, sites)])], 0, 1)


def test_no_events_reaches_only_itself():
    tl = timeline_from_events(SMALL, [], 0, 1)
    assert reach_forward(tl, [(2, 1)]) == {E(2, 1)}
    assert reach_backward(tl, [(0, 0), (3, 1)]) == {E(0, 0), E(3, 1)}
    assert witness_path(tl, (1, 0), 0, (1, 0), 1) == [PathStep(0, None, E(1, 0))]
    assert witness_path(tl, (1, 0), 0, (2, 0), 1) is None


def test_infection_arrow_forward():
    tl = one_event(SMALL, "infect+1", (1, 2))
    assert reach_forward(tl, [(1, 1)]) == {E(1, 1), E(2, 0)}
    assert reach_forward(tl, [(1, 0)]) == {E(1, 0)}


def test_infection_arrow_reversed_backward():
    tl = one_event(SMALL, "infect+1", (1, 2))
    assert reach_backward(tl, [(2, 0)]) == {E(2, 0), E(1, 1)}
    assert reach_backward(tl, [(1, 1)]) == {E(1, 1)}


def test_death_blocks_both_levels():
    tl = one_event(SMALL, "death", (3,))
    assert reach_forward(tl, [(3, 0), (3, 1), (0, 0)]) == {E(0, 0)}
    assert witness_path(tl, (3, 1), 0, (3, 1), 1) is None


def test_young_death_moves_then_blocks():
    tl = one_event(SMALL, "young_death", (0,))
    # (0,1) jumps to (0,0); the block on (0,0) stops a path already there
    assert reach_forward(tl, [(0, 1)]) == {E(0, 1), E(0, 0)}
    assert reach_forward(tl, [(0, 0)]) == frozenset()
    path = witness_path(tl, (0, 1), 0, (0, 0), 1)
    assert path == [PathStep(0, None, E(0, 1)), PathStep(0.5, 0, E(0, 0))]
    assert validate_path(tl, path, 0, 1)


def test_off_grid_point_rejected():
    tl = timeline_from_events(SMALL, [], 0, 1)
    with pytest.raises(ValueError):
        reach_forward(tl, [(4, 0)])
    with pytest.raises(ValueError):
        reach_forward(tl, [(0, 2)])


def test_tampered_path_fails_validation():
    tl = one_event(SMALL, "infect+1", (1, 2))
    good = witness_path(tl, (1, 1), 0, (2, 0), 1)
    assert validate_path(tl, good, 0, 1)
    wrong_target = [good[0], PathStep(good[1].time, good[1].seq, E(3, 0))]
    assert not validate_path(tl, wrong_target, 0, 1)
    assert not validate_path(tl, [PathStep(0.2, None, E(3, 0))], 0, 1)  # wrong start time
    blocked = one_event(SMALL, "death", (3,))
    assert not validate_path(blocked, [PathStep(0, None, E(3, 0))], 0, 1)
    assert not validate_path(tl, [], 0, 1)


@given(seeds, st.data())
def test_reach_matches_bitset_flows(seed, data):
    tl = sample_timeline(SMALL, (0, 3), seed)
    x = Configuration(SMALL.lattice, data.draw(st.tuples(*[st.integers(0, 2)] * 4)))
    pts = bits_to_sites(x.to_bits(), 2)
    assert sites_to_bits(reach_forward(tl, pts), 2) == forward_flow(tl, x).to_bits()
    assert sites_to_bits(reach_forward(tl, pts), 2) == direct_forward_flow(tl, x).to_bits()
    y = Configuration(SMALL.dual_lattice, data.draw(st.tuples(*[st.integers(0, 2)] * 4)))
    ypts = bits_to_sites(y.to_bits(), 2)
    assert sites_to_bits(reach_backward(tl, ypts), 2) == backward_flow(tl, y).to_bits()


@given(seeds, times)
def test_connection_duality(seed, stu):
    s, _, t = stu
    tl = sample_timeline(SMALL, (0, 3), seed)
    rel = connection_set_between(tl, s, t)
    for b in POINTS:
        assert reach_backward(tl, [b], t, s) == {a for a, c in rel if c == b}


@given(seeds, times)
def test_connection_composition(seed, stu):
    s, t, u = stu
    tl = sample_timeline(SMALL, (0, 3), seed)
    first, second = connection_set_between(tl, s, t), connection_set_between(tl, t, u)
    composed = {(a, c) for a, b in first for b2, c in second if b == b2}
    assert composed == connection_set_between(tl, s, u)


@given(seeds, st.data())
def test_reach_monotone_in_sources(seed, data):
    tl = sample_timeline(SMALL, (0, 3), seed)
    small = data.draw(st.sets(st.sampled_from(POINTS)))
    big = small | data.draw(st.sets(st.sampled_from(POINTS)))
    assert reach_forward(tl, small) <= reach_forward(tl, big)
    assert reach_backward(tl, small) <= reach_backward(tl, big)


@given(seeds, times, st.sampled_from(POINTS), st.sampled_from(POINTS))
def test_witness_path_exists_iff_connected(seed, stu, a, b):
    s, _, t = stu
    tl = sample_timeline(SMALL, (0, 3), seed)
    path = witness_path(tl, a, s, b, t)
    if b in reach_forward(tl, [a], s, t):
        assert path is not None and path[0].site == a and path_end(path) == b
        assert validate_path(tl, path, s, t)
    else:
        assert path is None
