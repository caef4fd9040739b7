import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latticeips.errors import GridMismatch
from latticeips.graphical import forward_flow, sample_timeline
from latticeips.maps import Configuration, ExtendedSite as E
from latticeips.models import (
    TwoStageParams,
    contact_model,
    onoff_backward,
    onoff_instance_map,
    onoff_dual_model,
    psi_tilde,
    two_stage_model,
)

FLIP = {0: 1, 1: 0}


def test_families_and_rates(two_stage, onoff):
    names = [f.name for f in two_stage.families]
    assert names == ["infect+1", "infect-1", "grow", "young_death", "death"]
    assert [f.name for f in onoff.families] == ["infect+1", "infect-1", "grow", "demote", "death"]
    assert {f.name: f.rate for f in two_stage.families}["young_death"] == 0.5
    assert {f.name: f.rate for f in onoff.families}["demote"] == 0.5


def test_instance_extensions_use_global_sites(two_stage):
    k = two_stage.instance_index[("infect-1", (0, 5))]
    assert two_stage.instance_extensions[k].arrows == {(E(0, 1), E(5, 0))}
    k = two_stage.instance_index[("young_death", (3,))]
    A = two_stage.instance_extensions[k]
    assert A.arrows == {(E(3, 1), E(3, 0))} and A.blocks == {E(3, 0)}


def test_dual_extensions_are_conjugated_transposes(two_stage, onoff):
    mapping = onoff_instance_map(two_stage, onoff)
    assert sorted(mapping) == list(range(len(onoff.instances)))
    for k, A in enumerate(two_stage.instance_extensions):
        assert onoff.instance_extensions[mapping[k]] == A.transpose().relabel_levels(FLIP)


def test_symmetric_kernel_gives_same_infection_table():
    n = 5
    table = {}
    for i in range(n):
        for j in range(n):
            if i != j:
                table[(i, j)] = table[(j, i)] = 0.1 * (i + j)
    p = TwoStageParams(size=n, lam_table=table)
    a, b = two_stage_model(p), onoff_dual_model(p)
    assert a.family("infect").rate_table == b.family("infect").rate_table
    asym = TwoStageParams(size=n, lam_table={(0, 1): 2.0, (1, 0): 0.5})
    rt = dict(onoff_dual_model(asym).family("infect").rate_table)
    assert rt == {(1, 0): 2.0, (0, 1): 0.5}


def test_no_demote_events_without_young_death():
    p = TwoStageParams(lam=1, gamma=1, delta1=0.0, delta2=1, size=4)
    dual = onoff_dual_model(p)
    for seed in range(20):
        tl = sample_timeline(dual, 3.0, seed)
        assert all(tl.instance(e).name != "demote" for e in tl.events)


def test_all_zero_rates_freeze_state():
    m = two_stage_model(TwoStageParams(lam=0, gamma=0, delta1=0, delta2=0, size=5))
    tl = sample_timeline(m, 10.0, 3)
    assert tl.events == ()
    x = Configuration(m.lattice, (2, 1, 0, 2, 1))
    assert forward_flow(tl, x) == x


def test_negative_rates_rejected():
    with pytest.raises(ValueError):
        TwoStageParams(gamma=-1)
    with pytest.raises(ValueError):
        TwoStageParams(lam_table={(0, 1): -0.5})
    with pytest.raises(ValueError):
        contact_model(-1, 1, 3)


def test_contact_model_extensions():
    m = contact_model(1.5, 1.0, 5)
    k = m.instance_index[("infect+1", (2, 3))]
    A = m.instance_extensions[k]
    assert A.arrows == {(E(2, 0), E(3, 0))} and not A.blocks
    assert A.transpose() == m.instance_extensions[m.instance_index[("infect-1", (3, 2))]]
    d = m.instance_extensions[m.instance_index[("death", (4,))]]
    assert d.blocks == {E(4, 0)} and not d.arrows
    assert m.state_names == ("healthy", "infected")


def test_psi_tilde_examples():
    assert psi_tilde((0, 1, 2, 0), (2, 0, 1, 2)) == 1
    assert psi_tilde((1,), (1,)) == 0
    assert all(psi_tilde((0, 0), y) == 0 for y in product(range(3), repeat=2))
    with pytest.raises(GridMismatch):
        psi_tilde((0, 1), (0,))


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=8))
def test_psi_tilde_symmetric(pairs):
    x, y = zip(*pairs)
    assert psi_tilde(x, y) == psi_tilde(y, x)


def _onoff_holds(p, seed, xs, ys, T=2.0):
    m, dual = two_stage_model(p), onoff_dual_model(p)
    tl = sample_timeline(m, T, seed)
    fx = [forward_flow(tl, Configuration(m.lattice, x)).values for x in xs]
    by = [onoff_backward(tl, dual, y) for y in ys]
    return all(psi_tilde(X, y) == psi_tilde(x, Y) for x, X in zip(xs, fx) for y, Y in zip(ys, by))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_onoff_duality_exhaustive(n):
    p = TwoStageParams(lam=2, gamma=1, delta1=0.5, delta2=0.3, size=n)
    states = list(product(range(3), repeat=n))
    for seed in range(5):
        assert _onoff_holds(p, seed, states, states)


@given(st.integers(4, 8), st.integers(0, 2**32), st.data())
def test_onoff_duality_random(n, seed, data):
    p = TwoStageParams(lam=1.5, gamma=0.7, delta1=0.4, delta2=0.3, size=n)
    conf = st.tuples(*[st.integers(0, 2)] * n)
    xs = data.draw(st.lists(conf, min_size=1, max_size=5))
    ys = data.draw(st.lists(conf, min_size=1, max_size=5))
    assert _onoff_holds(p, seed, xs, ys)


def test_onoff_needs_matching_grid(two_stage, onoff):
    tl = sample_timeline(two_stage, 1.0, 0)
    with pytest.raises(GridMismatch):
        onoff_backward(tl, onoff, (0, 0))


def test_single_site_extinction_law():
    p = TwoStageParams(lam=0, gamma=0, delta1=0, delta2=1, size=1, topology="line")
    m = two_stage_model(p)
    T, n = 2.0, 10_000
    x = Configuration(m.lattice, (2,))
    dead = np.array([forward_flow(sample_timeline(m, T, s), x).values == (0,) for s in range(n)])
    q = 1 - math.exp(-T)
    assert abs(dead.mean() - q) < 4 * math.sqrt(q * (1 - q) / n)


def test_fast_maturation_behaves_like_contact_process():
    lam, delta, n, T, trials = 1.2, 1.0, 6, 2.0, 600
    two = two_stage_model(TwoStageParams(lam=lam, gamma=200.0, delta1=0.0, delta2=delta, size=n))
    cp = contact_model(lam, delta, n)
    x2 = Configuration(two.lattice, (2,) + (0,) * (n - 1))
    x1 = Configuration(cp.lattice, (1,) + (0,) * (n - 1))
    a = np.array([any(forward_flow(sample_timeline(two, T, s), x2).values) for s in range(trials)])
    b = np.array([any(forward_flow(sample_timeline(cp, T, 10**6 + s), x1).values) for s in range(trials)])
    se = math.sqrt(a.var() / trials + b.var() / trials)
    assert abs(a.mean() - b.mean()) < 4 * se + 0.02
