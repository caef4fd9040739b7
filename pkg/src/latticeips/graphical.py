"""Models, Poisson event timelines on finite windows, and stochastic flows.

A Model instantiates map families on a finite grid (line or torus). Each
instance carries the minimal additive extension of its map, compiled to a
bitset operation; forward flows act on down-set encodings, backward flows
apply transposed maps in reverse time order to up-set encodings.
"""

from __future__ import annotations

import bisect
import json
import math
import zlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterable, Optional, Sequence

import numpy as np

from .errors import GridMismatch, WindowError
from .extension import minimal_extension
from .lattice import Lattice, Poset, downset_lattice
from .maps import (
    ArrowBlockMap,
    CompiledMap,
    Configuration,
    LocalFunction,
    check_rate_conditions,
    dual_lattice,
    dual_local,
    require_additive,
)

TOPOLOGIES = ("line", "torus")


@dataclass(frozen=True)
class Family:
    """A map template on window positions ``offsets`` relative to an anchor site.

    Either ``rate`` (same rate at every anchor) or ``rate_table`` (explicit
    ``(sites, rate)`` entries; unlisted windows have rate 0) is set.
    """

    name: str
    template: LocalFunction
    rate: Optional[float] = None
    rate_table: Optional[tuple] = None

    def __post_init__(self):
        if (self.rate is None) == (self.rate_table is None):
            raise ValueError(f"family {self.name!r}: give exactly one of rate, rate_table")
        if self.rate is not None and not self.rate >= 0:
            raise ValueError(f"family {self.name!r}: negative rate {self.rate}")
        if self.rate_table is not None:
            table = tuple(sorted((tuple(k), float(r)) for k, r in self.rate_table))
            for sites, r in table:
                if len(sites) != self.arity:
                    raise ValueError(f"family {self.name!r}: rate_table key {sites} has wrong arity")
                if not r >= 0:
                    raise ValueError(f"family {self.name!r}: negative rate {r}")
            object.__setattr__(self, "rate_table", table)

    @property
    def arity(self) -> int:
        return len(self.template.window)

    @property
    def offsets(self) -> tuple:
        return self.template.window

    def with_rate(self, rate: float) -> "Family":
        return Family(self.name, self.template, rate=float(rate))


@dataclass(frozen=True)
class Instance:
    family: int
    name: str
    anchor: int
    sites: tuple
    rate: float


@dataclass(frozen=True)
class Model:
    """An additive particle system on a finite grid.

    ``extensions[k]`` is the arrow/block representation of family ``k`` on
    its window positions; build models with :func:`build_model`, which
    computes the minimal extensions.
    """

    delta: Poset
    lattice: Lattice
    size: int
    topology: str
    families: tuple
    extensions: tuple
    state_names: Optional[tuple] = None

    def family(self, name: str) -> Family:
        for f in self.families:
            if f.name == name:
                return f
        raise KeyError(name)

    @cached_property
    def dual_lattice(self) -> Lattice:
        return dual_lattice(self.lattice)

    @cached_property
    def _placement(self):
        placed, dropped = [], []
        n = self.size
        for k, fam in enumerate(self.families):
            if fam.rate_table is not None:
                entries = [(sites, r) for sites, r in fam.rate_table]
            else:
                entries = [(tuple(a + d for d in fam.offsets), fam.rate) for a in range(n)]
            for sites, rate in entries:
                anchor = sites[0] - fam.offsets[0] if fam.rate_table is None else sites[0]
                if self.topology == "torus":
                    sites = tuple(s % n for s in sites)
                elif any(not 0 <= s < n for s in sites):
                    dropped.append((fam.name, anchor, "outside grid"))
                    continue
                if len(set(sites)) != len(sites):
                    dropped.append((fam.name, anchor, "window wraps onto itself"))
                    continue
                if fam.rate_table is not None and any(not 0 <= s < n for s in sites):
                    dropped.append((fam.name, anchor, "outside grid"))
                    continue
                placed.append(Instance(k, fam.name, anchor, sites, float(rate)))
        return tuple(placed), tuple(dropped)

    @property
    def instances(self) -> tuple:
        return self._placement[0]

    @property
    def placement_report(self) -> tuple:
        """``(family, anchor, reason)`` for every instance dropped at placement."""
        return self._placement[1]

    @cached_property
    def instance_index(self) -> dict:
        return {(inst.name, inst.sites): k for k, inst in enumerate(self.instances)}

    @cached_property
    def local_maps(self) -> tuple:
        return tuple(
            self.families[inst.family].template.relabel(inst.sites) for inst in self.instances
        )

    @cached_property
    def dual_templates(self) -> tuple:
        return tuple(dual_local(f.template) for f in self.families)

    def instance_extension(self, k: int) -> ArrowBlockMap:
        inst = self.instances[k]
        fam = self.families[inst.family]
        return self.extensions[inst.family].relabel(dict(zip(fam.offsets, inst.sites)))

    @cached_property
    def instance_extensions(self) -> tuple:
        return tuple(self.instance_extension(k) for k in range(len(self.instances)))

    @cached_property
    def compiled(self) -> tuple:
        d = self.lattice.depth
        return tuple(A.compile(d) for A in self.instance_extensions)

    @cached_property
    def compiled_dual(self) -> tuple:
        return tuple(c.transpose() for c in self.compiled)

    def rate_report(self):
        return check_rate_conditions(
            ((m, inst.rate) for m, inst in zip(self.local_maps, self.instances)),
            range(self.size),
        )

    def state_label(self, a: int) -> str:
        return self.state_names[a] if self.state_names else str(a)

    def with_rates(self, rates: dict) -> "Model":
        """Copy with constant rates replaced for the named families."""
        fams = tuple(
            f.with_rate(rates[f.name]) if f.name in rates else f for f in self.families
        )
        return Model(
            self.delta, self.lattice, self.size, self.topology, fams, self.extensions,
            self.state_names,
        )

    def with_extension(self, name: str, ext: ArrowBlockMap) -> "Model":
        """Copy with one family's arrow/block representation overridden."""
        exts = tuple(
            ext if f.name == name else e for f, e in zip(self.families, self.extensions)
        )
        return Model(
            self.delta, self.lattice, self.size, self.topology, self.families, exts,
            self.state_names,
        )

    def resized(self, size: int) -> "Model":
        return Model(
            self.delta, self.lattice, size, self.topology, self.families, self.extensions,
            self.state_names,
        )


def build_model(
    delta: Poset,
    size: int,
    topology: str,
    families: Sequence[Family],
    state_names: Optional[Sequence[str]] = None,
) -> Model:
    if topology not in TOPOLOGIES:
        raise ValueError(f"topology must be one of {TOPOLOGIES}, got {topology!r}")
    if size < 1:
        raise ValueError("grid size must be positive")
    lattice = downset_lattice(delta)
    names = [f.name for f in families]
    if len(set(names)) != len(names):
        raise ValueError("family names must be unique")
    exts = []
    for f in families:
        if f.template.lattice != lattice:
            raise ValueError(f"family {f.name!r} uses a different lattice")
        require_additive(f.template, f.name)
        exts.append(minimal_extension(f.template, f.name))
    if state_names is not None:
        state_names = tuple(state_names)
        if len(state_names) != len(lattice):
            raise ValueError("need one state name per lattice element")
    return Model(delta, lattice, size, topology, tuple(families), tuple(exts), state_names)


# ---------------------------------------------------------------------------
# timelines


@dataclass(frozen=True)
class Event:
    time: float
    instance: int
    seq: int
    mark: float = 0.0  # uniform on [0, 1), used for thinning


@dataclass(frozen=True)
class Timeline:
    model: Model = field(compare=False, repr=False)
    start: float
    end: float
    events: tuple
    seed: Optional[int] = None

    @cached_property
    def times(self) -> list:
        return [e.time for e in self.events]

    def span(self, s: float, t: float) -> tuple:
        """Events with s < time <= t, in order."""
        if not s <= t:
            raise WindowError(f"need s <= t, got s={s}, t={t}")
        if s < self.start or t > self.end:
            raise WindowError(f"[{s}, {t}] not inside timeline window [{self.start}, {self.end}]")
        lo = bisect.bisect_right(self.times, s)
        hi = bisect.bisect_right(self.times, t)
        return self.events[lo:hi]

    def instance(self, e: Event) -> Instance:
        return self.model.instances[e.instance]


def _instance_rng(seed: int, inst: Instance) -> np.random.Generator:
    key = (zlib.crc32(inst.name.encode()), *inst.sites)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=key)))


def sample_timeline(model: Model, window, seed: int) -> Timeline:
    """Poisson events for every instance on (s, u]; ``window`` is u or (s, u).

    Each instance draws from its own Philox stream keyed by (seed, family,
    sites), so output does not depend on iteration order elsewhere.
    """
    s, u = (0.0, float(window)) if np.isscalar(window) else map(float, window)
    if not u >= s:
        raise WindowError(f"window end {u} before start {s}")
    length = u - s
    raw = []
    seq = 0
    for k, inst in enumerate(model.instances):
        if inst.rate == 0 or length == 0:
            continue
        rng = _instance_rng(seed, inst)
        count = rng.poisson(inst.rate * length)
        times = s + length * (1.0 - rng.random(count))
        marks = rng.random(count)
        for t, mk in zip(times.tolist(), marks.tolist()):
            if t <= s:
                t = math.nextafter(s, math.inf)
            raw.append(Event(t, k, seq, mk))
            seq += 1
    raw.sort(key=lambda e: (e.time, e.seq))
    return Timeline(model, s, u, tuple(raw), seed)


def thin(timeline: Timeline, model: Model) -> Timeline:
    """Keep each event with probability r_new / r_old using its stored mark.

    ``model`` must have the same instance layout as the timeline's model and
    rates no larger than the ones the timeline was sampled at.
    """
    old = timeline.model.instances
    new = model.instances
    if [(i.name, i.sites) for i in old] != [(i.name, i.sites) for i in new]:
        raise ValueError("thinning needs identical instance layouts")
    kept = []
    for e in timeline.events:
        r0, r1 = old[e.instance].rate, new[e.instance].rate
        if r1 > r0 * (1 + 1e-12):
            raise ValueError(f"cannot thin {old[e.instance].name} from rate {r0} up to {r1}")
        if e.mark * r0 < r1:
            kept.append(e)
    return Timeline(model, timeline.start, timeline.end, tuple(kept), timeline.seed)


def timeline_from_events(
    model: Model, records: Iterable[tuple], start: float, end: float
) -> Timeline:
    """Timeline from ``(time, instance_index)`` pairs; ties keep input order."""
    evs = [Event(float(t), int(k), seq) for seq, (t, k) in enumerate(records)]
    for e in evs:
        if not start < e.time <= end:
            raise WindowError(f"event at {e.time} outside ({start}, {end}]")
        if not 0 <= e.instance < len(model.instances):
            raise ValueError(f"no instance {e.instance}")
    evs.sort(key=lambda e: (e.time, e.seq))
    return Timeline(model, float(start), float(end), tuple(evs))


# ---------------------------------------------------------------------------
# event log / snapshot export


def event_record(timeline: Timeline, e: Event) -> str:
    inst = timeline.instance(e)
    return json.dumps(
        {"t": e.time, "family": inst.name, "anchor": inst.anchor, "sites": list(inst.sites)},
        separators=(", ", ": "),
    )


def write_event_log(timeline: Timeline, fh: IO[str]) -> None:
    for e in timeline.events:
        fh.write(event_record(timeline, e) + "\n")


def read_event_log(model: Model, fh: Iterable[str], start: float, end: float) -> Timeline:
    by_anchor = {(i.name, i.anchor): k for k, i in enumerate(model.instances)}
    records = []
    for lineno, line in enumerate(fh, 1):
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        if "sites" in rec:
            key = model.instance_index.get((rec["family"], tuple(rec["sites"])))
        else:
            key = by_anchor.get((rec["family"], rec["anchor"]))
        if key is None:
            raise ValueError(f"line {lineno}: no instance {rec['family']!r} at {rec.get('sites', rec.get('anchor'))}")
        records.append((rec["t"], key))
    return timeline_from_events(model, records, start, end)


def snapshot_times(s: float, t: float, k: int) -> list:
    """k + 1 evenly spaced times from s to t; a single time if k <= 0 or s == t."""
    if k <= 0 or s == t:
        return [s]
    return [s + j * (t - s) / k for j in range(k + 1)]


def write_snapshots(timeline: Timeline, x: Configuration, times: Sequence[float], fh) -> None:
    n = timeline.model.size
    fh.write("time," + ",".join(f"site_{i}" for i in range(n)) + "\n")
    state = x
    prev = timeline.start
    for tau in times:
        state = forward_flow(timeline, state, prev, tau)
        prev = tau
        fh.write(repr(float(tau)) + "," + ",".join(str(v) for v in state.values) + "\n")


# ---------------------------------------------------------------------------
# flows


def _window(timeline: Timeline, s, t):
    s = timeline.start if s is None else s
    t = timeline.end if t is None else t
    return s, t


def _check_state(timeline: Timeline, x: Configuration, lattice: Lattice):
    if x.lattice != lattice or len(x) != timeline.model.size:
        raise GridMismatch("configuration does not match the model's grid and lattice")


def forward_bits(timeline: Timeline, bits: int, s=None, t=None) -> int:
    s, t = _window(timeline, s, t)
    maps = timeline.model.compiled
    for e in timeline.span(s, t):
        bits = maps[e.instance](bits)
    return bits


def backward_bits(timeline: Timeline, bits: int, t=None, s=None) -> int:
    s, t = _window(timeline, s, t)
    maps = timeline.model.compiled_dual
    for e in reversed(timeline.span(s, t)):
        bits = maps[e.instance](bits)
    return bits


def forward_flow(timeline: Timeline, x: Configuration, s=None, t=None) -> Configuration:
    """X_{s,t}(x) through the arrow/block representation on down-sets."""
    model = timeline.model
    _check_state(timeline, x, model.lattice)
    bits = forward_bits(timeline, x.to_bits(), s, t)
    return Configuration.from_bits(model.lattice, bits, model.size)


def backward_flow(timeline: Timeline, y: Configuration, t=None, s=None) -> Configuration:
    """Y_{t,s}(y) for y over S': transposed maps in reverse order on up-sets."""
    model = timeline.model
    _check_state(timeline, y, model.dual_lattice)
    bits = backward_bits(timeline, y.to_bits(), t, s)
    return Configuration.from_bits(model.dual_lattice, bits, model.size)


def _apply_table(values: list, template: LocalFunction, sites: tuple) -> None:
    img = template(tuple(values[s] for s in sites))
    for s, v in zip(sites, img):
        values[s] = v


def direct_forward_flow(timeline: Timeline, x: Configuration, s=None, t=None) -> Configuration:
    """X_{s,t}(x) by applying the map tables in S directly (no extension)."""
    s, t = _window(timeline, s, t)
    model = timeline.model
    _check_state(timeline, x, model.lattice)
    vals = list(x.values)
    for e in timeline.span(s, t):
        inst = model.instances[e.instance]
        _apply_table(vals, model.families[inst.family].template, inst.sites)
    return Configuration(model.lattice, tuple(vals))


def direct_backward_flow(timeline: Timeline, y: Configuration, t=None, s=None) -> Configuration:
    """Y_{t,s}(y) by applying the dual map tables in S' in reverse order."""
    s, t = _window(timeline, s, t)
    model = timeline.model
    _check_state(timeline, y, model.dual_lattice)
    vals = list(y.values)
    duals = model.dual_templates
    for e in reversed(timeline.span(s, t)):
        inst = model.instances[e.instance]
        _apply_table(vals, duals[inst.family], inst.sites)
    return Configuration(model.dual_lattice, tuple(vals))


def forward_trace(timeline: Timeline, bits: int, s=None, t=None) -> list:
    """``[(time, bits)]`` starting at s and after every event in (s, t]."""
    s, t = _window(timeline, s, t)
    maps = timeline.model.compiled
    out = [(s, bits)]
    for e in timeline.span(s, t):
        bits = maps[e.instance](bits)
        out.append((e.time, bits))
    return out


__all__ = [
    "Family",
    "Instance",
    "Model",
    "build_model",
    "Event",
    "Timeline",
    "sample_timeline",
    "thin",
    "timeline_from_events",
    "write_event_log",
    "read_event_log",
    "write_snapshots",
    "snapshot_times",
    "forward_flow",
    "backward_flow",
    "forward_bits",
    "backward_bits",
    "direct_forward_flow",
    "direct_backward_flow",
    "forward_trace",
    "CompiledMap",
]
