"""Open-path reachability through the arrows and blocking symbols of a timeline.

Sweeps work on explicit sets of extended sites and the uncompiled
ArrowBlockMaps, so they are an independent route to the same answer as the
bitset flows in :mod:`latticeips.graphical`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .graphical import Timeline
from .maps import ExtendedSite


@dataclass(frozen=True)
class PathStep:
    """The path sits at ``site`` from ``time`` on; ``seq`` is None for the start."""

    time: float
    seq: Optional[int]
    site: ExtendedSite


def _points(timeline: Timeline, pts: Iterable) -> frozenset:
    model = timeline.model
    out = frozenset(ExtendedSite(*p) for p in pts)
    for p in out:
        if not (0 <= p.site < model.size and 0 <= p.level < model.lattice.depth):
            raise ValueError(f"{p} is not on the extended grid")
    return out


def _extensions(timeline: Timeline) -> tuple:
    return timeline.model.instance_extensions


def reach_forward(timeline: Timeline, sources: Iterable, s=None, t=None) -> frozenset:
    """Extended sites reachable by an open path from ``sources`` at s to time t."""
    s = timeline.start if s is None else s
    t = timeline.end if t is None else t
    R = set(_points(timeline, sources))
    ext = _extensions(timeline)
    for e in timeline.span(s, t):
        A = ext[e.instance]
        hits = {b for a, b in A.arrows if a in R}
        R -= A.blocks
        R |= hits
    return frozenset(R)


def reach_backward(timeline: Timeline, targets: Iterable, t=None, s=None) -> frozenset:
    """Extended sites at time s joined by an open path to ``targets`` at time t."""
    s = timeline.start if s is None else s
    t = timeline.end if t is None else t
    R = set(_points(timeline, targets))
    ext = _extensions(timeline)
    for e in reversed(timeline.span(s, t)):
        A = ext[e.instance]
        hits = {a for a, b in A.arrows if b in R}
        R -= A.blocks
        R |= hits
    return frozenset(R)


def connection_set_between(timeline: Timeline, s, t) -> frozenset:
    """The relation {(i, j): (i, s) reaches (j, t)} over the whole extended grid."""
    model = timeline.model
    out = set()
    for site in range(model.size):
        for level in range(model.lattice.depth):
            a = ExtendedSite(site, level)
            out.update((a, b) for b in reach_forward(timeline, [a], s, t))
    return frozenset(out)


def witness_path(timeline: Timeline, i, s, j, t) -> Optional[list]:
    """An open path from (i, s) to (j, t) as a list of PathSteps, or None."""
    i, j = ExtendedSite(*i), ExtendedSite(*j)
    _points(timeline, [i, j])
    events = timeline.span(s, t)
    ext = _extensions(timeline)
    frontiers = [{i}]
    for e in events:
        A = ext[e.instance]
        R = frontiers[-1]
        frontiers.append((R - A.blocks) | {b for a, b in A.arrows if a in R})
    if j not in frontiers[-1]:
        return None
    steps = []
    cur = j
    for k in range(len(events) - 1, -1, -1):
        A = ext[events[k].instance]
        before = frontiers[k]
        if cur in before and cur not in A.blocks:
            continue
        src = min(a for a, b in A.arrows if b == cur and a in before)
        steps.append(PathStep(events[k].time, events[k].seq, cur))
        cur = src
    steps.append(PathStep(s, None, cur))
    steps.reverse()
    return steps


def validate_path(timeline: Timeline, path: list, s, t) -> bool:
    """Check both open-path conditions of ``path`` against the raw event list.

    Every jump must follow an arrow of the event it names, and the path may
    not sit through an event that blocks its current site.
    """
    if not path or path[0].seq is not None or path[0].time != s:
        return False
    model = timeline.model
    jumps = {}
    for step in path[1:]:
        if step.seq is None or step.seq in jumps:
            return False
        jumps[step.seq] = step
    cur = path[0].site
    seen = 0
    last = (s, -1)
    for e in timeline.span(s, t):
        A = model.instance_extensions[e.instance]
        step = jumps.get(e.seq)
        if step is not None:
            if step.time != e.time or (cur, step.site) not in A.arrows:
                return False
            cur = step.site
            seen += 1
        elif cur in A.blocks:
            return False
        last = (e.time, e.seq)
    # every jump must have been matched to an event in the window, in order
    order = [(st.time, st.seq) for st in path[1:]]
    return seen == len(jumps) and order == sorted(order) and (not order or order[-1] <= last)


def path_end(path: list) -> ExtendedSite:
    return path[-1].site


__all__ = [
    "PathStep",
    "reach_forward",
    "reach_backward",
    "connection_set_between",
    "witness_path",
    "validate_path",
    "path_end",
]
