"""SVG space-time diagrams of a timeline: one vertical line per extended site,
arrows and blocking bars at event times, and an optional highlighted trajectory.

Geometry is fixed (site pitch 60, level pitch 18, 100 px per time unit,
time increasing upward) and all numbers are printed with two decimals, so
output bytes depend only on the timeline.
"""

from __future__ import annotations

from typing import Optional
from xml.sax.saxutils import escape

from .graphical import Timeline, forward_trace
from .maps import Configuration, bits_to_sites

SITE_PITCH = 60.0
LEVEL_PITCH = 18.0
TIME_SCALE = 100.0  # px per unit of time
MARGIN = 40.0
BLOCK_HALF = 6.0


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Geometry:
    def __init__(self, timeline: Timeline):
        m = timeline.model
        self.s, self.u = timeline.start, timeline.end
        self.depth = m.lattice.depth
        self.n = m.size
        span = max(self.u - self.s, 0.0)
        self.width = 2 * MARGIN + (self.n - 1) * SITE_PITCH + (self.depth - 1) * LEVEL_PITCH
        self.height = 2 * MARGIN + span * TIME_SCALE

    def x(self, site: int, level: int) -> float:
        return MARGIN + site * SITE_PITCH + level * LEVEL_PITCH

    def y(self, t: float) -> float:
        return MARGIN + (self.u - t) * TIME_SCALE


def render_svg(
    timeline: Timeline,
    init: Optional[Configuration] = None,
    title: Optional[str] = None,
) -> str:
    """SVG 1.1 document for ``timeline``; with ``init`` the forward trajectory is drawn bold."""
    g = _Geometry(timeline)
    model = timeline.model
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_f(g.width)}" height="{_f(g.height)}" '
        f'viewBox="0 0 {_f(g.width)} {_f(g.height)}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out += [
        "<defs>",
        '<marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto">',
        '<path d="M0,0 L6,3 L0,6 z" fill="black"/>',
        "</marker>",
        "</defs>",
        '<style>.grid{stroke:#999;stroke-width:1}.arrow{stroke:black;stroke-width:1.2}'
        ".block{fill:black}.traj{stroke:#c00;stroke-width:4;stroke-linecap:butt}"
        "text{font-family:sans-serif;font-size:11px}</style>",
    ]
    y0, y1 = g.y(g.s), g.y(g.u)
    out.append('<g id="grid">')
    for i in range(g.n):
        for lv in range(g.depth):
            x = _f(g.x(i, lv))
            out.append(
                f'<line class="grid" data-site="{i}" data-level="{lv}" '
                f'x1="{x}" y1="{_f(y0)}" x2="{x}" y2="{_f(y1)}"/>'
            )
        label_x = _f(g.x(i, 0) + (g.depth - 1) * LEVEL_PITCH / 2)
        out.append(f'<text x="{label_x}" y="{_f(y0 + 16)}" text-anchor="middle">{i}</text>')
    out.append(f'<text x="4" y="{_f(y0 + 4)}">{_f(g.s)}</text>')
    out.append(f'<text x="4" y="{_f(y1 + 4)}">{_f(g.u)}</text>')
    out.append("</g>")

    if init is not None:
        out.append('<g id="trajectory">')
        trace = forward_trace(timeline, init.to_bits())
        times = [t for t, _ in trace] + [g.u]
        for k, (t, bits) in enumerate(trace):
            t_next = times[k + 1]
            for p in sorted(bits_to_sites(bits, g.depth)):
                x = _f(g.x(p.site, p.level))
                out.append(
                    f'<line class="traj" data-site="{p.site}" data-level="{p.level}" '
                    f'data-t0="{t!r}" data-t1="{t_next!r}" '
                    f'x1="{x}" y1="{_f(g.y(t))}" x2="{x}" y2="{_f(g.y(t_next))}"/>'
                )
        out.append("</g>")

    out.append('<g id="events">')
    for e in timeline.events:
        A = model.instance_extensions[e.instance]
        inst = model.instances[e.instance]
        y = _f(g.y(e.time))
        out.append(
            f'<g class="event" data-family="{escape(inst.name)}" data-anchor="{inst.anchor}" '
            f'data-t="{e.time!r}">'
        )
        for a, b in sorted(A.arrows):
            out.append(
                f'<line class="arrow" data-from="{a.site},{a.level}" data-to="{b.site},{b.level}" '
                f'x1="{_f(g.x(*a))}" y1="{y}" x2="{_f(g.x(*b))}" y2="{y}" marker-end="url(#head)"/>'
            )
        for p in sorted(A.blocks):
            cx = g.x(*p)
            out.append(
                f'<rect class="block" data-at="{p.site},{p.level}" x="{_f(cx - BLOCK_HALF)}" '
                f'y="{_f(g.y(e.time) - 2)}" width="{_f(2 * BLOCK_HALF)}" height="4.00"/>'
            )
        out.append("</g>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


__all__ = ["render_svg", "SITE_PITCH", "LEVEL_PITCH", "TIME_SCALE"]
