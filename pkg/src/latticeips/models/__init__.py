"""Ready-made models: the two-stage contact process, its on-off dual and the contact process.

The two-stage process lives on the 3-chain S = {0 < 1 < 2} (empty, young,
adult), realised as down-sets of the 2-chain {"0" < "1"}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Optional, Sequence

from ..errors import GridMismatch
from ..graphical import Family, Model, Timeline, build_model
from ..lattice import Lattice, downset_lattice, validate_poset
from ..maps import Configuration, LocalFunction

TWO_STAGE_NAMES = ("empty", "young", "adult")


def two_chain_delta():
    return validate_poset(("0", "1"), [("0", "1")])


def point_delta():
    return validate_poset(("0",), [])


def three_chain() -> Lattice:
    return downset_lattice(two_chain_delta())


# local maps on the 3-chain, windows given as grid sites


def infect_map(lat: Lattice, i=0, j=1) -> LocalFunction:
    """An adult at i makes an empty j young."""
    rows = {(2, 0): (2, 1)}
    return LocalFunction.from_rows(lat, (i, j), rows)


def grow_map(lat: Lattice, i=0) -> LocalFunction:
    return LocalFunction.from_rows(lat, (i,), {(1,): (2,)})


def young_death_map(lat: Lattice, i=0) -> LocalFunction:
    return LocalFunction.from_rows(lat, (i,), {(1,): (0,)})


def demote_map(lat: Lattice, i=0) -> LocalFunction:
    return LocalFunction.from_rows(lat, (i,), {(2,): (1,)})


def death_map(lat: Lattice, i=0) -> LocalFunction:
    top = len(lat) - 1
    return LocalFunction.from_rows(lat, (i,), {(a,): (0,) for a in range(1, top + 1)})


@dataclass(frozen=True)
class TwoStageParams:
    """Rates of the two-stage contact process.

    The infection kernel is either ``lam`` for every anchor and each target
    offset in ``offsets``, or an explicit ``lam_table`` of directed pairs.
    """

    lam: float = 1.0
    gamma: float = 1.0
    delta1: float = 0.0
    delta2: float = 1.0
    size: int = 6
    topology: str = "torus"
    offsets: tuple = (1, -1)
    lam_table: Optional[Mapping] = field(default=None, hash=False)

    def __post_init__(self):
        for name in ("lam", "gamma", "delta1", "delta2"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")
        if self.lam_table is not None and any(not r >= 0 for r in self.lam_table.values()):
            raise ValueError("infection rates must be non-negative")

    def kernel(self) -> dict:
        """λ(i, j) for every directed pair with a positive-rate instance."""
        if self.lam_table is not None:
            return {tuple(k): float(r) for k, r in self.lam_table.items()}
        out = {}
        n = self.size
        for a in range(n):
            for d in self.offsets:
                b = a + d
                if self.topology == "torus":
                    b %= n
                elif not 0 <= b < n:
                    continue
                if a != b:
                    out[(a, b)] = out.get((a, b), 0.0) + self.lam
        return out


def _offset_name(d: int) -> str:
    return f"infect{d:+d}"


def _infection_families(lat, p: TwoStageParams, reverse: bool) -> list:
    if p.lam_table is not None:
        table = p.kernel()
        if reverse:
            table = {(j, i): r for (i, j), r in table.items()}
        return [Family("infect", infect_map(lat), rate_table=tuple(table.items()))]
    offsets = list(p.offsets)
    if reverse:
        flipped = [-d for d in offsets]
        # a symmetric offset list keeps its order so symmetric kernels give identical families
        offsets = offsets if sorted(flipped) == sorted(offsets) else flipped
    fams = []
    for d in offsets:
        fams.append(Family(_offset_name(d), infect_map(lat, 0, d), rate=float(p.lam)))
    return fams


def two_stage_model(p: TwoStageParams) -> Model:
    lat = three_chain()
    fams = _infection_families(lat, p, reverse=False) + [
        Family("grow", grow_map(lat), rate=float(p.gamma)),
        Family("young_death", young_death_map(lat), rate=float(p.delta1)),
        Family("death", death_map(lat), rate=float(p.delta2)),
    ]
    return build_model(two_chain_delta(), p.size, p.topology, fams, TWO_STAGE_NAMES)


def onoff_dual_model(p: TwoStageParams) -> Model:
    """On-off contact process: infection kernel reversed, m^{1->0} replaced by m^{2->1}."""
    lat = three_chain()
    fams = _infection_families(lat, p, reverse=True) + [
        Family("grow", grow_map(lat), rate=float(p.gamma)),
        Family("demote", demote_map(lat), rate=float(p.delta1)),
        Family("death", death_map(lat), rate=float(p.delta2)),
    ]
    return build_model(two_chain_delta(), p.size, p.topology, fams, TWO_STAGE_NAMES)


def contact_model(lam: float, delta: float, size: int, topology: str = "torus",
                  offsets: Sequence[int] = (1, -1)) -> Model:
    """Classical contact process on S = {0, 1}."""
    if not (lam >= 0 and delta >= 0):
        raise ValueError("rates must be non-negative")
    lat = downset_lattice(point_delta())
    fams = [
        Family(_offset_name(d), LocalFunction.from_rows(lat, (0, d), {(1, 0): (1, 1)}),
               rate=float(lam))
        for d in offsets
    ]
    fams.append(Family("death", death_map(lat), rate=float(delta)))
    return build_model(point_delta(), size, topology, fams, ("healthy", "infected"))


def psi_tilde(x, y) -> int:
    """1 iff some site has x(i) + y(i) >= 3 (states 0, 1, 2)."""
    xv = x.values if isinstance(x, Configuration) else tuple(x)
    yv = y.values if isinstance(y, Configuration) else tuple(y)
    if len(xv) != len(yv):
        raise GridMismatch(f"grids of size {len(xv)} and {len(yv)}")
    return int(any(a + b >= 3 for a, b in zip(xv, yv)))


# two-stage event -> on-off event under the duality
_ONOFF_RENAME = {"grow": "grow", "young_death": "demote", "death": "death"}


def onoff_instance_map(model: Model, dual: Model) -> tuple:
    """For each instance of ``model``, the matching instance of the on-off ``dual``.

    Infection m*_{ij} corresponds to m*_{ji}; m^{1->0} to m^{2->1}; the
    other maps to themselves.
    """
    infect = {}
    for k, inst in enumerate(dual.instances):
        if inst.name.startswith("infect"):
            infect[inst.sites] = k
    out = []
    for inst in model.instances:
        if inst.name.startswith("infect"):
            key = tuple(reversed(inst.sites))
            out.append(infect[key])
        else:
            out.append(dual.instance_index[(_ONOFF_RENAME[inst.name], inst.sites)])
    return tuple(out)


def onoff_backward(timeline: Timeline, dual: Model, y, t=None, s=None) -> tuple:
    """Run the on-off maps of ``dual`` backward over the events of ``timeline``."""
    s = timeline.start if s is None else s
    t = timeline.end if t is None else t
    mapping = onoff_instance_map(timeline.model, dual)
    vals = list(y.values if isinstance(y, Configuration) else y)
    if len(vals) != dual.size:
        raise GridMismatch("configuration does not match the dual grid")
    for e in reversed(timeline.span(s, t)):
        inst = dual.instances[mapping[e.instance]]
        img = dual.families[inst.family].template(tuple(vals[i] for i in inst.sites))
        for i, v in zip(inst.sites, img):
            vals[i] = v
    return tuple(vals)


def shipped_model_text(name: str) -> str:
    """Text of a model file shipped with the package, e.g. ``"two_stage"``."""
    return resources.files(__name__).joinpath(f"{name}.model").read_text(encoding="utf-8")


def shipped_model_path(name: str):
    return resources.files(__name__).joinpath(f"{name}.model")


__all__ = [
    "TwoStageParams",
    "two_stage_model",
    "onoff_dual_model",
    "contact_model",
    "psi_tilde",
    "onoff_instance_map",
    "onoff_backward",
    "three_chain",
    "two_chain_delta",
    "infect_map",
    "grow_map",
    "young_death_map",
    "demote_map",
    "death_map",
    "shipped_model_text",
    "shipped_model_path",
]
