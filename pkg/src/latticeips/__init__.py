"""Additive interacting particle systems on finite distributive lattices.

Local maps on S = down-sets of a finite poset are turned into arrow and
blocking-symbol maps on an extended grid; forward and backward stochastic
flows, percolation sweeps and pathwise duality checks are built on those.
"""

from .errors import (
    BadOffset,
    CycleError,
    GridMismatch,
    LatticeIPSError,
    ModelSyntaxError,
    NotAdditive,
    NotAPartialOrder,
    NotDistributive,
    UnknownState,
    WindowError,
)
from .lattice import (
    Lattice,
    Poset,
    antichain,
    chain,
    downset_lattice,
    join_irreducibles,
    order_dual,
    validate_poset,
)
from .maps import (
    ArrowBlockMap,
    Configuration,
    ExtendedSite,
    LocalFunction,
    check_additive,
    dual_local,
    phi,
    psi,
)
from .extension import (
    is_valid_extension,
    maximal_extension,
    minimal_extension,
    minimality_check,
)
from .graphical import (
    Family,
    Model,
    Timeline,
    backward_flow,
    build_model,
    forward_flow,
    read_event_log,
    sample_timeline,
    thin,
    write_event_log,
)
from .percolation import reach_backward, reach_forward, witness_path
from .dsl import format_model, load_model, parse_model
from .render import render_svg

__version__ = "0.1.0"
