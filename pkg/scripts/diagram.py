"""Draw the four-site space-time diagram in tests/golden and check its labels.

The forward trajectory from (0,1,0,2) ends in (0,1,2,0), and running the
on-off maps backward from (2,0,1,2) ends in (0,2,2,1).
"""

import argparse
from pathlib import Path

from latticeips import Configuration, forward_flow, load_model, read_event_log, render_svg
from latticeips.models import TwoStageParams, onoff_backward, onoff_dual_model

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="diagram.svg")
    args = ap.parse_args()
    model = load_model(GOLDEN / "diagram.model")
    with open(GOLDEN / "diagram_events.jsonl", encoding="utf-8") as fh:
        tl = read_event_log(model, fh, 0.0, 4.0)
    x = Configuration(model.lattice, (0, 1, 0, 2))
    top = forward_flow(tl, x).values
    dual = onoff_dual_model(TwoStageParams(size=4, topology="line"))
    bottom = onoff_backward(tl, dual, (2, 0, 1, 2))
    print(f"forward  {x.values} -> {top}")
    print(f"backward (2, 0, 1, 2) -> {bottom}")
    Path(args.out).write_text(render_svg(tl, x), encoding="utf-8", newline="\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
