"""Command-line interface: validate, extend, simulate, dual-check, render, sweep.

Exit codes: 0 success, 1 I/O or parse error, 2 validation or check failure.
"""

from __future__ import annotations

import argparse
import csv
import fnmatch
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dsl import load_model
from .errors import LatticeIPSError, ModelSyntaxError, NotAPartialOrder, NotAdditive
from .extension import maximal_extension
from .graphical import (
    Model,
    Timeline,
    backward_bits,
    direct_backward_flow,
    direct_forward_flow,
    forward_bits,
    read_event_log,
    sample_timeline,
    snapshot_times,
    thin,
    write_event_log,
    write_snapshots,
)
from .maps import ArrowBlockMap, Configuration, decode, psi
from .render import render_svg

SEED_ENV = "IPSLAT_SEED"
EXIT_OK, EXIT_IO, EXIT_CHECK = 0, 1, 2
PARAM_ALIASES = {"lambda": "infect*", "λ": "infect*"}


class UsageError(Exception):
    """Bad command-line value; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers


def resolve_seed(seed: Optional[int]) -> int:
    if seed is None:
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
        else:
            seed = int(np.random.SeedSequence().entropy % 2**63)
    if seed < 0:
        raise UsageError("seed must be non-negative")
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def parse_state_token(model: Model, tok: str) -> int:
    tok = tok.strip()
    if model.state_names and tok in model.state_names:
        return model.state_names.index(tok)
    if tok.isdigit() and int(tok) < len(model.lattice):
        return int(tok)
    raise UsageError(f"unknown state {tok!r}")


def parse_init(model: Model, text: Optional[str]) -> Configuration:
    """``all-S``, ``one-S`` (site 0 in state S, the rest bottom) or a comma list."""
    n, lat = model.size, model.lattice
    if text is None:
        text = f"all-{lat.top}"
    if text.startswith("all-"):
        a = parse_state_token(model, text[4:])
        return Configuration(lat, (a,) * n)
    if text.startswith("one-"):
        a = parse_state_token(model, text[4:])
        return Configuration(lat, (a,) + (lat.bottom,) * (n - 1))
    vals = tuple(parse_state_token(model, t) for t in text.split(","))
    if len(vals) != n:
        raise UsageError(f"--init lists {len(vals)} states for a grid of {n} sites")
    return Configuration(lat, vals)


def trial_seeds(seed: int, trials: int) -> list:
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1, np.uint64)[0] >> np.uint64(1)) for c in children]


def _open_out(path: Optional[str]):
    return open(path, "w", encoding="utf-8", newline="") if path else None


# ---------------------------------------------------------------------------
# validate / extend


def extension_table(model: Model, dual: bool = False) -> str:
    lines = []
    for fam, ext in zip(model.families, model.extensions):
        A = ext.transpose() if dual else ext
        body = A.render_text() or "identity"
        lines.append(f"[{fam.name}]")
        lines.extend("  " + row for row in body.splitlines())
    return "\n".join(lines)


def cmd_validate(args) -> int:
    model = load_model(args.model)
    rep = model.rate_report()
    print(f"model: {args.model}")
    print(f"grid: {model.size} sites, {model.topology}; |S| = {len(model.lattice)}, "
          f"|Delta| = {model.lattice.depth}")
    print(f"families: {len(model.families)}, instances: {len(model.instances)}")
    for name, anchor, reason in model.placement_report:
        print(f"dropped: {name} at anchor {anchor} ({reason})")
    print("rate conditions (suprema over sites):")
    print(f"  diagonal {rep.diagonal!r}")
    print(f"  inflow   {rep.inflow!r}")
    print(f"  outflow  {rep.outflow!r}")
    print("minimal extensions:")
    print(extension_table(model))
    return EXIT_OK


def cmd_extend(args) -> int:
    model = load_model(args.model)
    fams = model.families if args.family is None else [model.family(args.family)]
    for fam in fams:
        k = model.families.index(fam)
        if args.maximal:
            A = maximal_extension(fam.template, range(model.size))
        else:
            A = model.extensions[k]
        if args.dual:
            A = A.transpose()
        print(f"[{fam.name}]")
        for row in (A.render_text() or "identity").splitlines():
            print("  " + row)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    seed = resolve_seed(args.seed)
    x0 = parse_init(model, args.init)
    if args.t < 0:
        raise UsageError("--t must be non-negative")
    tl = sample_timeline(model, (0.0, args.t), seed)
    times = snapshot_times(0.0, args.t, args.snapshots)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "events.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            write_event_log(tl, fh)
        with open(out / "snapshots.csv", "w", encoding="utf-8", newline="\n") as fh:
            write_snapshots(tl, x0, times, fh)
    else:
        buf = io.StringIO()
        write_event_log(tl, buf)
        buf.write("\n")
        write_snapshots(tl, x0, times, buf)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# dual-check


def drop_first_arrow(model: Model, family: str) -> Model:
    k = [f.name for f in model.families].index(family)
    ext = model.extensions[k]
    if not ext.arrows:
        raise UsageError(f"family {family!r} has no arrows to drop")
    victim = min(ext.arrows)
    return model.with_extension(family, ArrowBlockMap(ext.arrows - {victim}, ext.blocks))


def _safe(bits: int, lat, n: int) -> Optional[Configuration]:
    try:
        return Configuration(lat, decode(bits, lat, n))
    except ValueError:
        return None


def forward_images(tl: Timeline, x: Configuration) -> dict:
    """X(x) via the extension and via the tables; None if the extension leaves S."""
    m = tl.model
    return {
        "ext": _safe(forward_bits(tl, x.to_bits()), m.lattice, m.size),
        "direct": direct_forward_flow(tl, x),
    }


def backward_images(tl: Timeline, y: Configuration) -> dict:
    m = tl.model
    return {
        "ext": _safe(backward_bits(tl, y.to_bits()), m.dual_lattice, m.size),
        "direct": direct_backward_flow(tl, y),
    }


def duality_failure(x, y, fx: dict, by: dict) -> Optional[str]:
    """None if psi(X(x), y) = psi(x, Y(y)) for every extension/table combination.

    The ext/ext combination holds for any arrow/block map, so the mixed ones
    are what catch an extension that does not represent the map tables.
    """
    for kx, ky in product(("ext", "direct"), repeat=2):
        X, Y = fx[kx], by[ky]
        if X is None or Y is None:
            return f"{'forward' if X is None else 'backward'} extension flow left the state space"
        if psi(X, y) != psi(x, Y):
            return f"psi(X_{kx}(x), y) = {psi(X, y)} but psi(x, Y_{ky}(y)) = {psi(x, Y)}"
    return None


def _random_config(rng, lat, n) -> Configuration:
    return Configuration(lat, tuple(int(v) for v in rng.integers(0, len(lat), n)))


def _dual_trial(model: Model, t: float, seed: int, pairs: int, exhaustive: bool):
    tl = sample_timeline(model, (0.0, t), seed)
    lat, dlat, n = model.lattice, model.dual_lattice, model.size
    if exhaustive:
        xs = [Configuration(lat, v) for v in product(range(len(lat)), repeat=n)]
        ys = [Configuration(dlat, v) for v in product(range(len(dlat)), repeat=n)]
        fxs = [forward_images(tl, x) for x in xs]
        bys = [backward_images(tl, y) for y in ys]
        candidates = (
            (xs[a], ys[b], fxs[a], bys[b]) for a in range(len(xs)) for b in range(len(ys))
        )
    else:
        rng = np.random.default_rng(seed)
        sampled = [
            (_random_config(rng, lat, n), _random_config(rng, dlat, n)) for _ in range(pairs)
        ]
        candidates = (
            (x, y, forward_images(tl, x), backward_images(tl, y)) for x, y in sampled
        )
    checked = 0
    for x, y, fx, by in candidates:
        checked += 1
        why = duality_failure(x, y, fx, by)
        if why is not None:
            return checked, (tl, x, y, why)
    return checked, None


def cmd_dual_check(args) -> int:
    model = load_model(args.model)
    seed = resolve_seed(args.seed)
    if args.exhaustive is not None:
        if not 1 <= args.exhaustive <= 4:
            raise UsageError("--exhaustive takes a grid size between 1 and 4")
        model = model.resized(args.exhaustive)
    if args.drop_arrow:
        model = drop_first_arrow(model, args.drop_arrow)
    total = 0
    for trial, s in enumerate(trial_seeds(seed, args.trials)):
        checked, failure = _dual_trial(model, args.t, s, args.pairs, args.exhaustive is not None)
        total += checked
        if failure is not None:
            tl, x, y, why = failure
            print(f"FAIL trial {trial} (timeline seed {s}): {why}")
            print(f"x = {list(x.values)}")
            print(f"y = {list(y.values)}  (dual state indices)")
            print(f"events on (0, {args.t}]:")
            write_event_log(tl, sys.stdout)
            return EXIT_CHECK
    print(f"PASS {args.trials} trials, {total} pairs")
    return EXIT_OK


# ---------------------------------------------------------------------------
# render


def cmd_render(args) -> int:
    model = load_model(args.model)
    if args.events:
        with open(args.events, encoding="utf-8") as fh:
            tl = read_event_log(model, fh, 0.0, args.t)
    else:
        seed = resolve_seed(args.seed)
        tl = sample_timeline(model, (0.0, args.t), seed)
    init = parse_init(model, args.traj) if args.traj else None
    svg = render_svg(tl, init)
    if args.out:
        Path(args.out).write_text(svg, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(svg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def parse_param(model: Model, text: str):
    if "=" not in text:
        raise UsageError("--param needs PATTERN=a:b:steps")
    pattern, rng = text.split("=", 1)
    pattern = PARAM_ALIASES.get(pattern, pattern)
    parts = rng.split(":")
    if len(parts) != 3:
        raise UsageError("--param range must be a:b:steps")
    try:
        a, b, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad --param range {rng!r}") from None
    if steps < 1 or a < 0 or b < 0:
        raise UsageError("--param needs non-negative rates and steps >= 1")
    names = [f.name for f in model.families if fnmatch.fnmatchcase(f.name, pattern)]
    if not names:
        raise UsageError(f"--param pattern {pattern!r} matches no family")
    for name in names:
        if model.family(name).rate is None:
            raise UsageError(f"family {name!r} uses a rate table and cannot be swept")
    values = np.linspace(a, b, steps).tolist() if steps > 1 else [a]
    return names, values


def observe(model: Model, x: Configuration, obs: str) -> float:
    bottom = model.lattice.bottom
    alive = sum(v != bottom for v in x.values)
    if obs == "survival":
        return float(alive > 0)
    return alive / model.size


def sweep_trial(model: Model, names, values, t, seed, init, obs) -> list:
    """Observations for one trial at every parameter value, from one master timeline."""
    top = max(values)
    master = sample_timeline(model.with_rates({n: top for n in names}), (0.0, t), seed)
    out = []
    for v in values:
        tl = thin(master, model.with_rates({n: v for n in names}))
        bits = forward_bits(tl, init.to_bits())
        out.append(observe(model, Configuration.from_bits(model.lattice, bits, model.size), obs))
    return out


def _sweep_job(payload):
    return sweep_trial(*payload)


def run_sweep(model, names, values, t, seed, init, obs, trials, jobs=1) -> list:
    """Rows ``(param, mean, stderr, trials)``; results keyed by trial index."""
    seeds = trial_seeds(seed, trials)
    payloads = [(model, names, values, t, s, init, obs) for s in seeds]
    if jobs > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_job, payloads))
    else:
        results = [_sweep_job(p) for p in payloads]
    data = np.array(results, dtype=float).reshape(trials, len(values))
    rows = []
    for k, v in enumerate(values):
        col = data[:, k]
        mean = float(col.mean()) if trials else float("nan")
        err = float(col.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
        rows.append((v, mean, err, trials))
    return rows


def cmd_sweep(args) -> int:
    model = load_model(args.model)
    seed = resolve_seed(args.seed)
    names, values = parse_param(model, args.param)
    init = parse_init(model, args.init)
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    rows = run_sweep(model, names, values, args.t, seed, init, args.obs, args.trials, args.jobs)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh or sys.stdout, lineterminator="\n")
        w.writerow(["param", "mean", "stderr", "trials"])
        for v, mean, err, n in rows:
            w.writerow([repr(v), repr(mean), repr(err), n])
    finally:
        if fh:
            fh.close()
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="latticeips", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="parse a model and report rates and extensions")
    v.add_argument("model")
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("extend", help="print arrow/block representations")
    e.add_argument("model")
    e.add_argument("--family")
    e.add_argument("--maximal", action="store_true", help="maximal extension over the whole grid")
    e.add_argument("--dual", action="store_true", help="print transposes")
    e.set_defaults(func=cmd_extend)

    s = sub.add_parser("simulate", help="sample a timeline and print events and snapshots")
    s.add_argument("model")
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--seed", type=int)
    s.add_argument("--init", help="all-S, one-S or a comma-separated list of states")
    s.add_argument("--snapshots", type=int, default=10)
    s.add_argument("--out", help="directory for events.jsonl and snapshots.csv")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("dual-check", help="check pathwise duality on sampled realizations")
    d.add_argument("model")
    d.add_argument("--trials", type=int, default=100)
    d.add_argument("--pairs", type=int, default=10, help="random (x, y) pairs per trial")
    d.add_argument("--t", type=float, default=5.0)
    d.add_argument("--seed", type=int)
    d.add_argument("--exhaustive", type=int, metavar="N",
                   help="resize the grid to N <= 4 sites and check every pair")
    d.add_argument("--drop-arrow", metavar="FAMILY",
                   help="delete one arrow from FAMILY's extension (self-test)")
    d.set_defaults(func=cmd_dual_check)

    r = sub.add_parser("render", help="draw a timeline as SVG")
    r.add_argument("model")
    r.add_argument("--t", type=float, default=1.0)
    r.add_argument("--seed", type=int)
    r.add_argument("--traj", metavar="INIT", help="highlight the trajectory started from INIT")
    r.add_argument("--events", help="render an event log instead of sampling")
    r.add_argument("--out")
    r.set_defaults(func=cmd_render)

    w = sub.add_parser("sweep", help="Monte-Carlo sweep of a rate with coupled thinning")
    w.add_argument("model")
    w.add_argument("--param", required=True, help="PATTERN=a:b:steps, PATTERN matches family names")
    w.add_argument("--trials", type=int, default=100)
    w.add_argument("--t", type=float, default=5.0)
    w.add_argument("--obs", choices=("survival", "occupancy"), default="survival")
    w.add_argument("--init", help="initial state, as for simulate")
    w.add_argument("--seed", type=int)
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NotAdditive, NotAPartialOrder) as exc:
        line = getattr(exc, "line", None)
        prefix = f"{args.model}:{line}: " if isinstance(exc, NotAdditive) and line else ""
        print(f"validation failed: {prefix}{exc}", file=sys.stderr)
        return EXIT_CHECK
    except ModelSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, UsageError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (LatticeIPSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
