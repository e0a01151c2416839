"""Command-line entry point: every experiment as a subcommand emitting
CSV/JSON for downstream plotting.

All numbers are written with 17 significant digits so the files round-trip
64-bit floats exactly; given the same flags and seed, re-running any
subcommand produces byte-identical output.

Exit codes: 0 success, 2 usage error, 3 numeric failure (a diagnostic
JSON is still written in that case).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import dynamics, orbits, stability
from .objective import (
    Dataset,
    LossSpec,
    NetworkObjective,
    appendix_c_objective,
    objective_by_name,
)
from .network import spec_from_json

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("GDLAB_OUT", ".")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, text: str) -> None:
    path.write_text(text)


def _load_objective(args):
    if getattr(args, "net", None):
        spec = spec_from_json(Path(args.net).read_text())
        data = Dataset.from_csv(Path(args.data).read_text())
        return NetworkObjective(spec, data, LossSpec(getattr(args, "loss", "half_squared")))
    name = getattr(args, "objective", "appendixC")
    kwargs = {}
    if name == "appendixC" and getattr(args, "p", None) is not None:
        kwargs["p"] = args.p
    return objective_by_name(name, **kwargs)


def cmd_fig1(args) -> int:
    out = _out_dir(args)
    obj = objective_by_name("figure1")
    probe = dynamics.region_image_probe(
        obj, [(args.interval[0], args.interval[1])], args.eta, args.samples
    )
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["theta_in", "theta_out"])
    for tin, tout in zip(probe.inputs[:, 0], probe.images[:, 0]):
        w.writerow([f"{tin:.17g}", f"{tout:.17g}"])
    _write(out / "fig1.csv", buf.getvalue())
    summary = {
        "eta": args.eta,
        "interval": list(args.interval),
        "diameter": probe.diameter,
        "collapsed": probe.collapsed,
        "bounding_box": [list(b) for b in probe.bounding_box],
    }
    _write(out / "fig1_summary.json", json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_bifurcation(args) -> int:
    out = _out_dir(args)
    obj = appendix_c_objective(p=0.5)
    records = orbits.bifurcation_sweep(
        obj,
        (args.eta_min, args.eta_max),
        args.eta_steps,
        args.kmax,
        tuple(args.interval),
        grid_n=args.grid_n,
    )
    _write(out / "bifurcation.csv", orbits.sweep_to_csv(records))
    return EXIT_OK


def cmd_stable_minima(args) -> int:
    out = _out_dir(args)
    config = stability.StabilityConfig(eta=args.eta, p=args.p)
    arcs = stability.stable_arcs(config, r_max=args.r_max, literal_lambda=args.literal_lambda)
    _write(out / "arcs.json", arcs.to_json())
    theta1 = np.linspace(args.theta1_min, args.theta1_max, args.theta1_steps)
    _write(out / "stable_minima.csv", stability.sample_hyperbola_csv(config, theta1))
    return EXIT_OK


def cmd_trajectory(args) -> int:
    out = _out_dir(args)
    obj = _load_objective(args)
    schedule = None
    if args.schedule:
        schedule = tuple(
            float(line) for line in Path(args.schedule).read_text().split() if line.strip()
        )
    config = dynamics.GDConfig(
        eta=args.eta,
        schedule=schedule,
        rng_seed=args.seed,
        batch_size=args.batch_size,
    )
    traj = dynamics.iterate(obj, np.asarray(args.theta0), config, args.steps)
    _write(out / "trajectory.csv", traj.to_csv())
    final = traj.steps[-1]
    if not np.all(np.isfinite(final.theta)) or not math.isfinite(final.loss):
        _write(
            out / "trajectory_error.json",
            json.dumps({"error": "non-finite iterate", "step": final.step}),
        )
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_det_probe(args) -> int:
    out = _out_dir(args)
    obj = _load_objective(args)
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    box = [tuple(args.box[i : i + 2]) for i in range(0, len(args.box), 2)]
    if len(box) != obj.n_params:
        raise UsageError(f"--box needs {2 * obj.n_params} numbers")
    rng = np.random.default_rng(args.seed)
    result = dynamics.det_probe(obj, box, args.eta, args.samples, args.eps_grid, rng)
    doc = {
        "eta": args.eta,
        "sample_count": result.sample_count,
        "eps_grid": list(result.eps_grid),
        "fractions": list(result.fractions),
        "singular_eta_candidates": list(result.singular_eta_candidates),
        "breakpoint_samples": result.breakpoint_samples,
        "loglog_slope": result.loglog_slope(),
    }
    _write(out / "det_probe.json", json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_singular_eta(args) -> int:
    out = _out_dir(args)
    obj = _load_objective(args)
    etas = dynamics.singular_stepsizes(obj, np.asarray(args.theta))
    _write(out / "singular_eta.json", json.dumps({"singular_etas": etas}, indent=2))
    return EXIT_OK


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gdlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=None, help="output directory (default $GDLAB_OUT or .)")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("fig1", help="one-step region image probe on the 1-D piecewise objective")
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--interval", type=float, nargs=2, default=[2.1, 2.7])
    sp.add_argument("--samples", type=int, default=101)
    common(sp)
    sp.set_defaults(fn=cmd_fig1)

    sp = sub.add_parser("bifurcation", help="periodic-orbit sweep on the diagonal reduction")
    sp.add_argument("--eta-min", type=float, required=True)
    sp.add_argument("--eta-max", type=float, required=True)
    sp.add_argument("--eta-steps", type=int, default=100)
    sp.add_argument("--kmax", type=int, required=True)
    sp.add_argument("--interval", type=float, nargs=2, default=[0.05, 2.0])
    sp.add_argument("--grid-n", type=int, default=801)
    common(sp)
    sp.set_defaults(fn=cmd_bifurcation)

    sp = sub.add_parser("stable-minima", help="GD/SGD stable arcs on the minimum hyperbola")
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--r-max", type=float, default=1e3)
    sp.add_argument("--literal-lambda", action="store_true")
    sp.add_argument("--theta1-min", type=float, default=0.2)
    sp.add_argument("--theta1-max", type=float, default=5.0)
    sp.add_argument("--theta1-steps", type=int, default=200)
    common(sp)
    sp.set_defaults(fn=cmd_stable_minima)

    sp = sub.add_parser("trajectory", help="iterate GD or SGD and dump the trajectory")
    sp.add_argument("--theta0", type=float, nargs="+", required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--batch-size", type=int, default=None)
    sp.add_argument("--schedule", default=None, help="file with one step-size per line")
    sp.add_argument("--objective", default="appendixC")
    sp.add_argument("--net", default=None)
    sp.add_argument("--data", default=None)
    sp.add_argument("--loss", default="half_squared")
    sp.add_argument("--p", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_trajectory)

    sp = sub.add_parser("det-probe", help="Monte-Carlo |det DG_eta| probe over a parameter box")
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--box", type=float, nargs="+", required=True)
    sp.add_argument("--samples", type=int, required=True)
    sp.add_argument("--eps-grid", type=float, nargs="+", default=[1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    sp.add_argument("--objective", default="appendixC")
    sp.add_argument("--net", default=None)
    sp.add_argument("--data", default=None)
    sp.add_argument("--loss", default="half_squared")
    sp.add_argument("--p", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_det_probe)

    sp = sub.add_parser("singular-eta", help="reciprocal Hessian eigenvalues at a point")
    sp.add_argument("--theta", type=float, nargs="+", required=True)
    sp.add_argument("--objective", default="figure1")
    sp.add_argument("--net", default=None)
    sp.add_argument("--data", default=None)
    sp.add_argument("--loss", default="half_squared")
    sp.add_argument("--p", type=float, default=None)
    common(sp)
    sp.set_defaults(fn=cmd_singular_eta)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
