"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 unsatisfiable demand or
non-implementable load. Output files are written atomically: a failed run
leaves no partial file behind.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import (LoadCouplingError, NotImplementableError, ScenarioError,
                     UnsatisfiableError)
from .feasibility import is_satisfiable
from .load_solver import solve_load
from .optimizer import (convergence_trace, minimize_energy, sample_load_region,
                        sweep_demand, sweep_load, uniform_power_baseline)
from .power_solver import iap
from .scenario_io import SyntheticSpec, dumps, generate_synthetic, load_scenario

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError(f"need finite numbers: {text!r}")
    return values


def _positive(text):
    v = float(text)
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number: {text!r}")
    return v


def _scalar_or_list(values):
    return values[0] if len(values) == 1 else np.array(values)


def build_parser():
    parser = _Parser(prog="loadcoupling", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solver = _Parser(add_help=False)
    solver.add_argument("--tol-outer", type=_positive, help="IAP load tolerance (default 1e-5)")
    solver.add_argument("--tol-inner", type=_positive, help="bisection |eta-1| tolerance (default 1e-9)")
    solver.add_argument("--mode", choices=["sync", "async"], help="IAP sweep mode (default async)")
    solver.add_argument("--p-cap", type=_float_list, help="per-cell power cap, scalar or list (W)")
    solver.add_argument("--max-outer", type=int, help="outer iteration cap (default 10000)")

    def add(name, help_, scenario=True, parents=(solver,),
            out_help="write CSV here (default: stdout)"):
        p = sub.add_parser(name, help=help_, parents=list(parents))
        if scenario:
            p.add_argument("--scenario", required=True, metavar="PATH")
        p.add_argument("--out", metavar="PATH", help=out_help)
        return p

    def rates(p):
        p.add_argument("--xi", type=_float_list,
                       help="uniform per-user demand overriding the scenario's d_min")
        p.add_argument("--rate-unit", choices=["nats", "bits"], default="nats",
                       help="unit of --xi values")

    p = add("check", "satisfiability of the demand (spectral radius test)", parents=())
    rates(p)
    p = add("solve-load", "load fixed point for a given power")
    rates(p)
    p.add_argument("--power", type=_float_list, required=True, help="power, scalar or per cell (W)")
    p = add("solve-power", "power realizing a target load (IAP)")
    rates(p)
    p.add_argument("--phi", type=_float_list, default=[1.0], help="target load, scalar or per cell")
    p = add("optimize", "minimum-energy operating point (full load)")
    rates(p)
    p.add_argument("--epsilon-prime", type=float, default=0.0,
                   help="target load (1 - epsilon') instead of full load")
    p.add_argument("--weights", type=_float_list, help="per-cell weights of the energy objective")
    p = add("baseline", "uniform-power baseline (smallest feasible common power)", parents=())
    rates(p)
    p = add("sweep-demand", "energy versus uniform demand xi")
    p.add_argument("--xi", type=_float_list, required=True)
    p.add_argument("--rate-unit", choices=["nats", "bits"], default="nats")
    p.add_argument("--scheme", choices=["full_load", "uniform_load", "uniform_power"],
                   default="full_load")
    p.add_argument("--phi", type=float, help="load level for --scheme uniform_load")
    p = add("sweep-load", "energy versus uniform target load phi")
    rates(p)
    p.add_argument("--phi", type=_float_list, required=True)
    p = add("trace", "IAP convergence trace (2-norm distance to the target load)")
    rates(p)
    p.add_argument("--phi", type=_float_list, default=[1.0])
    p = add("region", "sample powers and their loads", parents=())
    rates(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--p-max", type=_positive, default=2.0)
    p = add("generate", "write a synthetic grid scenario", scenario=False, parents=(),
            out_help="scenario JSON path (required)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cells", type=int, default=148)
    p.add_argument("--users-per-cell", type=int, default=10)
    p.add_argument("--spacing", type=_positive, default=500.0, help="site spacing (m)")
    p.add_argument("--exponent", type=_positive, default=3.5, help="path-loss exponent")
    p.add_argument("--ref-gain", type=_positive, default=1e-3, help="gain at 1 m (linear)")
    p.add_argument("--noise-power", type=_positive, default=1e-13, help="noise power (W)")
    p.add_argument("--demand", type=_positive, default=0.05, help="per-user demand (nats)")
    return parser


def _to_nats(values, unit):
    scale = math.log(2.0) if unit == "bits" else 1.0
    return [v * scale for v in values]


def _demand(args, scn):
    if getattr(args, "xi", None) is None:
        return scn.d_min
    if len(args.xi) != 1:
        raise UsageError("--xi takes a single value for this command")
    xi = _to_nats(args.xi, args.rate_unit)[0]
    if xi <= 0:
        raise UsageError("--xi must be positive")
    return np.full(scn.network.num_users, xi)


def _options(args, scn):
    mode = {"sync": "synchronous", "async": "asynchronous", None: None}[getattr(args, "mode", None)]
    cap = getattr(args, "p_cap", None)
    return scn.iap_options(mode=mode, outer_tol=getattr(args, "tol_outer", None),
                           inner_tol=getattr(args, "tol_inner", None),
                           max_outer=getattr(args, "max_outer", None),
                           p_cap=None if cap is None else _scalar_or_list(cap))


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _cell_rows(*cols):
    return [(i, *(float(c[i]) for c in cols)) for i in range(len(cols[0]))]


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    stderr = sys.stderr
    try:
        args = build_parser().parse_args(argv)
        text, summary = _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    except UnsatisfiableError as exc:
        print(f"unsatisfiable: {exc}", file=stderr)
        return EXIT_INFEASIBLE
    except NotImplementableError as exc:
        print(f"infeasible: {exc}", file=stderr)
        return EXIT_INFEASIBLE
    except (ScenarioError, LoadCouplingError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_INPUT
    if args.out:
        try:
            _write_atomic(args.out, text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror}", file=stderr)
            return EXIT_INPUT
        if summary:
            stdout.write(summary)
    else:
        stdout.write(summary if summary and args.command in ("check",) else text)
    return EXIT_OK


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dispatch(args):
    """Run one subcommand; returns (machine output, human summary)."""
    if args.command == "generate":
        if args.out is None:
            raise UsageError("generate needs --out")
        spec = SyntheticSpec(n_cells=args.cells, users_per_cell=args.users_per_cell,
                             spacing=args.spacing, exponent=args.exponent,
                             reference_gain=args.ref_gain, noise_power=args.noise_power,
                             demand=args.demand, seed=args.seed)
        scn = generate_synthetic(spec)
        return dumps(scn), f"generated {spec.n_cells} cells, {scn.network.num_users} users\n"

    scn = load_scenario(args.scenario)
    net = scn.network
    cmd = args.command

    if cmd == "check":
        rep = is_satisfiable(net, _demand(args, scn))
        verdict = "satisfiable" if rep.satisfiable else "unsatisfiable"
        text = _csv(["rho", "satisfiable", "iterations"],
                    [(rep.rho, str(rep.satisfiable).lower(), rep.iterations)])
        return text, f"rho = {rep.rho!r}\nverdict: {verdict}\n"

    if cmd == "solve-load":
        x, rep = solve_load(net, _scalar_or_list(args.power), _demand(args, scn))
        return (_csv(["cell", "load"], _cell_rows(x)),
                f"load solve: {rep.termination.value} after {rep.iterations} iterations\n")

    if cmd == "solve-power":
        d = _demand(args, scn)
        target = net.cell_vector(_scalar_or_list(args.phi), "target load")
        p, rep = iap(net, target, d, _options(args, scn))
        if not rep.converged:
            raise NotImplementableError(
                f"target load is not implementable ({rep.termination.value} after "
                f"{rep.iterations} iterations)", rep)
        pinned = np.zeros(net.n)
        pinned[list(rep.pinned)] = 1
        return (_csv(["cell", "power", "realized_load", "pinned"],
                     [(i, float(p[i]), float(rep.realized_load[i]), int(pinned[i]))
                      for i in range(net.n)]),
                f"power solve: converged in {rep.iterations} iterations, "
                f"sum power {p.sum()!r} W\n")

    if cmd == "optimize":
        res = minimize_energy(net, _demand(args, scn), _options(args, scn),
                              epsilon_prime=args.epsilon_prime, weights=args.weights)
        return (_csv(["cell", "power", "load", "energy"],
                     _cell_rows(res.p_star, res.x_star, res.energy.per_cell)),
                f"optimal energy {res.energy.total!r} "
                f"({res.report.iterations} IAP iterations)\n")

    if cmd == "baseline":
        res = uniform_power_baseline(net, _demand(args, scn))
        return (_csv(["cell", "power", "load", "energy"],
                     _cell_rows(res.p, res.x, res.energy.per_cell)),
                f"uniform power beta {res.beta!r} W, energy {res.energy.total!r}\n")

    if cmd == "sweep-demand":
        table = sweep_demand(net, _to_nats(args.xi, args.rate_unit), args.scheme,
                             phi=args.phi, opts=_options(args, scn))
        return table.to_csv(), ""

    if cmd == "sweep-load":
        table = sweep_load(net, _demand(args, scn), args.phi, _options(args, scn))
        return table.to_csv(), ""

    if cmd == "trace":
        target = net.cell_vector(_scalar_or_list(args.phi), "target load")
        trace = convergence_trace(net, _demand(args, scn), target, _options(args, scn))
        return _csv(["iteration", "distance"], trace), ""

    if cmd == "region":
        if args.samples < 1:
            raise UsageError("--samples must be positive")
        pts = sample_load_region(net, _demand(args, scn), args.samples, args.p_max, args.seed)
        header = [f"p{i + 1}" for i in range(net.n)] + [f"x{i + 1}" for i in range(net.n)]
        return _csv(header, [tuple(float(v) for v in (*p, *x)) for p, x in pts]), ""

    raise UsageError(f"unknown command {cmd}")


def main(argv=None):
    sys.exit(run(argv))
