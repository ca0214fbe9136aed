"""Command-line entry point: ``python -m naming_game <subcommand> ...``.

Exit status: 0 on success, 1 on usage errors, 2 on runtime errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import blocks, complete, interface, meanfield
from .config import ExperimentConfig
from .engine import Configuration, run
from .estimate import EstimateWithCI, estimate_invasion, rows_to_csv, sweep
from .graphs import from_spec
from .model import FitnessParams, State, derive
from .rng import replicate_seeds

log = logging.getLogger("naming_game")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _num(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return repr(x)


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with insertion key order; floats use the shortest round-trip repr."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _params(args) -> FitnessParams:
    if args.phi is not None and (args.phi_a is not None or args.phi_b is not None):
        raise UsageError("give either --phi or --phi-a/--phi-b")
    try:
        if args.phi is not None:
            return FitnessParams(args.phi, 1.0)
        return FitnessParams(args.phi_a if args.phi_a is not None else 1.0,
                             args.phi_b if args.phi_b is not None else 1.0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_phi(p, required=False):
    p.add_argument("--phi", type=float, help="fitness ratio phi_A / phi_B")
    p.add_argument("--phi-a", dest="phi_a", type=float, help="fitness of word A")
    p.add_argument("--phi-b", dest="phi_b", type=float, help="fitness of word B")


def _add_experiment(p):
    p.add_argument("--config", help="JSON file mirroring the flags; flags override it")
    p.add_argument("--graph", help="family:size, e.g. complete:20, cycle:100, torus2d:20, path:50")
    _add_phi(p)
    p.add_argument("--init", help="single-ab:<v> | single-ab:all | step[:k] | custom:A,B,AB,...")
    p.add_argument("--replicates", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--max-events", dest="max_events", type=int)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--strict-timeout", dest="strict_timeout", action="store_true", default=None,
                   help="exclude timed-out replicates instead of counting them as failures")
    p.add_argument("--workers", type=int, help="threads for replicates (default: CPU count)")


def _experiment(args) -> ExperimentConfig:
    d = {}
    if args.config:
        try:
            d.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    for key in ("graph", "init", "replicates", "seed", "max_events", "out", "format", "strict_timeout"):
        v = getattr(args, key)
        if v is not None:
            d[key] = v
    if args.phi is not None or args.phi_a is not None or args.phi_b is not None:
        for k in ("phi", "phi_a", "phi_b", "phi-a", "phi-b"):
            d.pop(k, None)
        d.update({k: getattr(args, k) for k in ("phi", "phi_a", "phi_b") if getattr(args, k) is not None})
    try:
        return ExperimentConfig.from_dict(d)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def cmd_probabilities(args):
    pr = derive(_params(args))
    names = [s.name for s in State]
    p = {x: {y: float(pr.p[State[x], State[y]]) for y in names} for x in names}
    return dumps({"phi": pr.phi, "phi_AB": pr.phi_AB, "p": p, "q_A": pr.q_A, "q_B": pr.q_B, "r": pr.r})


def _triple(text):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("expected u_A,u_B,u_AB")
    return vals


def cmd_meanfield(args):
    params = _params(args)
    out = {"phi": params.phi, "eigenvalues_eB": list(meanfield.jacobian_eB_eigenvalues(params))}
    if 1 / 3 < params.phi < 3:
        fp = meanfield.interior_fixed_point(params)
        out["interior_fixed_point"] = {"u": fp.u, "eigenvalues": np.real(fp.eigenvalues),
                                       "converged": fp.converged, "saddle": fp.is_saddle}
    starts = args.u0 or []
    limits = []
    for i, u0 in enumerate(starts):
        traj = meanfield.integrate(u0, params, args.dt, args.t_max, args.sample_dt)
        limits.append({"u0": u0, "limit": traj.limit, "t_end": float(traj.t[-1])})
        if args.out_dir:
            Path(args.out_dir).mkdir(parents=True, exist_ok=True)
            Path(args.out_dir, f"trajectory_{i:03d}.csv").write_text(traj.to_csv())
    if starts:
        out["trajectories"] = limits
    return dumps(out)


def cmd_simulate(args):
    cfg = _experiment(args)
    g = from_spec(cfg.graph)
    from .config import initial_configurations

    starts, _ = initial_configurations(cfg, g)
    if len(starts) != 1:
        raise UsageError("simulate needs a single initial configuration (e.g. single-ab:0)")
    _, init = starts[0]
    res, traj = run(g, cfg.params, init, cfg.seed, cfg.max_events, args.record_stride)
    if traj is not None and args.trajectory:
        Path(args.trajectory).write_text(traj.to_csv())
    return dumps({"graph": cfg.graph, "phi": cfg.params.phi, "init": cfg.init, "seed": cfg.seed,
                  "kind": res.kind.value, "absorption_time": res.absorption_time,
                  "events_executed": res.events_executed,
                  "final_counts": {"n_A": res.final_counts[0], "n_B": res.final_counts[1],
                                   "n_AB": res.final_counts[2]}}), cfg.out


def cmd_invasion(args):
    cfg = _experiment(args)
    est = estimate_invasion(cfg, workers=args.workers)
    if cfg.format == "csv":
        rows = sweep(cfg, workers=args.workers)
        return rows_to_csv(rows), cfg.out
    return dumps(est.as_dict()), cfg.out


def cmd_sweep(args):
    cfg = _experiment(args)
    rows = sweep(cfg, phis=args.phis, sizes=args.sizes, workers=args.workers)
    return rows_to_csv(rows), cfg.out


def cmd_interface(args):
    params = _params(args)
    m = interface.build_model(params)
    out = {"phi": m.phi, "rates": m.rates, "pi": m.pi, "D": m.D, "speed": m.speed,
           "c_quadratic": interface.critical_quadratic(), "c_exact": interface.critical_exact()}
    if args.simulate:
        if args.lattice:
            tr = interface.simulate_restricted_lattice(params, args.lattice, args.simulate, args.seed,
                                                       args.record_stride)
        else:
            tr = interface.simulate_interface(params, args.simulate, args.seed, args.record_stride)
        out["simulation"] = {"t_max": tr.t_max, "seed": args.seed, "occupation": tr.occupation,
                             "speed": tr.speed, "speed_sigma": interface.speed_sigma(m, tr.t_max),
                             "events": tr.events}
        if args.trajectory:
            Path(args.trajectory).write_text(tr.to_csv())
    return dumps(out)


def cmd_complete(args):
    params = _params(args)
    N = args.N
    start = complete.CountState(0, N - 1, 1)
    out = {"N": N, "phi": params.phi, "mode": args.mode}
    if args.mode == "exact":
        out["p_A"] = complete.exact_absorption(N, params)[start]
    else:
        seeds = replicate_seeds(args.seed, 0, args.replicates)
        kinds, _, _ = complete.simulate_lumped_batch(N, params, start, seeds)
        est = EstimateWithCI.from_counts(int(np.count_nonzero(kinds == 0)), args.replicates)
        out["p_A"] = est.point
        out["ci"] = [est.ci_low, est.ci_high]
    if args.collision:
        c = complete.collision_experiment(N, params, args.replicates, args.seed)
        out["collision"] = {"point": c.point, "ci": [c.ci_low, c.ci_high]}
    return dumps(out)


def cmd_blocks(args):
    phi = args.phi
    lg, lb = blocks.interaction_rates(phi)
    out = {"phi": phi, "T": math.sqrt(phi), "lambda_good": lg, "lambda_bad": lb,
           "bound": blocks.block_bound(phi), "exact": blocks.block_probability_exact(phi)}
    if args.eps is not None:
        out["eps"] = args.eps
        out["min_phi"] = blocks.min_phi_for(args.eps)
    return dumps(out)


def _floats(text):
    return [float(x) for x in text.split(",") if x]


def _ints(text):
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="naming-game", description="Biased naming game: exact analysis and simulation.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("probabilities", help="derived interaction probabilities")
    _add_phi(s)
    s.set_defaults(func=cmd_probabilities)

    s = sub.add_parser("meanfield", help="mean-field eigenvalues and trajectories")
    _add_phi(s)
    s.add_argument("--u0", type=_triple, action="append", help="initial state u_A,u_B,u_AB (repeatable)")
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--t-max", dest="t_max", type=float, default=200.0)
    s.add_argument("--sample-dt", dest="sample_dt", type=float, default=0.1)
    s.add_argument("--out-dir", dest="out_dir", help="write one trajectory CSV per initial state")
    s.set_defaults(func=cmd_meanfield)

    s = sub.add_parser("simulate", help="one run of the event-driven simulator")
    _add_experiment(s)
    s.add_argument("--record-stride", dest="record_stride", type=float)
    s.add_argument("--trajectory", help="CSV path for the sampled counts (needs --record-stride)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("invasion", help="Monte Carlo invasion probability")
    _add_experiment(s)
    s.set_defaults(func=cmd_invasion)

    s = sub.add_parser("sweep", help="invasion estimates over a phi grid and/or size grid")
    _add_experiment(s)
    s.add_argument("--phis", type=_floats, help="comma-separated phi values")
    s.add_argument("--sizes", type=_ints, help="comma-separated graph sizes")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("interface", help="1D interface chain, speed and critical ratios")
    _add_phi(s)
    s.add_argument("--simulate", type=float, metavar="T_MAX", help="also simulate up to T_MAX")
    s.add_argument("--lattice", type=int, metavar="W", help="simulate the restricted lattice with half-width W")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--record-stride", dest="record_stride", type=float)
    s.add_argument("--trajectory", help="CSV path for t,x,type samples (needs --record-stride)")
    s.set_defaults(func=cmd_interface)

    s = sub.add_parser("complete", help="complete graph: exact or Monte Carlo invasion, collisions")
    _add_phi(s)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--mode", choices=("exact", "mc"), default="exact")
    s.add_argument("--replicates", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--collision", action="store_true", help="also estimate the collision probability")
    s.set_defaults(func=cmd_complete)

    s = sub.add_parser("blocks", help="block-construction probabilities")
    s.add_argument("--phi", type=float, required=True)
    s.add_argument("--eps", type=float)
    s.set_defaults(func=cmd_blocks)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        res = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"naming-game: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"naming-game: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text, out = res if isinstance(res, tuple) else (res, None)
    _emit(text, out)
    return 0
