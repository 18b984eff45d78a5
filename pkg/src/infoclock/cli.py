"""Command-line entry point: ``infoclock value | optimize | simulate | filter-demo``.

Exit codes: 0 success, 2 configuration error, 3 ill-posed problem,
4 solver failure, 1 anything else raised by the package.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import acquisition, montecarlo
from .clock import parse_clock_spec
from .closed_form import coefficients, value
from .errors import (ConfigError, DomainError, IllPosedProblemError, InadmissibleClockError,
                     InadmissibleProfileError, InfoClockError, NearSingularError, NoBracketError,
                     NonFiniteError, NoSignChangeError, SolverError)
from .filtering import estimate_correlation, read_path_csv
from .info_econ import cost_of_information, insider_bound, value_of_information, value_sweep
from .model import CARA, MarketParams, QuadraticCost, load_config, utility_to_dict

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_ILLPOSED, EXIT_SOLVER = 0, 1, 2, 3, 4

# defaults of the reference experiments
DEFAULT_T0 = 4.0
DEFAULT_SWEEP = "k=1:10:10"


def default_config():
    params = MarketParams.from_t0(DEFAULT_T0)
    return params, CARA(0.001), QuadraticCost(1.0)


# ------------------------------------------------------------------ output


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _emit(text: str, out, sidecar: dict | None = None):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text, encoding="utf-8", newline="\n")
    if sidecar is not None:
        path.with_suffix(".json").write_text(json_text(sidecar), encoding="utf-8", newline="\n")


def _params_dict(params: MarketParams, utility, cost):
    return {
        "market": {"r": params.r, "sigma": params.sigma, "mu0": params.mu0,
                   "sigma0_sq": params.sigma0_sq, "T": params.T, "x0": params.x0,
                   "t0": params.t0},
        "utility": utility_to_dict(utility),
        "cost": None if cost is None else {"kind": "quadratic", "lambda": cost.lam},
    }


# ---------------------------------------------------------------- commands


def _load(args):
    if getattr(args, "defaults", False) or args.config is None:
        if args.config is None and not getattr(args, "defaults", False):
            print("no --config given; using default parameters", file=sys.stderr)
        return default_config()
    return load_config(args.config)


def _clock(args, params):
    return parse_clock_spec(args.clock or "natural", params.t0, params.T)


def _parse_sweep(text: str):
    key, _, rng = text.partition("=")
    parts = rng.split(":")
    if key.strip() != "k" or len(parts) != 3:
        raise ConfigError(f"bad sweep {text!r}; expected k=<lo>:<hi>:<n>", key="sweep")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad sweep {text!r}: {exc}", key="sweep") from exc
    if n < 1 or not 1.0 <= lo <= hi:
        raise ConfigError("sweep needs 1 <= lo <= hi and n >= 1", key="sweep")
    return np.linspace(lo, hi, n)


def cmd_value(args) -> int:
    params, utility, cost = _load(args)
    sweep = args.sweep
    if sweep is None and args.defaults and args.clock is None:
        sweep = DEFAULT_SWEEP
    side = _params_dict(params, utility, cost)
    side["bound"] = insider_bound(params, utility)
    if args.coefficients:
        clock = _clock(args, params)
        co = coefficients(params, utility, clock)
        side["clock"] = args.clock or "natural"
        _emit(csv_text(["t", "a", "c"], zip(co.t, co.a, co.c)), args.out, side)
        return EXIT_OK
    if sweep is not None:
        ks = _parse_sweep(sweep)
        values, costs, nets = value_sweep(params, utility, ks, cost)
        if cost is None:
            costs = nets = np.full_like(ks, math.nan)
        side["sweep"] = sweep
        text = csv_text(["k", "value", "cost", "net"], zip(ks, values, costs, nets))
    else:
        clock = _clock(args, params)
        v = value_of_information(params, utility, clock)
        c = cost_of_information(cost, clock, params.T) if cost is not None else math.nan
        side["clock"] = args.clock or "natural"
        text = csv_text(["clock", "value", "cost", "net"], [[side["clock"], v, c, v - c]])
    _emit(text, args.out, side)
    return EXIT_OK


def cmd_optimize(args) -> int:
    params, utility, cost = _load(args)
    if cost is None:
        raise ConfigError("optimize needs a 'cost' section", key="cost")
    sol = acquisition.solve(params, utility, cost, steps=args.steps)
    check = acquisition.gateaux_check(sol, params, utility, cost)
    side = _params_dict(params, utility, cost)
    side.update({
        "status": sol.status,
        "shoot_param": sol.shoot_param,
        "y_star": sol.y_star,
        "value": sol.value,
        "cost_of_information": sol.cost,
        "net": sol.net,
        "residuals": sol.diagnostics,
        "gateaux": check,
    })
    if sol.y_star is not None:
        side["y_star_consistency"] = "PASS" if sol.diagnostics["fixed_point_pass"] else "FAIL"
    text = csv_text(["t", "tau", "tau_prime"], zip(sol.t, sol.tau, sol.dtau))
    _emit(text, args.out, side)
    return EXIT_OK


def _strategy(text: str):
    name, _, arg = text.partition(":")
    try:
        if name == "optimal" and not arg:
            return montecarlo.OptimalClosedForm()
        if name == "zero" and not arg:
            return montecarlo.Zero()
        if name == "scaled":
            return montecarlo.ScaledOptimal(float(arg))
        if name == "fraction":
            return montecarlo.ConstantFraction(float(arg))
    except ValueError as exc:
        raise ConfigError(f"bad strategy {text!r}: {exc}", key="strategy") from exc
    raise ConfigError(f"unknown strategy {text!r}; use optimal, zero, scaled:F or fraction:K",
                      key="strategy")


def _sim_config(args, n_paths, strategy=None):
    return montecarlo.SimConfig(
        n_paths=n_paths, n_steps=args.steps, master_seed=args.seed,
        strategy=strategy or montecarlo.OptimalClosedForm(), workers=args.workers,
        honor_env=args.seed is None)


def _rho_estimate(args, params, clock):
    if args.paths_csv is not None:
        t, Y, m = read_path_csv(args.paths_csv)
        rho_true = None
    else:
        path = montecarlo.simulate_path(params, clock, args.steps, args.seed)
        t, Y, m = path["t"], path["Y"], path["m"]
        rho_true = np.append(path["rho"], path["rho"][-1])
    prof = estimate_correlation(Y, m, args.window, t)
    rho_hat = prof.rho
    out = {"window": args.window, "n_points": int(t.size),
           "rho_hat_mean": float(np.mean(rho_hat))}
    cols = [t, rho_hat]
    header = ["t", "rho_hat"]
    if rho_true is not None:
        out["rho_true_mean"] = float(np.mean(rho_true))
        out["max_abs_error"] = float(np.max(np.abs(rho_hat - rho_true)))
        header = ["t", "rho", "rho_hat"]
        cols = [t, rho_true, rho_hat]
    return out, csv_text(header, zip(*cols))


def cmd_simulate(args) -> int:
    params, utility, cost = _load(args)
    clock = _clock(args, params)
    strategy = _strategy(args.strategy)
    report = montecarlo.simulate(params, utility, clock, _sim_config(args, args.paths, strategy))
    out = report.to_dict()
    out["clock"] = args.clock or "natural"
    out.update(_params_dict(params, utility, cost))
    if args.check_closed_form:
        if not isinstance(strategy, montecarlo.OptimalClosedForm):
            raise ConfigError("--check-closed-form needs --strategy optimal", key="strategy")
        v = float(value(coefficients(params, utility, clock), 0.0, params.x0, params.mu0))
        z = abs(report.mean_utility - v) / report.std_error if report.std_error > 0 else math.inf
        out["closed_form"] = {"value": v, "z_score": z, "result": "PASS" if z <= 3.0 else "FAIL"}
    rho_csv = None
    if args.estimate_rho:
        out["rho_estimate"], rho_csv = _rho_estimate(args, params, clock)
    text = json_text(out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        path = Path(args.out)
        path.write_text(text, encoding="utf-8", newline="\n")
        if rho_csv is not None:
            path.with_name(path.stem + ".rho.csv").write_text(rho_csv, encoding="utf-8",
                                                              newline="\n")
    return EXIT_OK


def cmd_filter_demo(args) -> int:
    params, utility, cost = _load(args)
    clock = _clock(args, params)
    path = montecarlo.simulate_path(params, clock, args.steps, args.seed)
    cols = ["t", "Y", "m", "Z", "true_mu", "var"]
    side = _params_dict(params, utility, cost)
    side.update({"clock": args.clock or "natural", "seed": path["seed"], "n_steps": args.steps})
    _emit(csv_text(cols, zip(*(path[c] for c in cols))), args.out, side)
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the command name
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON config path")
    common.add_argument("--clock", default=argparse.SUPPRESS,
                        help="natural | linear:k=<float> | grid:<path.csv>")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    common.add_argument("--seed", type=_u64, default=argparse.SUPPRESS,
                        help="master seed (overrides INFOCLOCK_SEED)")

    p = argparse.ArgumentParser(prog="infoclock", description=__doc__.splitlines()[0])
    p.add_argument("--config", default=None, help=argparse.SUPPRESS)
    p.add_argument("--clock", default=None, help=argparse.SUPPRESS)
    p.add_argument("--out", default=None, help=argparse.SUPPRESS)
    p.add_argument("--seed", type=_u64, default=None, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("value", parents=[common], help="value, cost and net of a clock")
    v.add_argument("--sweep", help="linear-clock sweep k=<lo>:<hi>:<n>")
    v.add_argument("--defaults", action="store_true",
                   help="use the default parameters (and k=1:10:10 sweep)")
    v.add_argument("--coefficients", action="store_true",
                   help="emit the value-function coefficients t, a, c of the clock instead")
    v.set_defaults(func=cmd_value)

    o = sub.add_parser("optimize", parents=[common], help="optimal acquisition schedule")
    o.add_argument("--steps", type=int, default=acquisition.ODE_STEPS)
    o.add_argument("--defaults", action="store_true")
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo expected utility")
    s.add_argument("--paths", type=int, default=100_000)
    s.add_argument("--steps", type=int, default=1000)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--strategy", default="optimal",
                   help="optimal | zero | scaled:<f> | fraction:<k>")
    s.add_argument("--check-closed-form", action="store_true")
    s.add_argument("--estimate-rho", action="store_true",
                   help="rolling correlation estimate on one path")
    s.add_argument("--window", type=int, default=256)
    s.add_argument("--paths-csv", default=None, help="t,Y,m CSV for --estimate-rho")
    s.add_argument("--defaults", action="store_true")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("filter-demo", parents=[common], help="one filtered path")
    f.add_argument("--steps", type=int, default=1000)
    f.add_argument("--defaults", action="store_true")
    f.set_defaults(func=cmd_filter_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, InadmissibleClockError, InadmissibleProfileError) as exc:
        key = getattr(exc, "key", None)
        print(f"config error{f' [{key}]' if key else ''}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IllPosedProblemError, NearSingularError) as exc:
        print(f"ill-posed problem: {exc}", file=sys.stderr)
        return EXIT_ILLPOSED
    except (SolverError, NoBracketError, NonFiniteError, NoSignChangeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except InfoClockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
