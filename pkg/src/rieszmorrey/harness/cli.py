"""Command-line entry point.

Exit codes: 0 when the command ran and its verdict is positive or not
applicable, 1 when a checked condition failed, 2 for configuration and
precondition errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from ..errors import ConfigError, DivergenceError, EvaluationError, PreconditionError, RieszMorreyError
from ..kernel import GrowthSpec, Kernel, check_doubling, check_growth, tail_integral
from ..operators import riesz_apply
from ..reports import ConditionReport, jsonable
from ..spaces.norms import morrey_norm_global, morrey_norm_local
from ..weights import apq_characteristic, holder_lower_bound_check
from . import config as config_mod
from .report import render, render_conditions, write_text
from .runner import run_conditions, run_experiment

EXIT_OK, EXIT_CONDITION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="experiment config (TOML)")
    p.add_argument("--preset", help=f"shipped preset: {', '.join(config_mod.preset_names())}")
    p.add_argument("--out", help="output path (default: the config's output path, else stdout)")
    p.add_argument("--format", choices=("json", "csv"), help="output format")
    p.add_argument("--refine", type=int, help="grid refinement factor for stability passes")
    p.add_argument("--seed", type=int, help="seed for sampled diagnostics")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for experiment rows")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rieszmorrey", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-kernel", help="tail integral, growth and doubling checks of the kernel")
    _common(p)
    p.add_argument("--alpha", type=float, help="use the power kernel t^alpha instead of a config")
    p.add_argument("--n", type=int, default=1, help="dimension for --alpha")
    p.add_argument("--growth", type=float, nargs=3, metavar=("K1", "K2", "C"), default=(1.0, 4.0, math.inf),
                   help="growth parameters; C = inf only asks for a finite constant")

    p = sub.add_parser("check-weight", help="A_{p,q} characteristic and the Hoelder lower bound")
    _common(p)

    p = sub.add_parser("check-conditions", help="all sufficiency conditions of an experiment")
    _common(p)

    p = sub.add_parser("norm", help="source-space norm of every configured test function")
    _common(p)

    p = sub.add_parser("potential", help="I_rho f on a line of points, as CSV x,value,est_error")
    _common(p)
    p.add_argument("--function", help="function id (default: the first configured function)")
    p.add_argument("--x", type=float, nargs=3, metavar=("LO", "HI", "NUM"), default=(-2.0, 2.0, 9),
                   help="evenly spaced evaluation points along the first axis")

    p = sub.add_parser("experiment", help="run the configured experiment and emit a report")
    _common(p)
    return parser


def _load(args) -> config_mod.ExperimentConfig:
    if args.config is None and args.preset is None:
        raise ConfigError("need --config or --preset")
    cfg = config_mod.load(args.config, args.preset)
    if args.refine is not None or args.seed is not None:
        cfg = cfg.with_overrides(refine=args.refine, seed=args.seed)
    return cfg


def _emit(text: str, args, cfg=None):
    path = args.out or (cfg.output_path if cfg is not None else None)
    if path:
        write_text(text, path)
    else:
        sys.stdout.write(text)


def _fmt(args, cfg) -> str:
    return args.format or (cfg.output_format if cfg is not None else "json")


def _conditions_exit(reports) -> int:
    return EXIT_OK if all(r.holds for r in reports) else EXIT_CONDITION


def cmd_check_kernel(args) -> int:
    if args.alpha is not None:
        kernel = Kernel.power(args.alpha, args.n)
    else:
        kernel = _load(args).kernel
        if kernel is None:
            raise ConfigError("config has no kernel")
    tail = tail_integral(kernel)
    reports = [
        ConditionReport("tail-integral", holds=not tail.divergent,
                        empirical_C=math.inf if tail.divergent else tail.value, divergent=tail.divergent),
        check_growth(kernel, GrowthSpec(*args.growth)),
        check_doubling(kernel),
    ]
    _emit(render_conditions(reports), args)
    return _conditions_exit(reports)


def cmd_check_weight(args) -> int:
    cfg = _load(args)
    if cfg.weight is None:
        raise ConfigError("config has no weight")
    reports = [apq_characteristic(cfg.weight, cfg.exponents, refine=cfg.refine),
               holder_lower_bound_check(cfg.weight, cfg.exponents)]
    _emit(render_conditions(reports), args, cfg)
    return _conditions_exit(reports)


def cmd_check_conditions(args) -> int:
    cfg = _load(args)
    reports = run_conditions(cfg)
    _emit(render_conditions(reports), args, cfg)
    return _conditions_exit(reports)


def cmd_norm(args) -> int:
    cfg = _load(args)
    e, w = cfg.exponents, cfg.weight
    if cfg.kind in ("spanne", "weak-type"):
        norm = lambda f: morrey_norm_local(f, e.p, cfg.phi1, w, e.p, cfg.x0, cfg.r_grid, cfg.refine)
    elif cfg.kind == "adams":
        centers = cfg.centers if cfg.centers is not None else np.asarray([cfg.x0])
        norm = lambda f: morrey_norm_global(f, e.p, cfg.phi.power_of(1 / e.p), w, 1.0, centers, cfg.r_grid,
                                            cfg.refine)
    else:
        raise ConfigError(f"kind {cfg.kind!r} has no source Morrey norm")
    rows = []
    for fid, f in cfg.functions:
        res = norm(f)
        rows.append({"function_id": fid, **res.to_dict()})
    if _fmt(args, cfg) == "csv":
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["function_id", "norm", "refined", "stable"])
        for r in rows:
            out.writerow([r["function_id"], r["value"], r["refined_value"], "true" if r["stable"] else "false"])
        text = buf.getvalue()
    else:
        text = json.dumps(jsonable(rows), indent=2, sort_keys=True) + "\n"
    _emit(text, args, cfg)
    return EXIT_OK


def cmd_potential(args) -> int:
    cfg = _load(args)
    if not cfg.functions:
        raise ConfigError("config has no test functions")
    funcs = dict(cfg.functions)
    fid = args.function or cfg.functions[0][0]
    if fid not in funcs:
        raise ConfigError(f"unknown function id {fid!r}; available: {', '.join(funcs)}")
    lo, hi, num = args.x
    if not (num >= 1 and num == int(num)):
        raise ConfigError("--x needs an integer point count")
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(["x", "value", "est_error"])
    for x in np.linspace(lo, hi, int(num)):
        point = np.zeros(cfg.n)
        point[0] = x
        value, err = riesz_apply(funcs[fid], cfg.kernel, point, with_error=True)
        out.writerow([repr(float(x)), repr(float(value)), repr(float(err))])
    _emit(buf.getvalue(), args, cfg)
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = _load(args)
    report = run_experiment(cfg, jobs=max(args.jobs, 1))
    _emit(render(report, _fmt(args, cfg)), args, cfg)
    return EXIT_CONDITION if report.verdict == "conditions-fail" else EXIT_OK


COMMANDS = {
    "check-kernel": cmd_check_kernel,
    "check-weight": cmd_check_weight,
    "check-conditions": cmd_check_conditions,
    "norm": cmd_norm,
    "potential": cmd_potential,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, PreconditionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, EvaluationError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RieszMorreyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
