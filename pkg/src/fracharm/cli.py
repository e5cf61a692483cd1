"""Command-line front end.

Subcommands:
  verify <id> --config FILE [--seed S] [--out DIR]
      run one registered experiment; writes <id>.report.json and
      <id>.trials.csv into DIR and prints a one-line verdict.
  norm CSV --p P | --p-limit L --p-amplitude A  [--lo LO] [--h H] [--power-weight E]
      Lebesgue or Luxemburg norm of a sampled 1D function (one value per line).
  weight-const --kind K [...] (--ap P | --rh S | --apq P Q)...
      Muckenhoupt / reverse-Hoelder constants with stability verdicts, as JSON.
  kernel-check --m M --n N --gamma G [--order N0]
      measured size and smoothness constants of the model kernel, as JSON.
  list
      registered experiment ids with one-line summaries.

Exit codes: 0 all requested checks passed, 1 a report failed its gates,
2 usage, config, or hypothesis errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import ConfigError, ExperimentConfig
from .experiments import EXPERIMENT_SUMMARIES, EXPERIMENTS, HypothesisError, run_experiment
from .grid import GridFunction, weighted_lp_quasinorm
from .kernels import KenigSteinKernel, kernel_size_check, kernel_smoothness_check
from .reports import json_safe, write_report_json, write_trials_csv
from .varexp import ExponentFunction, luxemburg_norm
from .weights import Weight, ap_constant, apq_constant, rh_constant, weight_cube_family

__all__ = ["cli_main", "main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracharm",
        description="numerical checks for fractional-operator norm inequalities")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run one registered experiment")
    p_verify.add_argument("experiment", help="registered experiment id")
    p_verify.add_argument("--config", required=True, help="JSON config file")
    p_verify.add_argument("--seed", type=int, default=None,
                          help="override the corpus seed")
    p_verify.add_argument("--out", default=".", help="output directory")

    p_norm = sub.add_parser("norm", help="norm of a sampled 1D function")
    p_norm.add_argument("csv", help="file with one sample value per line")
    p_norm.add_argument("--p", type=float, default=None,
                        help="constant Lebesgue exponent")
    p_norm.add_argument("--p-limit", type=float, default=None,
                        help="log-decay exponent: limit at infinity")
    p_norm.add_argument("--p-amplitude", type=float, default=None,
                        help="log-decay exponent: amplitude at the origin")
    p_norm.add_argument("--lo", type=float, default=-8.0,
                        help="left endpoint of the sample box")
    p_norm.add_argument("--h", type=float, default=2.0 ** -8, help="grid step")
    p_norm.add_argument("--power-weight", type=float, default=None,
                        help="weight |x|^E on the constant-exponent norm")

    p_w = sub.add_parser("weight-const", help="weight constants with stability")
    p_w.add_argument("--kind", choices=("constant", "power"), default="power")
    p_w.add_argument("--value", type=float, default=1.0,
                     help="constant weight value")
    p_w.add_argument("--exponent", type=float, default=0.0,
                     help="power weight exponent")
    p_w.add_argument("--multiplier", type=float, default=1.0)
    p_w.add_argument("--ap", type=float, default=None, metavar="P",
                     help="Muckenhoupt constant at order P")
    p_w.add_argument("--rh", type=float, default=None, metavar="S",
                     help="reverse-Hoelder constant at order S")
    p_w.add_argument("--apq", type=float, nargs=2, default=None,
                     metavar=("P", "Q"), help="off-diagonal constant at (P, Q)")
    p_w.add_argument("--lo", type=float, default=-8.0)
    p_w.add_argument("--hi", type=float, default=8.0)
    p_w.add_argument("--h", type=float, default=2.0 ** -8)

    p_k = sub.add_parser("kernel-check", help="model-kernel decay constants")
    p_k.add_argument("--m", type=int, required=True)
    p_k.add_argument("--n", type=int, required=True)
    p_k.add_argument("--gamma", type=float, required=True)
    p_k.add_argument("--order", type=int, default=1,
                     help="derivative order for the smoothness constant")
    p_k.add_argument("--samples", type=int, default=400)
    p_k.add_argument("--seed", type=int, default=0)

    sub.add_parser("list", help="registered experiment ids")
    return parser


def _print_json(payload: dict):
    print(json.dumps(json_safe(payload), indent=2, sort_keys=True))


def _cmd_verify(args) -> int:
    if args.experiment not in EXPERIMENTS:
        known = ", ".join(sorted(EXPERIMENTS))
        print(f"error: unknown experiment {args.experiment!r} (known: {known})",
              file=sys.stderr)
        return 2
    cfg = ExperimentConfig.from_json(args.config)
    if cfg.experiment != args.experiment:
        print(f"error: config file is for {cfg.experiment!r}, "
              f"asked to verify {args.experiment!r}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    report = run_experiment(cfg)

    os.makedirs(args.out, exist_ok=True)
    report_path = os.path.join(args.out, f"{args.experiment}.report.json")
    csv_path = os.path.join(args.out, f"{args.experiment}.trials.csv")
    write_report_json(report_path, report)
    write_trials_csv(csv_path, report.trial_rows())

    verdict = "PASS" if report.passed else "FAIL"
    if hasattr(report, "max_ratio"):
        detail = (f"max_ratio={report.max_ratio:.6g} "
                  f"mean_ratio={report.mean_ratio:.6g} "
                  f"slope={report.slope:.3g} rows={len(report.rows)}")
    elif hasattr(report, "final_constant"):
        detail = (f"final={report.final_constant:.6g} "
                  f"steps={len(report.steps)}")
    else:
        detail = (f"lower={report.lower:.6g} upper={report.upper:.6g} "
                  f"partition={report.partition_ok}")
    print(f"{args.experiment}: {verdict} {detail} -> {report_path}")
    return 0 if report.passed else 1


def _cmd_norm(args) -> int:
    try:
        samples = np.loadtxt(args.csv, dtype=float, ndmin=1)
    except (OSError, ValueError) as e:
        print(f"error: {args.csv}: {e}", file=sys.stderr)
        return 2
    if samples.ndim != 1 or samples.size == 0:
        print("error: expected a nonempty single-column file", file=sys.stderr)
        return 2
    box = ((args.lo, args.lo + args.h * samples.size),)
    f = GridFunction(box, args.h, samples)
    variable = args.p_limit is not None or args.p_amplitude is not None
    if variable == (args.p is not None):
        print("error: give either --p or both --p-limit and --p-amplitude",
              file=sys.stderr)
        return 2
    if variable:
        if args.p_limit is None or args.p_amplitude is None:
            print("error: --p-limit and --p-amplitude go together",
                  file=sys.stderr)
            return 2
        if args.power_weight is not None:
            print("error: --power-weight applies to constant exponents only",
                  file=sys.stderr)
            return 2
        pex = ExponentFunction.log_decay(args.p_limit, args.p_amplitude)
        value = luxemburg_norm(f, pex)
    else:
        wg = None
        if args.power_weight is not None:
            wg = Weight.power(args.power_weight).sample(box, args.h)
        value = weighted_lp_quasinorm(f, args.p, wg)
    print(f"{value!r}")
    return 0


def _cmd_weight_const(args) -> int:
    if args.kind == "constant":
        w = Weight.constant(args.value)
    else:
        w = Weight.power(args.exponent, multiplier=args.multiplier)
    if args.ap is None and args.rh is None and args.apq is None:
        print("error: request at least one of --ap, --rh, --apq",
              file=sys.stderr)
        return 2
    family = weight_cube_family(
        ((args.lo, args.hi),),
        int(np.ceil(np.log2(8.0 * args.h))),
        int(np.floor(np.log2(args.hi - args.lo))) - 1,
        args.h)
    payload: dict = {"weight": w.descriptor()}
    all_stable = True
    for name, fn in (("ap", lambda: ap_constant(w, args.ap, family)),
                     ("rh", lambda: rh_constant(w, args.rh, family)),
                     ("apq", lambda: apq_constant(w, args.apq[0], args.apq[1],
                                                  family))):
        if getattr(args, name) is None:
            continue
        try:
            rep = fn()
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        payload[name] = rep.to_json_dict()
        all_stable = all_stable and rep.stable
    _print_json(payload)
    return 0 if all_stable else 1


def _cmd_kernel_check(args) -> int:
    try:
        kernel = KenigSteinKernel(m=args.m, n=args.n, gamma=args.gamma,
                                  order=args.order)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    size = kernel_size_check(kernel, args.samples, seed=args.seed)
    smooth = kernel_smoothness_check(kernel, args.order,
                                     max(100, args.samples // 2),
                                     seed=args.seed)
    _print_json({"kernel": kernel.descriptor(),
                 "size_constant": size,
                 "smoothness_constant": smooth})
    return 0


def _cmd_list(_args) -> int:
    width = max(len(name) for name in EXPERIMENTS)
    for name in sorted(EXPERIMENTS):
        print(f"{name:<{width}}  {EXPERIMENT_SUMMARIES[name]}")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        code = e.code
        return int(code) if code is not None else 0
    handlers = {
        "verify": _cmd_verify,
        "norm": _cmd_norm,
        "weight-const": _cmd_weight_const,
        "kernel-check": _cmd_kernel_check,
        "list": _cmd_list,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, HypothesisError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main():  # console-script entry point
    sys.exit(cli_main())
