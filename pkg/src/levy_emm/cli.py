"""Batch front end: spec files in, machine-readable reports out.

Five subcommands map one-to-one onto library entry points::

    levy-emm solve    spec.json [--market linear|geometric]
    levy-emm domain   spec.json
    levy-emm approx   spec.json [--n-max N] [--penalty quadratic|power:P]
    levy-emm convert  spec.json --direction g2l|l2g
    levy-emm mc-check spec.json [--samples N] [--seed S] [--kappa auto|V]

Every run prints one JSON report (or writes it with ``--out``) that echoes
the parsed spec, the resolved flags, and the results, so the report alone
reproduces the run.  Exit codes: 0 success (including "no martingale
measure exists" verdicts — those are answers, not failures), 2 for invalid
input, 3 when the numerics could not deliver.  All entropies are in nats.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from typing import Optional

import numpy as np

from . import __version__
from .approximation import (PenaltyFamily, _quick_validate_penalty,
                            approx_sequence, check_penalty)
from .errors import LevyEmmError, ValidationError
from .esscher import EsscherStatus, esscher_entropy, memm_report, solve_linear_emm
from .levy_core.quadrature import DEFAULT_SETTINGS, QuadratureSettings
from .levy_core.triplets import geometric_to_linear, linear_to_geometric
from .mc_oracle import (SimConfig, entropy_estimate, martingale_defect,
                        pathwise_log_zn, sample_terminal)
from .mgf_analysis import classify_esscher_parameter, exp_moment_interval
from .modelspec import ModelSpec, load_model, measure_to_dict, serialize_model

__all__ = ["main", "build_parser"]

_TRACE_COLUMNS = ("n", "kappa_n", "entropy_n", "correction_n",
                  "entropy_vs_P", "mass_gap")


# ---------------------------------------------------------------------------
# flag parsing helpers
# ---------------------------------------------------------------------------


def _penalty_from_flag(text: str) -> PenaltyFamily:
    if text == "quadratic":
        return PenaltyFamily.default_quadratic()
    if text.startswith("power:"):
        try:
            exponent = float(text.split(":", 1)[1])
        except ValueError:
            raise ValidationError(
                f"--penalty: bad exponent in {text!r}") from None
        return PenaltyFamily.power(exponent)
    raise ValidationError(
        f"--penalty: expected 'quadratic' or 'power:P', got {text!r}")


def _schedule_up_to(n_max: int) -> tuple:
    if n_max < 1:
        raise ValidationError(f"--n-max: must be >= 1, got {n_max}")
    schedule = []
    n = 1
    while n <= n_max:
        schedule.append(n)
        n *= 2
    if schedule[-1] != n_max:
        schedule.append(n_max)
    return tuple(schedule)


def _kappa_from_flag(text: str) -> Optional[float]:
    if text == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise ValidationError(
            f"--kappa: expected 'auto' or a number, got {text!r}") from None


def _quad_settings(args: argparse.Namespace) -> QuadratureSettings:
    try:
        return QuadratureSettings(abs_tol=args.quad_abs_tol,
                                  rel_tol=args.quad_rel_tol)
    except ValueError as exc:
        raise ValidationError(f"quadrature tolerances: {exc}") from exc


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------


def _report_skeleton(command: str, spec: Optional[ModelSpec],
                     flags: dict) -> dict:
    return {
        "report_version": 1,
        "tool": {"name": "levy-emm", "version": __version__},
        "command": command,
        "units": "nats",
        "flags": flags,
        "spec": None if spec is None else serialize_model(spec),
    }


def _emit(report: dict, out_path: Optional[str]) -> None:
    text = json.dumps(report, indent=2, allow_nan=False) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_trace_csv(path: str, steps: list) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_TRACE_COLUMNS)
        writer.writeheader()
        for step in steps:
            writer.writerow({k: step[k] for k in _TRACE_COLUMNS})


def _finite_or_none(x: Optional[float]) -> Optional[float]:
    """JSON has no inf/nan; divergent scalar diagnostics become null."""
    if x is None or x != x or x in (float("inf"), float("-inf")):
        return None
    return x


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_solve(spec: ModelSpec, args: argparse.Namespace,
               q: QuadratureSettings) -> dict:
    market = args.market or spec.market
    return memm_report(spec.triplet, spec.T, q, market=market)


def _cmd_domain(spec: ModelSpec, args: argparse.Namespace,
                q: QuadratureSettings) -> dict:
    interval = exp_moment_interval(spec.triplet, q)
    status = classify_esscher_parameter(spec.triplet, spec.T, q)
    return {"interval": interval.describe(),
            "esscher_parameter": status.describe()}


def _cmd_approx(spec: ModelSpec, args: argparse.Namespace,
                q: QuadratureSettings) -> dict:
    penalty = _penalty_from_flag(args.penalty)
    _quick_validate_penalty(penalty, 1)
    schedule = _schedule_up_to(args.n_max)
    trace = approx_sequence(spec.triplet, spec.T, penalty, schedule, q)
    results = trace.describe()
    results["penalty"] = penalty.kind
    results["schedule"] = list(schedule)
    if args.check_penalty:
        results["penalty_diagnostics"] = check_penalty(
            penalty, spec.nu, q).describe()
    if args.csv:
        _write_trace_csv(args.csv, results["steps"])
        results["csv_path"] = args.csv
    return results


def _cmd_convert(spec: ModelSpec, args: argparse.Namespace,
                 q: QuadratureSettings) -> dict:
    if args.direction == "g2l":
        converted = geometric_to_linear(spec.triplet, q)
    else:
        converted = linear_to_geometric(spec.triplet, q)
    out = {"direction": args.direction,
           "input": spec.triplet.describe(),
           "converted": converted.describe()}
    try:
        out["converted_nu_spec"] = measure_to_dict(converted.nu)
    except ValidationError:
        out["converted_nu_spec"] = None
    return out


def _auto_kappa(spec: ModelSpec, q: QuadratureSettings) -> float:
    res = solve_linear_emm(spec.triplet, spec.T, q)
    if res.status in (EsscherStatus.EMM_EXISTS, EsscherStatus.P_IS_ALREADY_EMM):
        return float(res.kappa0)
    raise ValidationError(
        f"--kappa auto: no martingale tilt exists ({res.status.value}); "
        "pass an explicit --kappa value")


def _cmd_mc_check(spec: ModelSpec, args: argparse.Namespace,
                  q: QuadratureSettings) -> dict:
    kappa = _kappa_from_flag(args.kappa)
    source = "flag"
    if kappa is None:
        kappa = _auto_kappa(spec, q)
        source = "auto"
    cfg = SimConfig(T=spec.T, n_samples=args.samples, epsilon=args.epsilon,
                    seed=args.seed, small_jump_mode=args.small_jumps,
                    record_jumps=args.zn is not None)
    pack = sample_terminal(spec.triplet, cfg, q)
    defect, defect_se = martingale_defect(pack, kappa)
    entropy, entropy_se = entropy_estimate(pack, kappa)
    try:
        analytic = esscher_entropy(spec.triplet, spec.T, kappa, q)
    except LevyEmmError:
        analytic = None
    results = {
        "kappa": kappa,
        "kappa_source": source,
        "n_samples": pack.n,
        "seed": args.seed,
        "epsilon": args.epsilon,
        "small_jump_mode": args.small_jumps,
        "martingale_defect": {
            "estimate": defect, "se": defect_se,
            "z": _finite_or_none(defect / defect_se if defect_se else None)},
        "entropy": {
            "estimate": entropy, "se": entropy_se,
            "analytic": analytic,
            "z": _finite_or_none((entropy - analytic) / entropy_se
                                 if analytic is not None and entropy_se
                                 else None)},
    }
    if args.zn is not None:
        if args.zn < 1:
            raise ValidationError(f"--zn: must be >= 1, got {args.zn}")
        penalty = _penalty_from_flag(args.penalty)
        zn = pathwise_log_zn(pack, penalty, args.zn, spec.nu, q)
        zn_values = np.exp(zn.log_zn)
        results["pathwise_zn"] = {
            "n": args.zn,
            "penalty": penalty.kind,
            "zn_mean": zn.zn_mean,
            "zn_se": zn.zn_se,
            "z_vs_one": _finite_or_none((zn.zn_mean - 1.0) / zn.zn_se
                                        if zn.zn_se else None),
            "uniform_bound": zn.uniform_bound,
            "max_zn": float(zn_values.max()),
            "bound_holds": bool((zn_values <= zn.uniform_bound).all()),
        }
    return results


# ---------------------------------------------------------------------------
# parser / entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levy-emm",
        description="Martingale-measure analysis for exponential and "
                    "stochastic-exponential Levy markets.")
    parser.add_argument("--version", action="version",
                        version=f"levy-emm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("spec", help="path to a model spec JSON file")
        p.add_argument("--out", default=None,
                       help="write the JSON report here instead of stdout")
        p.add_argument("--quad-abs-tol", type=float, default=1e-12,
                       help="absolute quadrature tolerance (default 1e-12)")
        p.add_argument("--quad-rel-tol", type=float, default=1e-11,
                       help="relative quadrature tolerance (default 1e-11)")

    p_solve = sub.add_parser(
        "solve", help="minimal-entropy martingale verdict")
    common(p_solve)
    p_solve.add_argument("--market", choices=("linear", "geometric"),
                         default=None,
                         help="override the market kind declared in the spec")

    p_domain = sub.add_parser(
        "domain", help="exponential-moment interval and tilt classification")
    common(p_domain)

    p_approx = sub.add_parser(
        "approx", help="tempered approximation trace")
    common(p_approx)
    p_approx.add_argument("--n-max", type=int, default=4096,
                          help="largest relaxation index (default 4096)")
    p_approx.add_argument("--penalty", default="quadratic",
                          help="'quadratic' or 'power:P' with P > 1")
    p_approx.add_argument("--csv", default=None,
                          help="also write the trace as CSV to this path")
    p_approx.add_argument("--check-penalty", action="store_true",
                          help="include numerical penalty diagnostics")

    p_convert = sub.add_parser(
        "convert", help="switch between log-price and stochastic-exponential "
                        "representations")
    common(p_convert)
    p_convert.add_argument("--direction", choices=("g2l", "l2g"),
                           required=True,
                           help="g2l: log-price to driver; l2g: inverse")

    p_mc = sub.add_parser(
        "mc-check", help="Monte Carlo validation of a tilt")
    common(p_mc)
    p_mc.add_argument("--samples", type=int, default=100_000,
                      help="number of terminal draws (default 100000)")
    p_mc.add_argument("--seed", type=int, default=0,
                      help="root seed (default 0)")
    p_mc.add_argument("--kappa", default="auto",
                      help="'auto' (solve for the martingale tilt) or a value")
    p_mc.add_argument("--epsilon", type=float, default=0.01,
                      help="small-jump cutoff for density measures "
                           "(default 0.01)")
    p_mc.add_argument("--small-jumps", choices=("gaussian", "drop"),
                      default="gaussian",
                      help="handling of sub-cutoff jumps (default gaussian)")
    p_mc.add_argument("--zn", type=int, default=None,
                      help="also evaluate the pathwise tempering density "
                           "at this relaxation index")
    p_mc.add_argument("--penalty", default="quadratic",
                      help="penalty family for --zn "
                           "('quadratic' or 'power:P')")
    return parser


_DISPATCH = {
    "solve": _cmd_solve,
    "domain": _cmd_domain,
    "approx": _cmd_approx,
    "convert": _cmd_convert,
    "mc-check": _cmd_mc_check,
}


def _flag_echo(args: argparse.Namespace) -> dict:
    skip = {"command", "spec", "out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    report = _report_skeleton(args.command, None, _flag_echo(args))
    started = time.perf_counter()
    try:
        spec = load_model(args.spec)
        report["spec"] = serialize_model(spec)
        quad = _quad_settings(args)
        report["results"] = _DISPATCH[args.command](spec, args, quad)
        code = 0
    except ValidationError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = 2
    except LevyEmmError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = 3
    report["timings"] = {"seconds": round(time.perf_counter() - started, 6)}
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
