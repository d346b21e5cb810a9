"""Command-line surface: plot-ready CSV output for every computation.

Subcommands
-----------
mean      expected waits over single points or (b, d) sweeps
cdf       waiting-time CDFs (closed form, inverted, approximate, simulated)
simulate  replicated discrete-event runs with averaged empirical CDFs
kpi       optimal accumulation rates, delay sweeps, feasible regions
rerun     re-execute a previously written run manifest

Every file output is accompanied by a ``<out>.manifest.json`` manifest
recording the resolved parameters; analytic subcommands are bit-reproducible
from their manifests, simulation subcommands statistically reproducible
given the recorded seed (bit-identical for an identical seed).

Exit codes: 0 success, 2 invalid input, 3 infeasible KPI, 4 numerical
accuracy failure.

Default tolerances can be overridden with the environment variables
DAPQ_EPS_SERIES, DAPQ_EPS_ROOT, DAPQ_EPS_INVERT, and DAPQ_MAX_STATES.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import time
from typing import List, Optional

import numpy as np

from . import __version__, approx, kpi as kpi_mod, mean_wait, simulate, transforms
from .core import (
    AccuracyNotMet,
    DapqError,
    InvalidDelay,
    Kpi,
    MonotonicityViolation,
    NonConvergence,
    NumericalInstability,
    OutOfRange,
    QueueConfig,
    RootBracketFailure,
    ServiceKind,
    ToleranceConfig,
    TruncationOverflow,
    UnstableSystem,
    validate,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4

_VALIDATION_ERRORS = (OutOfRange, UnstableSystem, InvalidDelay)
_NUMERICAL_ERRORS = (
    AccuracyNotMet,
    TruncationOverflow,
    NumericalInstability,
    NonConvergence,
    RootBracketFailure,
    MonotonicityViolation,
)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _tol_from_env() -> ToleranceConfig:
    kwargs = {}
    for env, field, conv in (
        ("DAPQ_EPS_SERIES", "eps_series", float),
        ("DAPQ_EPS_ROOT", "eps_root", float),
        ("DAPQ_EPS_INVERT", "eps_invert", float),
        ("DAPQ_MAX_STATES", "max_states", int),
    ):
        raw = os.environ.get(env)
        if raw is not None:
            kwargs[field] = conv(raw)
    return ToleranceConfig(**kwargs)


def _parse_sweep(text: str) -> List[float]:
    """'a:b[:step]' inclusive sweep, or a single value."""
    if ":" not in text:
        return [float(text)]
    parts = text.split(":")
    if len(parts) == 2:
        lo, hi, step = float(parts[0]), float(parts[1]), 1.0
    elif len(parts) == 3:
        lo, hi, step = float(parts[0]), float(parts[1]), float(parts[2])
    else:
        raise OutOfRange(f"cannot parse sweep {text!r}")
    if step <= 0 or hi < lo:
        raise OutOfRange(f"cannot parse sweep {text!r}")
    n = int(round((hi - lo) / step))
    vals = [lo + i * step for i in range(n + 1)]
    if vals[-1] > hi + 1e-12:
        vals.pop()
    return vals


def _service(text: str) -> ServiceKind:
    return ServiceKind(text)


def _write_output(rows: List[List], header: List[str], args, manifest: dict) -> None:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    payload = buf.getvalue()
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(payload)
        manifest_path = getattr(args, "manifest", None) or out + ".manifest.json"
    else:
        sys.stdout.write(payload)
        manifest_path = getattr(args, "manifest", None)
    if manifest_path:
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _manifest(subcommand: str, params: dict, tol: ToleranceConfig, t0: float) -> dict:
    return {
        "subcommand": subcommand,
        "parameters": params,
        "tolerances": {
            "eps_series": tol.eps_series,
            "eps_root": tol.eps_root,
            "eps_invert": tol.eps_invert,
            "max_states": tol.max_states,
        },
        "version": __version__,
        "duration_s": round(time.monotonic() - t0, 6),
    }


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_mean(args, tol: ToleranceConfig) -> int:
    t0 = time.monotonic()
    service = _service(args.service)
    bs = _parse_sweep(args.b)
    ds = _parse_sweep(args.d)
    rows = []
    for d in ds:
        for b in bs:
            cfg = QueueConfig(args.lam1, args.lam2, args.mu, b=b, d=d, service=service)
            summary = mean_wait.dapq_means(cfg, tol)
            rows.append(
                [args.lam1, args.lam2, args.mu, service.value, b, d,
                 summary.mean_w1, summary.mean_w2, summary.conservation_residual]
            )
    params = {k: getattr(args, k) for k in ("lam1", "lam2", "mu", "service", "b", "d", "out")}
    _write_output(
        rows,
        ["lambda1", "lambda2", "mu", "service", "b", "d",
         "mean_w1", "mean_w2", "conservation_residual"],
        args,
        _manifest("mean", params, tol, t0),
    )
    return EXIT_OK


def _cdf_grid(args, cfg: QueueConfig, tol: ToleranceConfig) -> np.ndarray:
    if args.t_max is not None:
        return np.arange(0.0, args.t_max + 1e-12, args.dt)
    return transforms.default_grid(cfg, tol)


def cmd_cdf(args, tol: ToleranceConfig) -> int:
    t0 = time.monotonic()
    service = _service(args.service)
    cfg = QueueConfig(args.lam1, args.lam2, args.mu, b=args.b, d=args.d, service=service)
    rates = validate(cfg)
    kind = args.kind
    grid = _cdf_grid(args, cfg, tol)
    analytic_kinds = {"fcfs", "npq1", "npq2", "dapq2", "zexp1"}
    if kind in analytic_kinds and service is not ServiceKind.EXPONENTIAL:
        raise OutOfRange(f"analytic curve {kind!r} requires exponential service")

    if kind == "fcfs":
        lam = cfg.lambda1 + cfg.lambda2
        values = 1.0 - rates.rho * np.exp(-(cfg.mu - lam) * grid)
    elif kind == "npq1":
        values = 1.0 - rates.rho * np.exp(-(cfg.mu - cfg.lambda1) * grid)
    elif kind == "npq2":
        curve = transforms.class2_cdf_dapq(cfg.replace(b=0.0, d=0.0), grid, tol)
        values = curve.values
    elif kind == "dapq2":
        curve = transforms.class2_cdf_dapq(cfg, grid, tol)
        values = curve.values
    elif kind == "zexp1":
        summary = mean_wait.dapq_means(cfg, tol)
        z = approx.zexp_from_mean(rates.rho, summary.mean_w1)
        values = z.curve(grid).values
    elif kind in ("sim1", "sim2"):
        sim = simulate.SimConfig(
            queue=cfg, n_customers=args.n, burn_in=args.burn_in,
            replications=args.reps, seed=args.seed,
        )
        result = simulate.run_replicated(sim, grid)
        cls = 1 if kind == "sim1" else 2
        values = result.curves[cls].values
    else:
        raise OutOfRange(f"unknown curve kind {kind!r}")

    rows = [[t, v] for t, v in zip(grid, values)]
    params = {k: getattr(args, k) for k in
              ("kind", "lam1", "lam2", "mu", "service", "b", "d",
               "t_max", "dt", "n", "burn_in", "reps", "seed", "out")}
    _write_output(rows, ["t", "F"], args, _manifest("cdf", params, tol, t0))
    return EXIT_OK


def cmd_simulate(args, tol: ToleranceConfig) -> int:
    t0 = time.monotonic()
    service = _service(args.service)
    cfg = QueueConfig(args.lam1, args.lam2, args.mu, b=args.b, d=args.d, service=service)
    sim = simulate.SimConfig(
        queue=cfg, n_customers=args.n, burn_in=args.burn_in,
        replications=args.reps, seed=args.seed,
    )
    grid = _cdf_grid(args, cfg, tol)
    result = simulate.run_replicated(sim, grid)
    if args.raw:
        simulate.dump_raw_records(sim, args.raw)
    rows = []
    for i, t in enumerate(grid):
        row = [t]
        for cls in (1, 2):
            if cls in result.curves:
                row += [result.curves[cls].values[i], result.curve_se[cls][i]]
            else:
                row += [math.nan, math.nan]
        rows.append(row)
    summary_rows = [
        [cls, result.means.get(cls, math.nan), result.mean_se.get(cls, math.nan),
         result.replications]
        for cls in (1, 2)
    ]
    params = {k: getattr(args, k) for k in
              ("lam1", "lam2", "mu", "service", "b", "d", "n", "burn_in",
               "reps", "seed", "t_max", "dt", "out", "raw", "summary_out")}
    _write_output(
        rows,
        ["t", "cdf1", "se1", "cdf2", "se2"],
        args,
        _manifest("simulate", params, tol, t0),
    )
    if args.summary_out:
        with open(args.summary_out, "w", newline="") as fh:
            fh.write("class,mean,se,replications\n")
            for row in summary_rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
    return EXIT_OK


def cmd_kpi(args, tol: ToleranceConfig) -> int:
    t0 = time.monotonic()
    target = Kpi(target_w=args.w, compliance_p=args.p, class_index=args.cls)
    params = {k: getattr(args, k) for k in
              ("cls", "w", "p", "lam1", "lam2", "mu", "d", "sweep_d",
               "region", "resolution", "out")}
    manifest = lambda: _manifest("kpi", params, tol, t0)

    if args.region:
        region = kpi_mod.feasible_region(target, mu=args.mu, resolution=args.resolution, tol=tol)
        rows = [["lower", l1, l2] for l1, l2 in region.lower_boundary]
        rows += [["upper", l1, l2] for l1, l2 in region.upper_boundary]
        _write_output(rows, ["boundary", "lambda1", "lambda2"], args, manifest())
        return EXIT_OK

    if args.lam1 is None or args.lam2 is None:
        raise OutOfRange("--lam1 and --lam2 are required outside --region mode")
    cfg = QueueConfig(args.lam1, args.lam2, args.mu)
    d_values = _parse_sweep(args.sweep_d) if args.sweep_d else [args.d]
    points = kpi_mod.policy_sweep(cfg, target, d_values, tol)
    rows = [
        [pt.d, pt.b_star, pt.mean_w1, pt.mean_w2, int(pt.feasible)] for pt in points
    ]
    _write_output(rows, ["d", "b_star", "mean_w1", "mean_w2", "feasible"], args, manifest())
    if not any(pt.feasible for pt in points):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_rerun(args, _env_tol: ToleranceConfig) -> int:
    with open(args.manifest_file) as fh:
        manifest = json.load(fh)
    sub = manifest["subcommand"]
    params = dict(manifest["parameters"])
    params["out"] = args.out
    tol = ToleranceConfig(**manifest["tolerances"])  # recorded set, not the env
    argv = [sub]
    for key, val in params.items():
        if val is None or key == "out":
            continue
        if isinstance(val, bool):
            if val:
                argv.append(f"--{key.replace('_', '-')}")
            continue
        flag = "--class" if key == "cls" else "--" + key.replace("_", "-")
        argv += [flag, str(val)]
    if args.out:
        argv += ["--out", args.out]
    ns = _build_parser().parse_args(argv)
    return _DISPATCH[sub](ns, tol)


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _add_queue_flags(p: argparse.ArgumentParser, need_b: bool = True) -> None:
    p.add_argument("--lam1", type=float, required=True, help="class-1 arrival rate")
    p.add_argument("--lam2", type=float, required=True, help="class-2 arrival rate")
    p.add_argument("--mu", type=float, default=1.0, help="service rate (default 1)")
    p.add_argument("--service", choices=["exp", "det"], default="exp",
                   help="service-time law (default exp)")
    if need_b:
        p.add_argument("--b", type=float, default=0.0,
                       help="class-2 accumulation-rate ratio in [0,1]")
        p.add_argument("--d", type=float, default=0.0,
                       help="class-2 accumulation delay")


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=4000,
                   help="recorded services per replication (default 4000)")
    p.add_argument("--burn-in", type=int, default=1500, dest="burn_in",
                   help="services discarded before recording (default 1500)")
    p.add_argument("--reps", type=int, default=50,
                   help="independent replications (default 50)")
    p.add_argument("--seed", type=int, default=0, help="root RNG seed")


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t-max", type=float, default=None, dest="t_max",
                   help="grid endpoint (default: auto from occupancy)")
    p.add_argument("--dt", type=float, default=0.05, help="grid spacing (default 0.05)")


def _add_out_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=str, default=None,
                   help="CSV output path (default stdout)")
    p.add_argument("--manifest", type=str, default=None,
                   help="manifest path (default <out>.manifest.json)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dapq",
        description="Waiting times and KPI optimization for two-class delayed "
                    "accumulating priority queues.",
        epilog="Tolerance overrides: DAPQ_EPS_SERIES, DAPQ_EPS_ROOT, "
               "DAPQ_EPS_INVERT, DAPQ_MAX_STATES environment variables.",
    )
    parser.add_argument("--version", action="version", version=f"dapq {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("mean", help="expected waiting times (sweepable over b and d)")
    p.add_argument("--lam1", type=float, required=True)
    p.add_argument("--lam2", type=float, required=True)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--service", choices=["exp", "det"], default="exp")
    p.add_argument("--b", type=str, default="0", help="value or sweep a:b:step")
    p.add_argument("--d", type=str, default="0", help="value or sweep a:b:step")
    _add_out_flags(p)

    p = sub.add_parser("cdf", help="waiting-time CDF curves")
    p.add_argument("--kind", required=True,
                   choices=["fcfs", "npq1", "npq2", "dapq2", "zexp1", "sim1", "sim2"])
    _add_queue_flags(p)
    _add_grid_flags(p)
    _add_sim_flags(p)
    _add_out_flags(p)

    p = sub.add_parser("simulate", help="replicated discrete-event simulation")
    _add_queue_flags(p)
    _add_grid_flags(p)
    _add_sim_flags(p)
    p.add_argument("--raw", type=str, default=None,
                   help="also dump per-customer records to this CSV")
    p.add_argument("--summary-out", type=str, default=None, dest="summary_out",
                   help="write per-class mean/SE CSV here")
    _add_out_flags(p)

    p = sub.add_parser("kpi", help="KPI optimization, sweeps, and regions")
    p.add_argument("--class", type=int, required=True, dest="cls", choices=[1, 2])
    p.add_argument("--w", type=float, required=True, help="waiting-time target")
    p.add_argument("--p", type=float, required=True, help="compliance probability")
    p.add_argument("--lam1", type=float, default=None)
    p.add_argument("--lam2", type=float, default=None)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--d", type=float, default=0.0, help="single delay level")
    p.add_argument("--sweep-d", type=str, default=None, dest="sweep_d",
                   help="delay sweep a:b[:step]")
    p.add_argument("--region", action="store_true",
                   help="emit feasible-region boundaries instead of policy points")
    p.add_argument("--resolution", type=float, default=0.02,
                   help="lambda1 grid step for --region (default 0.02)")
    _add_out_flags(p)

    p = sub.add_parser("rerun", help="re-execute a run manifest")
    p.add_argument("manifest_file", type=str)
    p.add_argument("--out", type=str, default=None, required=True)

    return parser


_DISPATCH = {
    "mean": cmd_mean,
    "cdf": cmd_cdf,
    "simulate": cmd_simulate,
    "kpi": cmd_kpi,
    "rerun": cmd_rerun,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        tol = _tol_from_env()
        return _DISPATCH[args.subcommand](args, tol)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DapqError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
