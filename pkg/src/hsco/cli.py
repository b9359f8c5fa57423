"""Command-line front door.

Subcommands: ``svm`` (train a 0/1-loss classifier from a libsvm file),
``cs1bit`` (recover a signal from one-bit sign measurements, generated or
loaded), ``verify`` (stationarity report for a candidate point), ``gen``
(emit a serialized instance), and ``bench`` (seeded trial sweeps aggregated
into CSV/JSON). Exit codes: 0 success, 1 solver failure, 2 input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .dataio import (
    CsInstance,
    generate_cs_instance,
    parse_libsvm,
    scale_and_augment,
    starting_point,
)
from .errors import DirectionFailure, HscoError
from .metrics import (
    CSV_HEADER,
    TrialResult,
    aggregate,
    classification_accuracy,
    csv_row,
    recovery_metrics,
)
from .model import build_cs_problem, build_svm_problem
from .solver import SolverConfig, iceil, nhs_solve, nhst_solve
from .stationarity import Iterate, diagnostics

_COV_NAMES = {"ind": "independent", "independent": "independent",
              "cor": "correlated", "correlated": "correlated"}


def _add_solver_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("solver")
    g.add_argument("--tau0", type=float, default=0.5)
    g.add_argument("--tau-decay", type=float, default=1.1,
                   help="divide tau by this every period; 1 keeps tau fixed")
    g.add_argument("--tau-decay-period", type=int, default=10)
    g.add_argument("--rho0", type=float, default=0.5)
    g.add_argument("--rho1", type=float, default=0.5)
    g.add_argument("--rho2", type=float, default=0.5)
    g.add_argument("--rho3", type=float, default=0.001)
    g.add_argument("--tol-scale", type=float, default=1e-6,
                   help="stopping threshold is tol-scale * sqrt(n)")
    g.add_argument("--maxit", type=int, default=1000)
    g.add_argument("--damping0", type=float, default=1e-8)
    g.add_argument("--fixed-s", type=int, default=None,
                   help="run at this fixed budget instead of tuning s")


def _add_output_flags(p: argparse.ArgumentParser, formats=("json", "csv")):
    g = p.add_argument_group("output")
    g.add_argument("--format", choices=formats, default=formats[0])
    g.add_argument("--output", default=None, help="write here instead of stdout")
    g.add_argument("--no-timing", action="store_true",
                   help="omit wall-time fields so output is byte-reproducible")
    g.add_argument("--trace", default=None, help="write the iteration trace CSV here")


def _config_from(args) -> SolverConfig:
    return SolverConfig(
        max_iterations=args.maxit,
        tol_scale=args.tol_scale,
        tau0=args.tau0,
        tau_decay=args.tau_decay,
        tau_decay_period=args.tau_decay_period,
        rho0=args.rho0,
        rho1=args.rho1,
        rho2=args.rho2,
        rho3=args.rho3,
        damping0=args.damping0,
        fixed_s=args.fixed_s,
    )


def _solve(problem, w0, config):
    if config.fixed_s is not None:
        return nhs_solve(problem, w0, config), "NHS"
    return nhst_solve(problem, w0, config), "NHST"


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _write_trace(report, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(report.trace_csv())


def _default_budget(m: int, rho3: float) -> int:
    return min(max(1, iceil(rho3 * m)), m - 1)


def _load_dataset(path: str):
    with open(path) as fh:
        return parse_libsvm(fh)


# ---------------------------------------------------------------------------
# svm


def cmd_svm(args) -> int:
    config = _config_from(args)
    train = scale_and_augment(_load_dataset(args.train))
    m = train.m
    s = args.s if args.s is not None else _default_budget(m, args.rho3)
    problem = build_svm_problem(train.samples, train.labels, s, d_last=args.d_last)
    w0 = starting_point("svm", train.samples, train.labels, tau=config.tau0)
    report, method = _solve(problem, w0, config)
    _write_trace(report, args.trace)

    acc = classification_accuracy(train.samples, report.x, train.labels)
    out = {
        "method": method,
        "train": args.train,
        "m": m,
        "features": int(train.feature_count),
        "budget": int(s),
        "acc": acc,
        "iterations": int(report.iterations),
        "final_residual": float(report.final_residual),
        "final_s": int(report.final_s),
        "termination": report.termination.value,
    }
    if args.test:
        test = scale_and_augment(_load_dataset(args.test), divisors=train.scale_divisors)
        out["tacc"] = classification_accuracy(test.samples, report.x, test.labels)
        out["m_test"] = test.m
    if not args.no_timing:
        out["time"] = float(report.wall_time)
    if args.save_solution:
        out["x"] = [float(v) for v in report.x]

    if args.format == "csv":
        cols = ["method", "train", "m", "acc", "tacc", "iterations", "termination"]
        vals = [str(out.get(c, "")) for c in cols]
        _emit(",".join(cols) + "\n" + ",".join(vals), args.output)
    else:
        _emit(json.dumps(out, indent=2, sort_keys=True), args.output)
    return 0 if report.termination.value != "direction_failure" else 1


# ---------------------------------------------------------------------------
# cs1bit


def _cs_trial(payload: dict) -> dict:
    """Generate (or accept) one instance, solve it, and score the solution.

    Top-level so benchmark workers can run it in subprocesses.
    """
    config = SolverConfig(**payload["config"])
    if payload.get("instance") is not None:
        inst = CsInstance.from_dict(payload["instance"])
    else:
        inst = generate_cs_instance(
            n=payload["n"],
            m=payload["m"],
            k_star=payload["k"],
            flip_ratio=payload["flip"],
            covariance=payload["cov"],
            seed=payload["seed"],
        )
    s = payload.get("s") or _default_budget(inst.m, config.rho3)
    problem = build_cs_problem(
        inst.a0,
        inst.c,
        s,
        epsilon=payload["epsilon"],
        q=payload["q"],
        eps_smooth=payload["eps_smooth"],
        eta=payload["eta"],
    )
    w0 = starting_point("cs", inst.a0, inst.c, tau=config.tau0)
    report, method = _solve(problem, w0, config)

    x = report.x
    norm = np.linalg.norm(x)
    if norm > 0:
        x = x / norm
    snr, hd, he = recovery_metrics(x, inst.x_true, inst.a0, inst.c_clean, inst.c)
    result = TrialResult(
        snr=snr, hd=hd, he=he, acc=1.0 - hd,
        time=float(report.wall_time), iterations=float(report.iterations),
    )
    return {
        "method": method,
        "result": result,
        "final_s": int(report.final_s),
        "final_residual": float(report.final_residual),
        "termination": report.termination.value,
        "report": report,
        "solution": x,
        "instance": inst,
    }


def _cs_payload(args, config, instance_dict=None, seed=None) -> dict:
    return {
        "config": dataclasses.asdict(config),
        "instance": instance_dict,
        "n": getattr(args, "n", None),
        "m": getattr(args, "m", None),
        "k": getattr(args, "k", None),
        "flip": getattr(args, "flip", None),
        "cov": _COV_NAMES[args.cov] if getattr(args, "cov", None) else None,
        "seed": seed,
        "s": getattr(args, "s", None),
        "epsilon": args.epsilon,
        "q": args.q,
        "eps_smooth": args.eps_smooth,
        "eta": args.eta,
    }


def cmd_cs1bit(args) -> int:
    config = _config_from(args)
    instance_dict = None
    if args.instance:
        with open(args.instance) as fh:
            instance_dict = json.load(fh)
    elif args.n is None or args.m is None or args.k is None:
        raise HscoError("either --instance or all of --n/--m/--k are required")
    trial = _cs_trial(_cs_payload(args, config, instance_dict, seed=args.seed))
    _write_trace(trial["report"], args.trace)

    r: TrialResult = trial["result"]
    inst: CsInstance = trial["instance"]
    out = {
        "method": trial["method"],
        "n": inst.n,
        "m": inst.m,
        "k_star": inst.k_star,
        "flip": inst.flip_ratio,
        "cov": inst.covariance,
        "seed": inst.seed,
        "snr": r.snr if math.isfinite(r.snr) else "inf",
        "hd": r.hd,
        "he": r.he,
        "acc": r.acc,
        "iterations": int(r.iterations),
        "final_residual": trial["final_residual"],
        "final_s": trial["final_s"],
        "termination": trial["termination"],
    }
    if not args.no_timing:
        out["time"] = r.time
    if args.save_solution:
        out["x"] = [float(v) for v in trial["solution"]]

    if args.format == "csv":
        _emit(
            CSV_HEADER + "\n" + csv_row(trial["method"], inst.n, inst.m, inst.k_star, inst.flip_ratio, r),
            args.output,
        )
    else:
        _emit(json.dumps(out, indent=2, sort_keys=True), args.output)
    return 0 if trial["termination"] != "direction_failure" else 1


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    with open(args.point) as fh:
        point = json.load(fh)
    x = np.asarray(point["x"], dtype=float)
    tau = float(point.get("tau", 0.5))

    if args.instance:
        with open(args.instance) as fh:
            inst = CsInstance.from_dict(json.load(fh))
        s = args.s if args.s is not None else _default_budget(inst.m, 0.001)
        problem = build_cs_problem(inst.a0, inst.c, s, epsilon=args.epsilon,
                                   q=args.q, eps_smooth=args.eps_smooth, eta=args.eta)
    elif args.train:
        data = scale_and_augment(_load_dataset(args.train))
        s = args.s if args.s is not None else _default_budget(data.m, 0.001)
        problem = build_svm_problem(data.samples, data.labels, s, d_last=args.d_last)
    else:
        raise HscoError("verify needs --instance or --train")

    lam = np.asarray(point.get("lambda", np.zeros(problem.m)), dtype=float)
    w = Iterate(x=x, lam=lam, tau=tau)
    try:
        report = diagnostics(problem, w, zero_tol=args.zero_tol)
    except HscoError as exc:
        from .stationarity import verify_stationary

        report = verify_stationary(problem, w, zero_tol=args.zero_tol)
        report.notes.append(f"diagnostics unavailable: {exc}")
    _emit(report.to_json(), args.output)
    return 0


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    inst = generate_cs_instance(
        n=args.n, m=args.m, k_star=args.k, flip_ratio=args.flip,
        covariance=_COV_NAMES[args.cov], seed=args.seed, noise_std=args.noise_std,
    )
    _emit(inst.to_json(), args.output)
    return 0


# ---------------------------------------------------------------------------
# bench


def _worker_count(trials: int, requested: int | None) -> int:
    cap = os.environ.get("HSCO_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    if requested is not None:
        limit = min(limit, requested)
    return max(1, min(limit, trials))


def cmd_bench(args) -> int:
    config = _config_from(args)
    key, _, values = args.grid.partition("=")
    if key != "n" or not values:
        raise HscoError("--grid must look like n=5000 or n=5000,10000")
    grid_n = [int(v) for v in values.split(",")]

    rows = []
    json_out = []
    for n in grid_n:
        m = args.m if args.m is not None else iceil(args.m_ratio * n)
        k = args.k if args.k is not None else max(1, iceil(args.k_ratio * n))
        payloads = []
        for t in range(args.trials):
            p_args = argparse.Namespace(
                n=n, m=m, k=k, flip=args.flip, cov=args.cov, s=None,
                epsilon=args.epsilon, q=args.q, eps_smooth=args.eps_smooth, eta=args.eta,
            )
            payloads.append(_cs_payload(p_args, config, seed=args.seed + t))
        workers = _worker_count(args.trials, args.workers)
        if workers == 1:
            trials = [_cs_trial(p) for p in payloads]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                trials = list(pool.map(_cs_trial, payloads))

        summary = aggregate([t["result"] for t in trials])
        rows.append(csv_row("NHST", n, m, k, args.flip, summary.mean))
        entry = {
            "method": "NHST",
            "n": n, "m": m, "k": k, "flip": args.flip,
            "cov": _COV_NAMES[args.cov],
            "trials": summary.count,
            "snr_excluded": summary.snr_excluded,
            "mean": {"snr": summary.mean.snr, "hd": summary.mean.hd,
                     "he": summary.mean.he, "iterations": summary.mean.iterations},
            "std": {"snr": summary.std.snr, "hd": summary.std.hd, "he": summary.std.he},
            "terminations": [t["termination"] for t in trials],
            "final_s": [t["final_s"] for t in trials],
        }
        if not args.no_timing:
            entry["mean"]["time"] = summary.mean.time
        json_out.append(entry)

    if args.format == "csv":
        _emit("\n".join([CSV_HEADER] + rows), args.output)
    else:
        _emit(json.dumps(json_out, indent=2, sort_keys=True), args.output)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsco",
        description="Newton solvers for optimization with a cap on positive constraint residuals",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("svm", help="train a 0/1-loss margin classifier from a libsvm file")
    p.add_argument("--train", required=True)
    p.add_argument("--test", default=None)
    p.add_argument("--s", type=int, default=None, help="violation budget; default ceil(rho3 * m)")
    p.add_argument("--d-last", type=float, default=1e-4)
    p.add_argument("--save-solution", action="store_true")
    _add_solver_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_svm)

    p = sub.add_parser("cs1bit", help="recover a signal from one-bit sign measurements")
    p.add_argument("--instance", default=None, help="instance JSON produced by gen")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--flip", type=float, default=0.05)
    p.add_argument("--cov", choices=sorted(_COV_NAMES), default="ind")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--eps-smooth", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.07)
    p.add_argument("--save-solution", action="store_true")
    _add_solver_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_cs1bit)

    p = sub.add_parser("verify", help="stationarity report for a candidate point")
    p.add_argument("--point", required=True, help="JSON with x, optional lambda and tau")
    p.add_argument("--instance", default=None)
    p.add_argument("--train", default=None)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--zero-tol", type=float, default=1e-8)
    p.add_argument("--d-last", type=float, default=1e-4)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--eps-smooth", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.07)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate and serialize a sign-measurement instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--flip", type=float, default=0.05)
    p.add_argument("--cov", choices=sorted(_COV_NAMES), default="ind")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-std", type=float, default=0.1)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="seeded trial sweep, aggregated")
    p.add_argument("--grid", required=True, help="e.g. n=5000 or n=5000,10000")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--m-ratio", type=float, default=0.25)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-ratio", type=float, default=0.01)
    p.add_argument("--flip", type=float, default=0.05)
    p.add_argument("--cov", choices=sorted(_COV_NAMES), default="ind")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0, help="trial t uses seed + t")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel workers; HSCO_THREADS caps this")
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--eps-smooth", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.07)
    _add_solver_flags(p)
    _add_output_flags(p, formats=("csv", "json"))
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DirectionFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 2
    except (HscoError, ValueError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
