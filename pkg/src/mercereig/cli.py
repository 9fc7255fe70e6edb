"""Command line interface for the experiment runs.

Subcommands mirror the experiment drivers; every run writes a CSV table
(plus a JSON sidecar of scalars) and, unless suppressed, a PNG figure next
to it.  The exit code is nonzero exactly when a check declared by the run
fails.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments
from .experiments import report_passed, run_greedy_trace, save_report
from .kernels import make_kernel
from .pointsets import disk_grid, random_interval_points

__all__ = ["main", "build_parser"]


def _add_shared(parser, *names):
    flags = {
        "beta": dict(type=int, default=1, help="kernel smoothness order"),
        "eps": dict(type=float, default=0.0, help="bridge kernel shift parameter"),
        "grid-m": dict(type=int, default=10_000, dest="grid_m", help="target disk grid size"),
        "points": dict(type=int, default=500, help="number of random interval points"),
        "n": dict(type=int, default=50, help="subspace dimension / selected points"),
        "seed": dict(type=int, default=0, help="random point seed"),
        "criterion": dict(choices=["linf", "l2"], default="linf", help="greedy criterion"),
        "method": dict(choices=["direct", "newton"], default="newton", help="eigensolver route"),
        "gramian": dict(choices=["discrete", "exact"], default="discrete", help="L2 Gramian mode"),
        "domain": dict(choices=["disk", "interval"], default="interval", help="candidate domain"),
    }
    for name in names:
        parser.add_argument(f"--{name}", **flags[name])
    parser.add_argument("--out", type=Path, default=None, help="output CSV path")
    parser.add_argument("--no-plot", action="store_true", help="skip the PNG figure")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mercereig",
        description="Approximate Mercer eigensystems of positive definite kernels "
        "on point-based subspaces and reproduce their decay experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matern-decay", help="eigenvalue decay slope on the unit disk")
    _add_shared(p, "beta", "grid-m", "n", "criterion")
    p.set_defaults(n=200)

    p = sub.add_parser("matern-gap", help="eigenvalue-sum gap slope on the unit disk")
    _add_shared(p, "beta", "grid-m", "n", "criterion")
    p.set_defaults(n=200)

    p = sub.add_parser("bb-power", help="bridge kernel power-function decay")
    _add_shared(p, "beta", "eps", "points", "n", "seed")

    p = sub.add_parser("bb-eigs", help="bridge kernel eigencouple convergence")
    _add_shared(p, "beta", "eps", "points", "n", "seed", "criterion", "method", "gramian")
    p.set_defaults(points=100, gramian="exact")

    p = sub.add_parser("greedy-trace", help="step-by-step greedy selection trace")
    _add_shared(p, "beta", "eps", "domain", "grid-m", "points", "n", "seed", "criterion")
    p.add_argument("--kernel", default=None, help="kernel id (matern0..matern3, bb)")
    return parser


def _default_out(args):
    parts = [args.command, f"beta{args.beta}"]
    if getattr(args, "eps", None):
        parts.append(f"eps{args.eps:g}")
    return Path("-".join(parts) + ".csv")


def _run(args):
    if args.command == "matern-decay":
        return experiments.run_matern_decay(args.beta, grid_m=args.grid_m, n=args.n)
    if args.command == "matern-gap":
        return experiments.run_matern_sum_gap(args.beta, grid_m=args.grid_m, n=args.n)
    if args.command == "bb-power":
        return experiments.run_bb_power_decay(
            args.beta, eps=args.eps, N=args.points, n=args.n, seed=args.seed
        )
    if args.command == "bb-eigs":
        return experiments.run_bb_eigencouples(
            args.beta, eps=args.eps, N=args.points, n=args.n, seed=args.seed,
            criterion=args.criterion, method=args.method, gramian=args.gramian,
        )
    if args.command == "greedy-trace":
        if args.domain == "disk":
            kernel_id = args.kernel or f"matern{args.beta}"
            candidates = disk_grid(args.grid_m)
        else:
            kernel_id = args.kernel or "bb"
            candidates = random_interval_points(args.points, args.seed)
        kernel = make_kernel(kernel_id, beta=args.beta, eps=args.eps)
        return run_greedy_trace(kernel, candidates, args.n, criterion=args.criterion)
    raise ValueError(f"unhandled command {args.command}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    report = _run(args)
    out = args.out or _default_out(args)
    save_report(report, out)
    print(f"wrote {out}")
    if not args.no_plot:
        from .figures import render_report

        figure_path = out.with_suffix(".png")
        render_report(report, figure_path)
        print(f"wrote {figure_path}")
    for name, value in getattr(report, "checks", {}).items():
        if isinstance(value, bool):
            print(f"check {name}: {'pass' if value else 'FAIL'}")
    if not report_passed(report):
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
