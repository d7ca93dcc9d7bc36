"""Command-line interface.

Subcommands:

* ``estimate`` -- run one estimator on a scene file and print a report.
* ``simulate`` -- Monte-Carlo error-decay sweep over a range of point counts,
  written as CSV (optionally a gnuplot .dat and an orientation-error CSV).
* ``bench``    -- consistency-region build time versus point count.

Exit codes: 0 success, 2 unreadable/invalid input, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

from .baselines import GridSpec
from .errors import EstimationError
from .estimator import SweepConfig
from .geometry import box_polygon
from .harness import (
    METHODS,
    MODES,
    run_bench,
    run_estimate,
    run_simulation,
    write_bench_csv,
    write_dat,
    write_simulation_csv,
    write_theta_csv,
)
from .scenegen import load_config, load_scene

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_ESTIMATION = 3


def _add_world_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--world-half",
        type=float,
        default=50.0,
        help="half-extent of the square world box prior (default 50 m)",
    )


def _add_sweep_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--coarse-k", type=int, default=720, help="orientation sweep: coarse samples (default 720)"
    )
    parser.add_argument(
        "--fine-k", type=int, default=2048, help="orientation sweep: fine samples (default 2048)"
    )


def _add_grid_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--grid",
        default="64,64,128",
        help="baseline grid points per dimension as NX,NZ,NTHETA (default 64,64,128)",
    )
    parser.add_argument(
        "--grid-bounds",
        default=None,
        help="baseline location search bounds as LO,HI (default: world box)",
    )
    parser.add_argument(
        "--grid-stages", type=int, default=3, help="baseline refinement stages (default 3)"
    )


def _parse_grid(args: argparse.Namespace) -> GridSpec:
    nx, nz, nt = (int(v) for v in args.grid.split(","))
    if args.grid_bounds is None:
        lo, hi = -args.world_half, args.world_half
    else:
        lo, hi = (float(v) for v in args.grid_bounds.split(","))
    return GridSpec(
        t_x_bounds=(lo, hi),
        t_z_bounds=(lo, hi),
        theta_bounds=(0.0, math.tau),
        points=(nx, nz, nt),
        stages=args.grid_stages,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shape-pnp",
        description="Consistency-region pose estimation for 1-D cameras",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="estimate the pose for one scene file")
    p_est.add_argument("--scene", required=True, help="scene JSON file")
    p_est.add_argument("--method", required=True, choices=METHODS)
    p_est.add_argument("--mode", required=True, choices=MODES)
    _add_world_arg(p_est)
    _add_sweep_args(p_est)
    _add_grid_args(p_est)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo error-decay sweep")
    p_sim.add_argument("--config", required=True, help="scene-config JSON file")
    p_sim.add_argument("--m-min", type=int, default=5)
    p_sim.add_argument("--m-max", type=int, default=15)
    p_sim.add_argument("--trials", type=int, default=1000)
    p_sim.add_argument(
        "--methods", default="shape,l2,linf", help="comma-separated subset of shape,l2,linf"
    )
    p_sim.add_argument("--mode", default="known", choices=MODES)
    p_sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sim.add_argument("--out", required=True, help="output CSV path")
    p_sim.add_argument("--dat", default=None, help="also write a gnuplot-style .dat file")
    p_sim.add_argument(
        "--theta-out",
        default=None,
        help="also write orientation-error CSV (full mode only)",
    )
    _add_world_arg(p_sim)
    _add_sweep_args(p_sim)
    _add_grid_args(p_sim)

    p_bench = sub.add_parser("bench", help="time consistency-region builds")
    p_bench.add_argument("--config", required=True, help="scene-config JSON file")
    p_bench.add_argument("--m", required=True, help="comma-separated point counts")
    p_bench.add_argument("--reps", type=int, default=9)
    p_bench.add_argument("--out", required=True, help="output CSV path")
    _add_world_arg(p_bench)

    return parser


def _fmt(value: float | None) -> str:
    return "none" if value is None else repr(value)


def _cmd_estimate(args: argparse.Namespace) -> int:
    try:
        scene = load_scene(args.scene)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: cannot read scene: {exc}", file=sys.stderr)
        return EXIT_INPUT
    world = box_polygon(-args.world_half, args.world_half, -args.world_half, args.world_half)
    sweep = SweepConfig(coarse_k=args.coarse_k, fine_k=args.fine_k)
    try:
        grid = _parse_grid(args)
    except ValueError as exc:
        print(f"error: bad grid flags: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = run_estimate(scene, args.method, args.mode, sweep, grid, world)
    except EstimationError as exc:
        print(f"error: estimation failed: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    est = report.estimate
    print(f"method={report.method} mode={report.mode}")
    print(
        f"estimate: t_x_hat={est.t_x_hat!r} t_z_hat={est.t_z_hat!r} "
        f"theta_hat={_fmt(est.theta_hat)} region_clipped={est.region_clipped}"
    )
    if report.region is not None:
        region = report.region
        print(
            f"region: alpha={region.alpha!r} vertices={len(region.region)} "
            f"area={region.area!r} clipped={region.region_clipped}"
        )
        for v in region.region.vertices:
            print(f"vertex: {v.x!r} {v.z!r}")
    if scene.true_pose is not None:
        tp = scene.true_pose
        print(f"truth: t_x={tp.t_x!r} t_z={tp.t_z!r} theta={tp.theta!r}")
        print(f"sq_location_error={_fmt(report.sq_location_error)}")
        if report.sq_orientation_error is not None:
            print(f"sq_orientation_error={report.sq_orientation_error!r}")
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.m_min < 1 or args.m_max < args.m_min:
        print("error: need 1 <= m-min <= m-max", file=sys.stderr)
        return EXIT_INPUT
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    try:
        grid = _parse_grid(args)
        sweep = SweepConfig(coarse_k=args.coarse_k, fine_k=args.fine_k)
        world = box_polygon(-args.world_half, args.world_half, -args.world_half, args.world_half)
        rows, theta_rows = run_simulation(
            config,
            list(range(args.m_min, args.m_max + 1)),
            args.trials,
            methods,
            mode=args.mode,
            sweep=sweep,
            grid=grid,
            world=world,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    write_simulation_csv(rows, args.out)
    if args.dat is not None:
        write_dat(rows, args.dat)
    if args.theta_out is not None:
        write_theta_csv(theta_rows, args.theta_out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        m_values = [int(v) for v in args.m.split(",")]
    except ValueError:
        print(f"error: bad --m list: {args.m!r}", file=sys.stderr)
        return EXIT_INPUT
    if m_values != sorted(m_values) or any(m < 1 for m in m_values):
        print("error: --m must be an ascending list of positive counts", file=sys.stderr)
        return EXIT_INPUT
    world = box_polygon(-args.world_half, args.world_half, -args.world_half, args.world_half)
    rows = run_bench(config, m_values, reps=args.reps, world=world)
    write_bench_csv(rows, args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "estimate":
        return _cmd_estimate(args)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "bench":
        return _cmd_bench(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
