"""Experiment engines behind the CLI: single-scene estimation, Monte-Carlo
error-decay sweeps, and clipping-throughput benchmarks.

Trials are independent: each derives its RNG stream from (seed, M, trial
index), so results are identical no matter how trials are distributed over
the worker pool.  Results are always reduced in trial-index order; with a
fixed seed, config and flags, every output column except the wall-clock
timing is byte-stable across runs.  The pool size comes from the
SHAPE_THREADS environment variable (default: all CPUs).
"""

from __future__ import annotations

import csv
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .baselines import GridSpec, minimize_l2, minimize_linf
from .camera import Pose
from .errors import EstimationError
from .estimator import (
    ConsistencySlice,
    PoseEstimate,
    SweepConfig,
    estimate_location,
    estimate_pose,
    location_region,
)
from .geometry import ClipStats, ConvexPolygon, box_polygon
from .scenegen import Scene, SceneConfig, generate, with_num_points

METHODS = ("shape", "l2", "linf")
MODES = ("known", "full")

DEFAULT_WORLD_HALF_EXTENT = 50.0


def default_world() -> ConvexPolygon:
    e = DEFAULT_WORLD_HALF_EXTENT
    return box_polygon(-e, e, -e, e)


def pool_size() -> int:
    """Worker count: SHAPE_THREADS when set, else the machine's CPU count."""
    env = os.environ.get("SHAPE_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"SHAPE_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"SHAPE_THREADS must be >= 1, got {n}")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ExperimentRow:
    """One (method, M) row of a simulation sweep."""

    method: str
    m: int
    trials_used: int
    trials_excluded: int
    mean_sq_err: float
    log2_m: float
    log2_err: float
    median_ms: float


@dataclass(frozen=True)
class ThetaRow:
    """Orientation-error companion row (full-pose runs only)."""

    method: str
    m: int
    trials_used: int
    mean_sq_theta_err: float


@dataclass(frozen=True)
class EstimateReport:
    method: str
    mode: str
    estimate: PoseEstimate
    sq_location_error: float | None
    sq_orientation_error: float | None
    region: ConsistencySlice | None


# ---------------------------------------------------------------------------
# Single-scene estimation.
# ---------------------------------------------------------------------------


def _angular_difference(a: float, b: float) -> float:
    return (a - b + math.pi) % math.tau - math.pi


def _estimate_one(
    scene: Scene,
    method: str,
    mode: str,
    sweep: SweepConfig,
    grid: GridSpec,
    world: ConvexPolygon,
) -> PoseEstimate:
    cam = scene.camera
    if mode == "known":
        if scene.true_pose is None:
            raise ValueError("known-orientation mode needs the scene's ground-truth pose")
        theta = scene.true_pose.theta
        if method == "shape":
            return estimate_location(cam, theta, scene.points, scene.observations, world)
        if method == "l2":
            return minimize_l2(cam, scene.points, scene.observations, grid, theta_fixed=theta)
        if method == "linf":
            return minimize_linf(cam, scene.points, scene.observations, grid, theta_fixed=theta)
    else:
        if method == "shape":
            return estimate_pose(cam, scene.points, scene.observations, world, sweep)
        if method == "l2":
            return minimize_l2(cam, scene.points, scene.observations, grid)
        if method == "linf":
            return minimize_linf(cam, scene.points, scene.observations, grid)
    raise ValueError(f"unknown method {method!r}")


def run_estimate(
    scene: Scene,
    method: str,
    mode: str,
    sweep: SweepConfig = SweepConfig(),
    grid: GridSpec = GridSpec(),
    world: ConvexPolygon | None = None,
) -> EstimateReport:
    """Estimate a pose for one scene and collect reporting data."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    world = default_world() if world is None else world
    est = _estimate_one(scene, method, mode, sweep, grid, world)

    sq_loc = None
    sq_theta = None
    if scene.true_pose is not None:
        dx = est.t_x_hat - scene.true_pose.t_x
        dz = est.t_z_hat - scene.true_pose.t_z
        sq_loc = dx * dx + dz * dz
        if est.theta_hat is not None:
            sq_theta = _angular_difference(est.theta_hat, scene.true_pose.theta) ** 2

    region = None
    if method == "shape":
        alpha = scene.true_pose.theta if mode == "known" else est.theta_hat
        region = location_region(scene.camera, alpha, scene.points, scene.observations, world)
    return EstimateReport(
        method=method,
        mode=mode,
        estimate=est,
        sq_location_error=sq_loc,
        sq_orientation_error=sq_theta,
        region=region,
    )


# ---------------------------------------------------------------------------
# Monte-Carlo simulation sweep.
# ---------------------------------------------------------------------------

#: Per-trial outcome per method: (sq_location_err | None if excluded,
#: sq_orientation_err | None, seconds).
_TrialOutcome = tuple[float | None, float | None, float]


def _run_trial_block(
    job: tuple,
) -> list[dict[str, _TrialOutcome]]:
    config, m, t_start, t_stop, methods, mode, sweep, grid, world = job
    cfg = with_num_points(config, m)
    out = []
    for t in range(t_start, t_stop):
        scene = generate(cfg, stream=(m, t))
        true_pose = scene.true_pose
        assert true_pose is not None
        per_method: dict[str, _TrialOutcome] = {}
        for method in methods:
            t0 = time.perf_counter()
            try:
                est = _estimate_one(scene, method, mode, sweep, grid, world)
            except EstimationError:
                per_method[method] = (None, None, time.perf_counter() - t0)
                continue
            elapsed = time.perf_counter() - t0
            dx = est.t_x_hat - true_pose.t_x
            dz = est.t_z_hat - true_pose.t_z
            sq_theta = None
            if est.theta_hat is not None:
                sq_theta = _angular_difference(est.theta_hat, true_pose.theta) ** 2
            per_method[method] = (dx * dx + dz * dz, sq_theta, elapsed)
        out.append(per_method)
    return out


def run_simulation(
    config: SceneConfig,
    m_values: list[int],
    trials: int,
    methods: list[str],
    mode: str = "known",
    sweep: SweepConfig = SweepConfig(),
    grid: GridSpec = GridSpec(),
    world: ConvexPolygon | None = None,
    workers: int | None = None,
) -> tuple[list[ExperimentRow], list[ThetaRow]]:
    """Mean squared location error per (M, method) over seeded trials.

    Trials that raise an estimation error (empty or degenerate regions, no
    feasible orientation) are excluded from the mean and counted in the
    ``trials_excluded`` column.
    """
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    world = default_world() if world is None else world
    workers = pool_size() if workers is None else workers

    jobs = []
    for m in sorted(m_values):
        chunk = max(1, math.ceil(trials / max(1, workers * 4)))
        for t_start in range(0, trials, chunk):
            t_stop = min(trials, t_start + chunk)
            jobs.append((config, m, t_start, t_stop, tuple(methods), mode, sweep, grid, world))

    if workers == 1:
        blocks = [_run_trial_block(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run_trial_block, jobs))

    per_m: dict[int, list[dict[str, _TrialOutcome]]] = {m: [] for m in sorted(m_values)}
    for job, block in zip(jobs, blocks):
        per_m[job[1]].extend(block)

    rows: list[ExperimentRow] = []
    theta_rows: list[ThetaRow] = []
    for m in sorted(m_values):
        trials_of_m = per_m[m]
        for method in methods:
            outcomes = [tr[method] for tr in trials_of_m]
            used = [o for o in outcomes if o[0] is not None]
            excluded = len(outcomes) - len(used)
            mean_sq = sum(o[0] for o in used) / len(used) if used else math.nan
            log2_err = math.log2(mean_sq) if mean_sq > 0.0 else -math.inf
            median_ms = statistics.median(o[2] for o in outcomes) * 1e3 if outcomes else math.nan
            rows.append(
                ExperimentRow(
                    method=method,
                    m=m,
                    trials_used=len(used),
                    trials_excluded=excluded,
                    mean_sq_err=mean_sq,
                    log2_m=math.log2(m),
                    log2_err=log2_err,
                    median_ms=median_ms,
                )
            )
            if mode == "full":
                theta_used = [o[1] for o in used if o[1] is not None]
                theta_rows.append(
                    ThetaRow(
                        method=method,
                        m=m,
                        trials_used=len(theta_used),
                        mean_sq_theta_err=(
                            sum(theta_used) / len(theta_used) if theta_used else math.nan
                        ),
                    )
                )
    return rows, theta_rows


SIMULATION_CSV_HEADER = [
    "method",
    "M",
    "trials_used",
    "trials_excluded",
    "mean_sq_err",
    "log2_M",
    "log2_err",
    "median_ms",
]


def write_simulation_csv(rows: list[ExperimentRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SIMULATION_CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.method,
                    r.m,
                    r.trials_used,
                    r.trials_excluded,
                    repr(r.mean_sq_err),
                    repr(r.log2_m),
                    repr(r.log2_err),
                    f"{r.median_ms:.3f}",
                ]
            )


def write_theta_csv(rows: list[ThetaRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "M", "trials_used", "mean_sq_theta_err"])
        for r in rows:
            writer.writerow([r.method, r.m, r.trials_used, repr(r.mean_sq_theta_err)])


def write_dat(rows: list[ExperimentRow], path: str) -> None:
    """Gnuplot-friendly blocks: one index per method, columns M and error."""
    methods = []
    for r in rows:
        if r.method not in methods:
            methods.append(r.method)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for i, method in enumerate(methods):
            if i:
                fh.write("\n\n")
            fh.write(f"# method={method}  columns: M mean_sq_err log2_M log2_err\n")
            for r in rows:
                if r.method == method:
                    fh.write(f"{r.m} {r.mean_sq_err!r} {r.log2_m!r} {r.log2_err!r}\n")


# ---------------------------------------------------------------------------
# Clipping-throughput benchmark.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchRow:
    m: int
    median_ms: float
    ms_per_point: float
    max_vertices: int


def run_bench(
    config: SceneConfig,
    m_values: list[int],
    reps: int = 9,
    world: ConvexPolygon | None = None,
) -> list[BenchRow]:
    """Median wall-clock of one consistency-region build per point count."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    world = default_world() if world is None else world
    rows = []
    for m in m_values:
        cfg = with_num_points(config, m)
        times = []
        max_vertices = 0
        for rep in range(reps):
            scene = generate(cfg, stream=(m, rep))
            stats = ClipStats()
            t0 = time.perf_counter()
            location_region(
                scene.camera,
                scene.true_pose.theta,
                scene.points,
                scene.observations,
                world,
                stats,
            )
            times.append(time.perf_counter() - t0)
            max_vertices = max(max_vertices, stats.max_vertices)
        median_ms = statistics.median(times) * 1e3
        rows.append(
            BenchRow(
                m=m,
                median_ms=median_ms,
                ms_per_point=median_ms / m,
                max_vertices=max_vertices,
            )
        )
    return rows


def write_bench_csv(rows: list[BenchRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["M", "median_ms", "ms_per_point", "max_vertices"])
        for r in rows:
            writer.writerow([r.m, f"{r.median_ms:.4f}", f"{r.ms_per_point:.6f}", r.max_vertices])
