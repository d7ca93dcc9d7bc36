"""Brute-force reprojection-error minimizers used as comparison baselines.

Both the sum-of-squares (l2) and worst-case (linf) criteria are minimized by
multi-stage grid refinement: a dense grid over the search bounds, then a fixed
number of stages that shrink the bounds around the incumbent best pose.  The
search is deterministic: grid ties resolve to the lowest linear cell index and
a stage must strictly improve on the incumbent to move it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraModel, Observation, Pose, project, quantize
from .errors import BehindCameraError
from .estimator import PoseEstimate
from .geometry import Point2

Bounds = tuple[float, float]


@dataclass(frozen=True)
class GridSpec:
    """Search grid: bounds and points per dimension, refinement schedule."""

    t_x_bounds: Bounds = (-50.0, 50.0)
    t_z_bounds: Bounds = (-50.0, 50.0)
    theta_bounds: Bounds = (0.0, math.tau)
    points: tuple[int, int, int] = (64, 64, 128)
    stages: int = 3
    shrink: float = 0.15

    def __post_init__(self) -> None:
        for lo, hi in (self.t_x_bounds, self.t_z_bounds, self.theta_bounds):
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError("grid bounds must be finite and ordered")
        if any(n < 2 for n in self.points):
            raise ValueError("grid needs at least 2 points per dimension")
        if self.stages < 0:
            raise ValueError("refinement stage count must be nonnegative")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink factor must lie in (0, 1)")

    def final_resolution(self) -> tuple[float, float, float]:
        """Grid spacing per dimension at the last refinement stage."""
        factor = self.shrink**self.stages
        nx, nz, nt = self.points
        return (
            (self.t_x_bounds[1] - self.t_x_bounds[0]) * factor / (nx - 1),
            (self.t_z_bounds[1] - self.t_z_bounds[0]) * factor / (nz - 1),
            (self.theta_bounds[1] - self.theta_bounds[0]) * factor / nt,
        )


def reprojection_residuals(
    cam: CameraModel,
    pose: Pose,
    points: list[Point2],
    observations: list[Observation],
) -> list[float]:
    """Per-correspondence residuals q - p at the given pose.

    When the model disagrees with an observation about visibility (predicted
    out-of-view where a pixel value exists, or a predicted pixel where the
    observation is the sentinel), the residual is the sensor width tau.
    Matching out-of-view pairs contribute 0.
    """
    if len(points) != len(observations):
        raise ValueError("points and observations must have equal length")
    out: list[float] = []
    for s, q in zip(points, observations):
        try:
            p = project(cam, pose, s)
            visible = quantize(cam, p) is not None
        except BehindCameraError:
            visible = False
        if q is None:
            out.append(cam.tau if visible else 0.0)
        else:
            out.append(q - p if visible else cam.tau)
    return out


def l2_cost(cam, pose, points, observations) -> float:
    return sum(r * r for r in reprojection_residuals(cam, pose, points, observations))


def linf_cost(cam, pose, points, observations) -> float:
    residuals = reprojection_residuals(cam, pose, points, observations)
    return max((abs(r) for r in residuals), default=0.0)


def _cost_grid(
    cam: CameraModel,
    points: list[Point2],
    observations: list[Observation],
    tx: np.ndarray,
    tz: np.ndarray,
    theta: np.ndarray,
    use_linf: bool,
) -> np.ndarray:
    """Cost over the cartesian grid tx x tz x theta, shape (nx, nz, nt)."""
    f = cam.f
    tau = cam.tau
    half_tau = 0.5 * tau
    txg = tx[:, None, None]
    tzg = tz[None, :, None]
    ct = np.cos(theta)[None, None, :]
    st = np.sin(theta)[None, None, :]
    cost = np.zeros((tx.size, tz.size, theta.size))
    for s, q in zip(points, observations):
        dx = s.x - txg
        dz = s.z - tzg
        denom = dz * ct - dx * st
        with np.errstate(divide="ignore", invalid="ignore"):
            p = f * (dx * ct + dz * st) / denom
        visible = (denom > 0.0) & (np.abs(p) <= half_tau)
        if q is None:
            r = np.where(visible, tau, 0.0)
        else:
            r = np.where(visible, q - p, tau)
        if use_linf:
            np.maximum(cost, np.abs(r), out=cost)
        else:
            cost += r * r
    return cost


def _polish(
    cam: CameraModel,
    points: list[Point2],
    observations: list[Observation],
    start: tuple[float, float, float],
    steps: tuple[float, float, float],
    use_linf: bool,
    vary_theta: bool,
) -> tuple[float, float, float, float]:
    """Deterministic pattern search from the grid incumbent.

    Removes the final-grid floor: per round, move to the best improving point
    of a full axis-and-diagonal stencil (diagonals matter for the worst-case
    criterion, whose descent directions run along residual-tie ridges); halve
    the steps when nothing improves, down to nanometre scale.
    """
    cost_fn = linf_cost if use_linf else l2_cost
    tx, tz, th = start
    sx, sz, st = steps
    offsets = [
        (dx, dz, dt)
        for dx in (-1, 0, 1)
        for dz in (-1, 0, 1)
        for dt in ((-1, 0, 1) if vary_theta else (0,))
        if (dx, dz, dt) != (0, 0, 0)
    ]
    best = cost_fn(cam, Pose(tx, tz, th), points, observations)
    for _ in range(400):
        winner = None
        for dx, dz, dt in offsets:
            cand = (tx + dx * sx, tz + dz * sz, th + dt * st)
            c = cost_fn(cam, Pose(*cand), points, observations)
            if c < best:
                best = c
                winner = cand
        if winner is not None:
            tx, tz, th = winner
        else:
            sx *= 0.5
            sz *= 0.5
            st *= 0.5
            if max(sx, sz, st if vary_theta else 0.0) < 1e-9:
                break
    return tx, tz, th, best


def _refine(
    cam: CameraModel,
    points: list[Point2],
    observations: list[Observation],
    grid: GridSpec,
    use_linf: bool,
    theta_fixed: float | None,
) -> tuple[float, float, float]:
    """One multi-stage grid-refinement trajectory steered by one criterion,
    finished with the local pattern search."""
    nx, nz, nt = grid.points
    x_lo, x_hi = grid.t_x_bounds
    z_lo, z_hi = grid.t_z_bounds
    t_lo, t_hi = grid.theta_bounds

    best: tuple[float, float, float] | None = None
    best_cost = math.inf
    for _ in range(grid.stages + 1):
        tx = np.linspace(x_lo, x_hi, nx)
        tz = np.linspace(z_lo, z_hi, nz)
        if theta_fixed is None:
            theta = t_lo + (t_hi - t_lo) * np.arange(nt) / nt
        else:
            theta = np.array([theta_fixed])
        cost = _cost_grid(cam, points, observations, tx, tz, theta, use_linf)
        flat = int(np.argmin(cost))
        i, j, k = np.unravel_index(flat, cost.shape)
        c = float(cost[i, j, k])
        if c < best_cost:
            best_cost = c
            best = (float(tx[i]), float(tz[j]), float(theta[k]))
        # Shrink each axis around the incumbent for the next stage.
        bx, bz, bt = best
        x_lo, x_hi = _shrunk(bx, x_lo, x_hi, grid.shrink)
        z_lo, z_hi = _shrunk(bz, z_lo, z_hi, grid.shrink)
        t_lo, t_hi = _shrunk(bt, t_lo, t_hi, grid.shrink)
    assert best is not None
    res = grid.final_resolution()
    tx, tz, th, cost = _polish(
        cam, points, observations, best, res, use_linf, vary_theta=theta_fixed is None
    )
    if cost < best_cost:
        return tx, tz, th
    return best


def _grid_minimize(
    cam: CameraModel,
    points: list[Point2],
    observations: list[Observation],
    grid: GridSpec,
    use_linf: bool,
    theta_fixed: float | None,
) -> tuple[float, float, float, float]:
    """(t_x, t_z, theta, cost) of the requested criterion's minimum.

    Both steering criteria are refined and the requested one picks over the
    shared candidate pool, so the worst-case-criterion answer can never be
    beaten on its own criterion by the sum-of-squares answer (and vice
    versa); ties resolve to the earlier candidate.
    """
    pool = [
        _refine(cam, points, observations, grid, False, theta_fixed),
        _refine(cam, points, observations, grid, True, theta_fixed),
    ]
    cost_fn = linf_cost if use_linf else l2_cost
    best = pool[0]
    best_cost = cost_fn(cam, Pose(*pool[0]), points, observations)
    for cand in pool[1:]:
        c = cost_fn(cam, Pose(*cand), points, observations)
        if c < best_cost:
            best_cost = c
            best = cand
    return best[0], best[1], best[2], best_cost


def _shrunk(center: float, lo: float, hi: float, shrink: float) -> Bounds:
    half = 0.5 * (hi - lo) * shrink
    return center - half, center + half


def minimize_l2(
    cam: CameraModel,
    points: list[Point2],
    observations: list[Observation],
    grid: GridSpec = GridSpec(),
    theta_fixed: float | None = None,
) -> PoseEstimate:
    """Pose minimizing the sum of squared reprojection residuals.

    With ``theta_fixed`` the orientation is held and only the location grid is
    searched (the estimate then carries no orientation).
    """
    tx, tz, th, _ = _grid_minimize(cam, points, observations, grid, False, theta_fixed)
    return PoseEstimate(
        t_x_hat=tx,
        t_z_hat=tz,
        theta_hat=None if theta_fixed is not None else th % math.tau,
    )


def minimize_linf(
    cam: CameraModel,
    points: list[Point2],
    observations: list[Observation],
    grid: GridSpec = GridSpec(),
    theta_fixed: float | None = None,
) -> PoseEstimate:
    """Pose minimizing the largest absolute reprojection residual."""
    tx, tz, th, _ = _grid_minimize(cam, points, observations, grid, True, theta_fixed)
    return PoseEstimate(
        t_x_hat=tx,
        t_z_hat=tz,
        theta_hat=None if theta_fixed is not None else th % math.tau,
    )
