"""SHAPE: consistency-region pose estimation.

Each observed pixel value q brackets the true projection p of its point source
within half a pixel width, ``q - w/2 <= p <= q + w/2``.  For a candidate
orientation these two bounds are linear in the camera location, so every point
confines the camera to a wedge (two half-planes meeting at the point source).
Intersecting all wedges with a bounding world box yields the location
consistency region; its area centroid is the location estimate.  When the
orientation is unknown, regions are computed for a sweep of candidate
orientations and the estimate is their area-weighted average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .camera import CameraModel, Observation
from .errors import (
    AllSlicesEmptyError,
    DegenerateRegionError,
    EmptyRegionError,
    NoConstraintsError,
    SentinelObservationError,
)
from .geometry import (
    EPS_AREA,
    EPS_GEOM,
    ClipStats,
    ConvexPolygon,
    HalfPlane,
    Point2,
    _clip_ring,
    _ring_area_centroid,
    intersect_halfplanes,
    touches_boundary,
)


@dataclass(frozen=True)
class ConsistencySlice:
    """Location-consistency region at one candidate orientation.

    ``centroid`` is None when the region is empty or below the degeneracy
    threshold; ``region_clipped`` flags regions that touch the world boundary
    (their centroid depends on the world-box prior).
    """

    alpha: float
    region: ConvexPolygon
    area: float
    centroid: Point2 | None
    region_clipped: bool


@dataclass(frozen=True)
class PoseEstimate:
    t_x_hat: float
    t_z_hat: float
    theta_hat: float | None = None
    region_clipped: bool = False


@dataclass(frozen=True)
class SweepConfig:
    """Orientation sweep: coarse scan of the full circle to locate the band of
    feasible orientations, then a fine uniform scan across that band (padded
    by one coarse step on each side)."""

    coarse_k: int = 720
    fine_k: int = 2048

    def __post_init__(self) -> None:
        if self.coarse_k < 2 or self.fine_k < 2:
            raise ValueError("sweep resolutions must be at least 2")


def _wedge_coefficients(
    f: float, w: float, cos_t: float, sin_t: float, sx: float, sz: float, q: float
) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Raw (a, b, c) rows for the two pixel-bound constraints of one point.

    First row: upper bound p <= q + w/2, satisfied as a*t_x + b*t_z + c >= 0.
    Second row: lower bound p >= q - w/2, satisfied as a*t_x + b*t_z + c <= 0.
    """
    u = q + 0.5 * w
    lo = q - 0.5 * w
    s_axis = sz * cos_t - sx * sin_t
    s_img = sx * cos_t + sz * sin_t
    upper = (f * cos_t + u * sin_t, f * sin_t - u * cos_t, u * s_axis - f * s_img)
    lower = (f * cos_t + lo * sin_t, f * sin_t - lo * cos_t, lo * s_axis - f * s_img)
    return upper, lower


def point_halfplanes(
    cam: CameraModel, theta: float, s: Point2, q: Observation
) -> tuple[HalfPlane, HalfPlane]:
    """The two half-planes a single observation imposes on the camera location.

    Both are returned in >=-form (the lower-bound constraint is negated), so
    their intersection is the semi-infinite wedge with apex at the point
    source.  Sentinel observations carry no constraint and raise.
    """
    if q is None:
        raise SentinelObservationError("out-of-view observation has no half-planes")
    upper, lower = _wedge_coefficients(
        cam.f, cam.w, math.cos(theta), math.sin(theta), s.x, s.z, q
    )
    return HalfPlane(*upper), HalfPlane(-lower[0], -lower[1], -lower[2])


def _constraint_rows(
    cam: CameraModel, points: list[Point2], observations: list[Observation]
) -> list[tuple[float, float, float]]:
    """(s_x, s_z, q) rows for the non-sentinel observations."""
    if len(points) != len(observations):
        raise ValueError("points and observations must have equal length")
    rows = [(s.x, s.z, q) for s, q in zip(points, observations) if q is not None]
    if not rows:
        raise NoConstraintsError("every observation is out-of-view")
    return rows


def _region_ring(
    rows: list[tuple[float, float, float]],
    f: float,
    w: float,
    cos_t: float,
    sin_t: float,
    world_ring: list,
) -> tuple[list, int, float]:
    """World ring clipped by both pixel-bound constraints of every row.

    Also returns a nearness-to-feasibility score used by the orientation
    sweep: the number of constraints survived before the region became empty
    (2 * len(rows) when it stayed non-empty) and, for empty results, the
    distance by which the killing constraint missed the region (0 when it
    died as a sliver).  Orientations close to the feasible band survive more
    clips and miss by less.
    """
    ring = world_ring
    survived = 0
    for sx, sz, q in rows:
        (a1, b1, c1), (a2, b2, c2) = _wedge_coefficients(f, w, cos_t, sin_t, sx, sz, q)
        nrm = 1.0 / math.hypot(a1, b1)
        na, nb, nc = a1 * nrm, b1 * nrm, c1 * nrm
        clipped = _clip_ring(ring, na, nb, nc)
        if not clipped:
            return clipped, survived, _miss_distance(ring, na, nb, nc)
        survived += 1
        ring = clipped
        nrm = -1.0 / math.hypot(a2, b2)
        na, nb, nc = a2 * nrm, b2 * nrm, c2 * nrm
        clipped = _clip_ring(ring, na, nb, nc)
        if not clipped:
            return clipped, survived, _miss_distance(ring, na, nb, nc)
        survived += 1
        ring = clipped
    return ring, survived, 0.0


def _miss_distance(ring: list, a: float, b: float, c: float) -> float:
    """Distance from a ring to the (unit-normal) half-plane that emptied it."""
    return max(0.0, -max(a * x + b * z + c for x, z in ring))


def location_region(
    cam: CameraModel,
    theta: float,
    points: list[Point2],
    observations: list[Observation],
    world: ConvexPolygon,
    clip_stats: ClipStats | None = None,
) -> ConsistencySlice:
    """Consistency region for a known orientation, clipped to the world box."""
    rows = _constraint_rows(cam, points, observations)
    halfplanes: list[HalfPlane] = []
    for sx, sz, q in rows:
        hp_u, hp_l = point_halfplanes(cam, theta, Point2(sx, sz), q)
        halfplanes.append(hp_u)
        halfplanes.append(hp_l)
    region = intersect_halfplanes(halfplanes, world, clip_stats)
    a, cx, cz = _ring_area_centroid(region.ring())
    a = max(a, 0.0)
    c = Point2(cx, cz) if a > EPS_AREA else None
    clipped = touches_boundary(region, world)
    return ConsistencySlice(alpha=theta, region=region, area=a, centroid=c, region_clipped=clipped)


def estimate_location(
    cam: CameraModel,
    theta: float,
    points: list[Point2],
    observations: list[Observation],
    world: ConvexPolygon,
) -> PoseEstimate:
    """Centroid of the known-orientation consistency region."""
    slc = location_region(cam, theta, points, observations, world)
    if slc.region.is_empty:
        raise EmptyRegionError("consistency region is empty at the given orientation")
    if slc.centroid is None:
        raise DegenerateRegionError(
            f"consistency region area {slc.area!r} m^2 is below the degeneracy threshold"
        )
    return PoseEstimate(
        t_x_hat=slc.centroid.x,
        t_z_hat=slc.centroid.z,
        theta_hat=None,
        region_clipped=slc.region_clipped,
    )


def _feasible_band(nonempty: list[int], k: int) -> tuple[int, int]:
    """Start/end coarse indices (end >= start, possibly wrapped past k) of the
    contiguous index band covering all non-empty slices, chosen as the
    complement of the largest circular run of empty slices."""
    if len(nonempty) == k:
        return 0, k - 1
    best_gap = -1
    best_i = 0
    r = len(nonempty)
    for i in range(r):
        nxt = nonempty[(i + 1) % r]
        gap = (nxt - nonempty[i]) % k if r > 1 else k
        if gap > best_gap:
            best_gap = gap
            best_i = i
    start = nonempty[(best_i + 1) % r]
    end = nonempty[best_i]
    if end < start:
        end += k
    return start, end


_ESCALATION_ROUNDS = 3
_ESCALATION_FACTOR = 16
_ESCALATION_TOP_K = 6


def _escalate_band(
    rows: list,
    f: float,
    w: float,
    world_ring: list,
    scored: list[tuple[int, float, float]],
    step: float,
) -> tuple[float, float, float] | None:
    """Locate a feasible orientation band narrower than the coarse step.

    Starting from the coarse samples ranked by nearness to feasibility (most
    constraints survived, then smallest miss distance), rescans the best
    candidates at 16x finer resolution per round.  Returns (band_lo, band_hi,
    resolution) on unwrapped angles, or None when no feasible orientation is
    found within the escalation budget.
    """
    candidates = scored
    for _ in range(_ESCALATION_ROUNDS):
        candidates.sort(key=lambda sc: (-sc[0], sc[1], sc[2]))
        centers = [alpha for _, _, alpha in candidates[:_ESCALATION_TOP_K]]
        fine_step = step / _ESCALATION_FACTOR
        feasible: list[float] = []
        rescored: list[tuple[int, float, float]] = []
        for center in centers:
            for i in range(-_ESCALATION_FACTOR, _ESCALATION_FACTOR + 1):
                alpha = center + i * fine_step
                ring, survived, miss = _region_ring(
                    rows, f, w, math.cos(alpha), math.sin(alpha), world_ring
                )
                if ring:
                    feasible.append(alpha)
                else:
                    rescored.append((survived, miss, alpha))
        if feasible:
            return min(feasible), max(feasible), fine_step
        candidates = rescored
        step = fine_step
    return None


def estimate_pose(
    cam: CameraModel,
    points: list[Point2],
    observations: list[Observation],
    world: ConvexPolygon,
    sweep: SweepConfig = SweepConfig(),
) -> PoseEstimate:
    """Full pose estimate: area-weighted average of slice centroids and their
    orientations over the feasible orientation band.

    The band is located by a coarse full-circle scan; when every coarse sample
    is infeasible (the band is narrower than the coarse step, common for well
    constrained scenes) the scan escalates resolution around the most nearly
    feasible samples before giving up.  The band is then swept uniformly with
    ``sweep.fine_k`` slices.  Orientations in the band are kept on a
    contiguous (unwrapped) interval so the weighted angular mean is well
    defined even when the band straddles 0; the returned orientation is
    re-normalized to [0, 2*pi).  Slices at or below the degeneracy threshold
    contribute zero weight.
    """
    rows = _constraint_rows(cam, points, observations)
    f = cam.f
    w = cam.w
    world_ring = world.ring()
    if len(world_ring) < 3:
        raise ValueError("world polygon must be non-empty")

    k0 = sweep.coarse_k
    coarse_step = math.tau / k0
    nonempty = []
    scored: list[tuple[int, float, float]] = []
    for j in range(k0):
        alpha = j * coarse_step
        ring, survived, miss = _region_ring(
            rows, f, w, math.cos(alpha), math.sin(alpha), world_ring
        )
        if ring:
            nonempty.append(j)
        else:
            scored.append((survived, miss, alpha))

    if nonempty:
        start, end = _feasible_band(nonempty, k0)
        lo = (start - 1) * coarse_step
        hi = (end + 1) * coarse_step
        if hi - lo > math.tau:
            lo, hi = 0.0, math.tau
    else:
        # The feasible band is narrower than the coarse step.  Rescan around
        # the most nearly-feasible coarse samples at escalating resolution.
        band = _escalate_band(rows, f, w, world_ring, scored, coarse_step)
        if band is None:
            raise AllSlicesEmptyError(
                f"no orientation among {k0} coarse samples (after escalation) "
                "admits a consistency region"
            )
        band_lo, band_hi, resolution = band
        lo = band_lo - resolution
        hi = band_hi + resolution

    k1 = sweep.fine_k
    h = (hi - lo) / k1
    terms: list[tuple[float, float, float, float]] = []
    clipped = False
    world_edges = _boundary_edges(world_ring)
    for m in range(k1):
        alpha = lo + (m + 0.5) * h
        ring, _, _ = _region_ring(rows, f, w, math.cos(alpha), math.sin(alpha), world_ring)
        if not ring:
            continue
        a, cx, cz = _ring_area_centroid(ring)
        if a <= EPS_AREA:
            continue
        terms.append((a, cx, cz, alpha))
        if not clipped and _ring_touches(ring, world_edges):
            clipped = True
    if not terms:
        raise AllSlicesEmptyError("every fine-sweep slice is empty or degenerate")

    t_x, t_z, theta = _weighted_pose(terms)
    return PoseEstimate(
        t_x_hat=t_x,
        t_z_hat=t_z,
        theta_hat=theta % math.tau,
        region_clipped=clipped,
    )


def _weighted_pose(terms: list[tuple[float, float, float, float]]) -> tuple[float, float, float]:
    """Area-weighted mean of (weight, c_x, c_z, alpha) terms, reduced in the
    order given.  Alphas must already lie on one contiguous interval."""
    w_sum = 0.0
    sx_sum = 0.0
    sz_sum = 0.0
    st_sum = 0.0
    for a, cx, cz, alpha in terms:
        w_sum += a
        sx_sum += a * cx
        sz_sum += a * cz
        st_sum += a * alpha
    return sx_sum / w_sum, sz_sum / w_sum, st_sum / w_sum


def _boundary_edges(ring: list) -> list:
    edges = []
    n = len(ring)
    for i in range(n):
        ax, az = ring[i]
        bx, bz = ring[(i + 1) % n]
        ex, ez = bx - ax, bz - az
        ln = math.hypot(ex, ez)
        edges.append((ax, az, ex / ln, ez / ln))
    return edges


def _ring_touches(ring: list, edges: list, eps: float = EPS_GEOM) -> bool:
    for x, z in ring:
        for ax, az, ux, uz in edges:
            if abs(ux * (z - az) - uz * (x - ax)) <= eps:
                return True
    return False


def collinear_decay_bound(f: float, b: float, w: float) -> float:
    """Camera-to-line distance threshold f*b/(2w) below which the squared
    location error of collinear-scene estimates decays quadratically with the
    number of points (b is the largest distance between the points)."""
    if not (f > 0.0 and b > 0.0 and w > 0.0):
        raise ValueError("focal length, point spread and pixel width must be positive")
    return f * b / (2.0 * w)
