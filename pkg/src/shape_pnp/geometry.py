"""Planar geometry kernel: convex polygons, half-plane clipping, area, centroid.

All coordinates are metres in the world frame.  Polygons are stored as
counter-clockwise vertex rings; the empty polygon (no vertices) is a valid
value and every operation accepts it.  Tolerances:

* ``EPS_GEOM`` (metres) -- vertex merging, boundary/membership tests,
  convexity slack expressed as a vertex displacement.
* ``EPS_AREA`` (square metres) -- below this a region counts as degenerate.

The module-private ``_clip_ring`` / ``_ring_area_centroid`` helpers operate on
raw ``(x, z)`` tuple lists and carry the actual arithmetic; the typed API wraps
them.  Estimators reuse the raw helpers directly on their hot paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateRegionError

EPS_GEOM = 1e-9
EPS_AREA = 1e-12

_Ring = list  # list[tuple[float, float]]


@dataclass(frozen=True)
class Point2:
    """A point of the world plane."""

    x: float
    z: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.z)):
            raise ValueError(f"Point2 coordinates must be finite, got ({self.x}, {self.z})")


@dataclass(frozen=True)
class HalfPlane:
    """The set ``{(x, z) : a*x + b*z + c >= 0}``.

    Constraints of the ``<=`` kind are stored with all three coefficients
    negated so that a single code path handles both directions.
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b) and math.isfinite(self.c)):
            raise ValueError("HalfPlane coefficients must be finite")
        if self.a == 0.0 and self.b == 0.0:
            raise ValueError("HalfPlane normal (a, b) must be nonzero")

    def evaluate(self, p: Point2) -> float:
        """Raw constraint value a*x + b*z + c (unnormalized)."""
        return self.a * p.x + self.b * p.z + self.c

    def signed_distance(self, p: Point2) -> float:
        """Distance of p from the boundary line, positive inside the half-plane."""
        return self.evaluate(p) / math.hypot(self.a, self.b)

    def contains(self, p: Point2, eps: float = EPS_GEOM) -> bool:
        return self.signed_distance(p) >= -eps


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex polygon with vertices in counter-clockwise order.

    Either empty (no vertices) or at least three vertices.  Convexity is
    validated up to a vertex displacement of ``EPS_GEOM``.
    """

    vertices: tuple[Point2, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.vertices)
        if n == 0:
            return
        if n < 3:
            raise ValueError(f"polygon needs 0 or >= 3 vertices, got {n}")
        ring = [(v.x, v.z) for v in self.vertices]
        if _ring_area(ring) < -EPS_AREA:
            raise ValueError("polygon vertices must be in counter-clockwise order")
        for i in range(n):
            ax, az = ring[i - 1]
            bx, bz = ring[i]
            cx, cz = ring[(i + 1) % n]
            e1x, e1z = bx - ax, bz - az
            e2x, e2z = cx - bx, cz - bz
            cross = e1x * e2z - e1z * e2x
            slack = EPS_GEOM * (math.hypot(e1x, e1z) + math.hypot(e2x, e2z))
            if cross < -slack:
                raise ValueError(f"polygon has a reflex turn at vertex {i}")

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def __len__(self) -> int:
        return len(self.vertices)

    def ring(self) -> _Ring:
        """Vertices as a raw list of (x, z) tuples."""
        return [(v.x, v.z) for v in self.vertices]

    @staticmethod
    def from_ring(ring: _Ring) -> "ConvexPolygon":
        return ConvexPolygon(tuple(Point2(x, z) for x, z in ring))


EMPTY_POLYGON = ConvexPolygon()


def box_polygon(x_min: float, x_max: float, z_min: float, z_max: float) -> ConvexPolygon:
    """Axis-aligned rectangle as a CCW convex polygon."""
    if not (x_min < x_max and z_min < z_max):
        raise ValueError("box bounds must satisfy x_min < x_max and z_min < z_max")
    return ConvexPolygon(
        (Point2(x_min, z_min), Point2(x_max, z_min), Point2(x_max, z_max), Point2(x_min, z_max))
    )


@dataclass
class ClipStats:
    """Accumulator for instrumenting sequential clipping."""

    max_vertices: int = 0
    clips: int = 0

    def update(self, n_vertices: int) -> None:
        self.clips += 1
        if n_vertices > self.max_vertices:
            self.max_vertices = n_vertices


# ---------------------------------------------------------------------------
# Raw-ring kernel.  (a, b) is assumed unit-length so eps acts as a distance.
# ---------------------------------------------------------------------------


def _clip_ring(ring: _Ring, a: float, b: float, c: float, eps: float = EPS_GEOM) -> _Ring:
    """One Sutherland-Hodgman pass of a convex CCW ring against a*x+b*z+c >= 0.

    Returns the input list unchanged when every vertex is inside, [] when the
    result would have fewer than three distinct vertices.  Consecutive output
    vertices closer than eps are merged.
    """
    n = len(ring)
    if n == 0:
        return ring

    dists = [a * x + b * z + c for x, z in ring]
    if all(d >= -eps for d in dists):
        return ring
    if all(d < -eps for d in dists):
        return []

    out: _Ring = []
    px, pz = ring[-1]
    dp = dists[-1]
    for i in range(n):
        cx, cz = ring[i]
        dc = dists[i]
        if dc >= -eps:
            if dp < -eps:
                t = dp / (dp - dc)
                out.append((px + t * (cx - px), pz + t * (cz - pz)))
            out.append((cx, cz))
        elif dp >= -eps:
            t = dp / (dp - dc)
            out.append((px + t * (cx - px), pz + t * (cz - pz)))
        px, pz, dp = cx, cz, dc

    out = _merge_ring(out, eps)
    if len(out) < 3:
        return []
    return out


def _merge_ring(ring: _Ring, eps: float) -> _Ring:
    """Drop consecutive near-duplicate vertices (wrap-around included)."""
    if not ring:
        return ring
    out: _Ring = [ring[0]]
    for x, z in ring[1:]:
        lx, lz = out[-1]
        if abs(x - lx) > eps or abs(z - lz) > eps:
            out.append((x, z))
    if len(out) > 1:
        fx, fz = out[0]
        lx, lz = out[-1]
        if abs(fx - lx) <= eps and abs(fz - lz) <= eps:
            out.pop()
    return out


def _ring_area(ring: _Ring) -> float:
    """Signed shoelace area; positive for CCW rings."""
    n = len(ring)
    if n < 3:
        return 0.0
    # Translate by the first vertex: keeps precision for small far-away rings.
    x0, z0 = ring[0]
    acc = 0.0
    px, pz = ring[-1][0] - x0, ring[-1][1] - z0
    for x, z in ring:
        cx, cz = x - x0, z - z0
        acc += px * cz - cx * pz
        px, pz = cx, cz
    return 0.5 * acc


def _ring_area_centroid(ring: _Ring) -> tuple[float, float, float]:
    """(area, centroid_x, centroid_z) of a CCW ring; area 0 gives the vertex mean."""
    n = len(ring)
    if n < 3:
        return 0.0, 0.0, 0.0
    x0, z0 = ring[0]
    a_acc = 0.0
    cx_acc = 0.0
    cz_acc = 0.0
    px, pz = ring[-1][0] - x0, ring[-1][1] - z0
    for x, z in ring:
        cx, cz = x - x0, z - z0
        w = px * cz - cx * pz
        a_acc += w
        cx_acc += (px + cx) * w
        cz_acc += (pz + cz) * w
        px, pz = cx, cz
    area = 0.5 * a_acc
    if abs(a_acc) < 1e-300:
        mx = sum(x for x, _ in ring) / n
        mz = sum(z for _, z in ring) / n
        return area, mx, mz
    return area, x0 + cx_acc / (3.0 * a_acc), z0 + cz_acc / (3.0 * a_acc)


# ---------------------------------------------------------------------------
# Typed operations.
# ---------------------------------------------------------------------------


def clip(poly: ConvexPolygon, hp: HalfPlane) -> ConvexPolygon:
    """Intersect a convex polygon with a half-plane.

    Single linear pass; the result is convex and CCW.  Clipping away the whole
    polygon yields the empty polygon.
    """
    if poly.is_empty:
        return poly
    nrm = math.hypot(hp.a, hp.b)
    ring = poly.ring()
    out = _clip_ring(ring, hp.a / nrm, hp.b / nrm, hp.c / nrm)
    if out is ring:
        return poly
    return ConvexPolygon.from_ring(out)


def area(poly: ConvexPolygon) -> float:
    """Nonnegative shoelace area; 0 for the empty polygon."""
    if poly.is_empty:
        return 0.0
    return max(_ring_area(poly.ring()), 0.0)


def centroid(poly: ConvexPolygon) -> Point2:
    """Area centroid of a non-degenerate polygon.

    Raises DegenerateRegionError when the polygon is empty or its area is at
    or below EPS_AREA.
    """
    if poly.is_empty:
        raise DegenerateRegionError("centroid of an empty polygon")
    a, cx, cz = _ring_area_centroid(poly.ring())
    if a <= EPS_AREA:
        raise DegenerateRegionError(f"polygon area {a!r} m^2 is degenerate")
    return Point2(cx, cz)


def contains(poly: ConvexPolygon, p: Point2, eps: float = EPS_GEOM) -> bool:
    """True iff p lies inside the polygon or within eps of its boundary."""
    ring = poly.ring()
    n = len(ring)
    if n < 3:
        return False
    px, pz = p.x, p.z
    for i in range(n):
        ax, az = ring[i]
        bx, bz = ring[(i + 1) % n]
        ex, ez = bx - ax, bz - az
        cross = ex * (pz - az) - ez * (px - ax)
        if cross < -eps * math.hypot(ex, ez):
            return False
    return True


def intersect_halfplanes(
    halfplanes: list[HalfPlane],
    bounds: ConvexPolygon,
    clip_stats: ClipStats | None = None,
) -> ConvexPolygon:
    """Clip a bounding polygon by each half-plane in turn.

    Total work is linear in the number of half-planes as long as intermediate
    vertex counts stay bounded, which `clip_stats` can instrument.
    """
    if bounds.is_empty:
        raise ValueError("bounds polygon must be non-empty")
    ring = bounds.ring()
    if clip_stats is not None:
        clip_stats.update(len(ring))
    for hp in halfplanes:
        nrm = math.hypot(hp.a, hp.b)
        ring = _clip_ring(ring, hp.a / nrm, hp.b / nrm, hp.c / nrm)
        if clip_stats is not None:
            clip_stats.update(len(ring))
        if not ring:
            return EMPTY_POLYGON
    return ConvexPolygon.from_ring(ring)


def touches_boundary(poly: ConvexPolygon, bounds: ConvexPolygon, eps: float = EPS_GEOM) -> bool:
    """True iff any vertex of poly lies within eps of the boundary of bounds.

    Assumes poly is contained in bounds, so distance to the supporting line of
    each bounding edge is a faithful boundary-distance proxy.
    """
    if poly.is_empty or bounds.is_empty:
        return False
    bring = bounds.ring()
    n = len(bring)
    edges = []
    for i in range(n):
        ax, az = bring[i]
        bx, bz = bring[(i + 1) % n]
        ex, ez = bx - ax, bz - az
        ln = math.hypot(ex, ez)
        edges.append((ax, az, ex / ln, ez / ln))
    for v in poly.vertices:
        for ax, az, ux, uz in edges:
            if abs(ux * (v.z - az) - uz * (v.x - ax)) <= eps:
                return True
    return False


def diameter(poly: ConvexPolygon) -> float:
    """Largest pairwise vertex distance; 0 for the empty polygon."""
    ring = poly.ring()
    best = 0.0
    for i in range(len(ring)):
        xi, zi = ring[i]
        for j in range(i + 1, len(ring)):
            xj, zj = ring[j]
            d = math.hypot(xi - xj, zi - zj)
            if d > best:
                best = d
    return best
