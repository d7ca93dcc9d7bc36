import math

import numpy as np
import pytest

from shape_pnp import CameraModel, ConvexPolygon, HalfPlane, Point2, box_polygon


@pytest.fixture
def cam320() -> CameraModel:
    # 320 pixels across a 90-degree field of view at f = 1 m.
    return CameraModel(f=1.0, n=320, tau=2.0)


@pytest.fixture
def world50() -> ConvexPolygon:
    return box_polygon(-50.0, 50.0, -50.0, 50.0)


def cyclic_close(actual, expected, tol=1e-9) -> bool:
    """Compare two vertex sequences as cyclic rings."""
    a = [(p.x, p.z) for p in actual] if actual and hasattr(actual[0], "x") else list(actual)
    b = list(expected)
    if len(a) != len(b):
        return False
    if not a:
        return True
    n = len(a)
    for shift in range(n):
        if all(
            math.hypot(a[(i + shift) % n][0] - b[i][0], a[(i + shift) % n][1] - b[i][1]) <= tol
            for i in range(n)
        ):
            return True
    return False


def mc_centroid(rng: np.random.Generator, poly: ConvexPolygon, n: int) -> Point2:
    """Rejection-sampling centroid: mean of uniform bounding-box samples that
    land inside the polygon.  Independent of the shoelace-based centroid."""
    xs = np.array([v.x for v in poly.vertices])
    zs = np.array([v.z for v in poly.vertices])
    px = rng.uniform(xs.min(), xs.max(), size=n)
    pz = rng.uniform(zs.min(), zs.max(), size=n)
    inside = np.ones(n, dtype=bool)
    k = len(poly.vertices)
    for i in range(k):
        ax, az = xs[i], zs[i]
        bx, bz = xs[(i + 1) % k], zs[(i + 1) % k]
        inside &= (bx - ax) * (pz - az) - (bz - az) * (px - ax) >= 0.0
    return Point2(float(px[inside].mean()), float(pz[inside].mean()))


def random_halfplanes(rng: np.random.Generator, k: int, scale: float = 1.0) -> list[HalfPlane]:
    """Half-planes with uniformly random normals whose boundaries pass near
    the origin-centred box of the given scale; roughly half keep the centre."""
    out = []
    for _ in range(k):
        phi = rng.uniform(0.0, math.tau)
        offset = rng.uniform(-0.8 * scale, 0.8 * scale)
        out.append(HalfPlane(math.cos(phi), math.sin(phi), offset))
    return out


def random_convex_polygon(
    rng: np.random.Generator, n_min: int = 3, n_max: int = 10, min_bbox_fill: float = 0.0
) -> ConvexPolygon:
    """Random convex polygon: points on a random ellipse, in angle order.

    ``min_bbox_fill`` rejects slivers (area below that fraction of the
    bounding-box area), for tests whose oracles need fat polygons.
    """
    from shape_pnp import area

    while True:
        n = int(rng.integers(n_min, n_max + 1))
        angles = np.sort(rng.uniform(0.0, math.tau, size=n))
        rx = rng.uniform(0.5, 3.0)
        rz = rng.uniform(0.5, 3.0)
        cx = rng.uniform(-2.0, 2.0)
        cz = rng.uniform(-2.0, 2.0)
        pts = [Point2(cx + rx * math.cos(a), cz + rz * math.sin(a)) for a in angles]
        # Nearly-coincident samples would violate the distinct-vertex expectation.
        if any(
            math.hypot(pts[i].x - pts[i - 1].x, pts[i].z - pts[i - 1].z) < 1e-6
            for i in range(len(pts))
        ):
            continue
        poly = ConvexPolygon(tuple(pts))
        if min_bbox_fill > 0.0:
            xs = [p.x for p in pts]
            zs = [p.z for p in pts]
            bbox = (max(xs) - min(xs)) * (max(zs) - min(zs))
            if area(poly) < min_bbox_fill * bbox:
                continue
        return poly
