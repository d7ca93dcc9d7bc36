"""Forward model of the 1-D pinhole camera.

A camera at ``t = (t_x, t_z)``, rotated ``theta`` radians anti-clockwise from
the world frame, maps a world point ``s`` to the image-plane coordinate

    p = f * [(s_x - t_x) cos(theta) + (s_z - t_z) sin(theta)]
          / [(s_z - t_z) cos(theta) - (s_x - t_x) sin(theta)]

and the sensor quantizes p to the centre of the pixel containing it.  Points
outside the sensor (or behind the camera) observe as the out-of-view sentinel,
represented by ``None``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import BehindCameraError
from .geometry import Point2

#: An observation is the quantized image-plane coordinate of a point (a pixel
#: centre, metres) or ``None`` for out-of-view.
Observation = Optional[float]

OUT_OF_VIEW: Observation = None


@dataclass(frozen=True)
class CameraModel:
    """Intrinsics: focal length f (m), pixel count n, sensor width tau (m)."""

    f: float
    n: int
    tau: float

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValueError(f"pixel count must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.f) and self.f > 0.0):
            raise ValueError(f"focal length must be positive, got {self.f!r}")
        if not (math.isfinite(self.tau) and self.tau > 0.0):
            raise ValueError(f"sensor width must be positive, got {self.tau!r}")

    @property
    def w(self) -> float:
        """Pixel width in metres (tau / n)."""
        return self.tau / self.n


@dataclass(frozen=True)
class Pose:
    """Camera location (m) and orientation (radians, normalized to [0, 2*pi))."""

    t_x: float
    t_z: float
    theta: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_x) and math.isfinite(self.t_z) and math.isfinite(self.theta)):
            raise ValueError("pose fields must be finite")
        object.__setattr__(self, "theta", self.theta % math.tau)


def fov_from_degrees(f: float, fov_deg: float, n: int) -> CameraModel:
    """Camera whose n pixels span the given field of view at focal length f."""
    if not 0.0 < fov_deg < 180.0:
        raise ValueError(f"field of view must be in (0, 180) degrees, got {fov_deg!r}")
    tau = 2.0 * f * math.tan(math.radians(fov_deg) / 2.0)
    return CameraModel(f=f, n=n, tau=tau)


def projection_denominator(pose: Pose, s: Point2) -> float:
    """Depth of s along the optical axis; positive iff s is in front."""
    ct = math.cos(pose.theta)
    st = math.sin(pose.theta)
    return (s.z - pose.t_z) * ct - (s.x - pose.t_x) * st


def project(cam: CameraModel, pose: Pose, s: Point2) -> float:
    """Perspective projection of s onto the image plane (metres).

    Raises BehindCameraError when s is not strictly in front of the camera.
    """
    ct = math.cos(pose.theta)
    st = math.sin(pose.theta)
    dx = s.x - pose.t_x
    dz = s.z - pose.t_z
    denom = dz * ct - dx * st
    if denom <= 0.0:
        raise BehindCameraError(
            f"point ({s.x}, {s.z}) is behind the camera (depth {denom!r} <= 0)"
        )
    return cam.f * (dx * ct + dz * st) / denom


def quantize(cam: CameraModel, p: float) -> Observation:
    """Quantize an image-plane coordinate to its pixel centre.

    Inside the sensor (|p| <= tau/2, boundaries included) the result is the
    centre of the pixel containing p, where a p exactly on an interior pixel
    boundary belongs to the upper pixel.  The sensor edges map to the nearest
    valid pixel centre.  Outside the sensor the out-of-view sentinel is
    returned.  Even and odd pixel counts use their respective index
    conventions.
    """
    half_tau = 0.5 * cam.tau
    if not -half_tau <= p <= half_tau:
        return OUT_OF_VIEW
    w = cam.w
    if cam.n % 2 == 0:
        m = math.floor(p / w)
        half_n = cam.n // 2
        m = max(-half_n, min(m, half_n - 1))
        return m * w + 0.5 * w
    m = math.floor(abs(p) / w + 0.5)
    m = min(m, (cam.n - 1) // 2)
    if p > 0.0:
        return m * w
    if p < 0.0:
        return -m * w
    return 0.0


def observe(cam: CameraModel, pose: Pose, points: list[Point2]) -> list[Observation]:
    """Quantized projections of the points; behind-camera maps to out-of-view."""
    out: list[Observation] = []
    for s in points:
        try:
            p = project(cam, pose, s)
        except BehindCameraError:
            out.append(OUT_OF_VIEW)
            continue
        out.append(quantize(cam, p))
    return out


def is_pixel_center(cam: CameraModel, q: float, tol: float = 1e-9) -> bool:
    """True iff q equals (m + 1/2) * w - tau/2 for some pixel index m in [0, n)."""
    w = cam.w
    k = (q + 0.5 * cam.tau) / w - 0.5
    m = round(k)
    return 0 <= m < cam.n and abs(k - m) <= tol / w
