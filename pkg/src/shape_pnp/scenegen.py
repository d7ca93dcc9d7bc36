"""Seeded random scene generation and scene (de)serialization.

Scenes are drawn with numpy's PCG64 generator.  Every scene derives its own
stream from ``SeedSequence(entropy=seed, spawn_key=stream)``, so trials are
reproducible bit-for-bit and independent across stream keys; no global RNG
state is shared.  Sampling order is fixed: camera location x, location z,
orientation, then per point (depth, image-plane position).

Points are drawn in camera coordinates -- depth in ``depth_range``, either
uniform or log-uniform per ``depth_sampling``, image-plane position uniform
within the sensor shrunk by ``lateral_margin`` on each side -- and
back-projected to the world frame, so every generated observation is a valid
pixel value (never the out-of-view sentinel).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .camera import CameraModel, Observation, Pose, observe
from .errors import SegmentOutOfFovError
from .geometry import Point2

DEFAULT_DEPTH_RANGE = (2.0, 10.0)
DEFAULT_LATERAL_MARGIN = 0.05
DEFAULT_POSE_BOX = ((-5.0, 5.0), (-5.0, 5.0))
DEFAULT_THETA_RANGE = (0.0, math.tau)


def _default_camera() -> CameraModel:
    # 320 pixels spanning a 90-degree field of view at f = 1 m.
    return CameraModel(f=1.0, n=320, tau=2.0)


@dataclass(frozen=True)
class SceneConfig:
    seed: int = 0
    num_points: int = 10
    depth_range: tuple[float, float] = DEFAULT_DEPTH_RANGE
    depth_sampling: str = "uniform"
    lateral_margin: float = DEFAULT_LATERAL_MARGIN
    pose_box: tuple[tuple[float, float], tuple[float, float]] = DEFAULT_POSE_BOX
    theta_range: tuple[float, float] = DEFAULT_THETA_RANGE
    camera: CameraModel = field(default_factory=_default_camera)

    def __post_init__(self) -> None:
        if self.num_points < 1:
            raise ValueError("num_points must be at least 1")
        lo, hi = self.depth_range
        if not (0.0 < lo <= hi):
            raise ValueError("depth range must be positive and ordered")
        if self.depth_sampling not in ("uniform", "log"):
            raise ValueError(f"depth_sampling must be 'uniform' or 'log', got {self.depth_sampling!r}")
        if not 0.0 <= self.lateral_margin < 1.0:
            raise ValueError("lateral margin must lie in [0, 1)")
        (x_lo, x_hi), (z_lo, z_hi) = self.pose_box
        if x_lo > x_hi or z_lo > z_hi:
            raise ValueError("pose box bounds must be ordered")
        t_lo, t_hi = self.theta_range
        if t_lo > t_hi:
            raise ValueError("theta range must be ordered")


@dataclass(frozen=True)
class Scene:
    camera: CameraModel
    true_pose: Pose | None
    points: list[Point2]
    observations: list[Observation]


@dataclass(frozen=True)
class CollinearScene:
    """A scene whose points lie on one segment, plus the quantities that drive
    its error-decay behaviour."""

    scene: Scene
    line: tuple[Point2, Point2]
    camera_line_distance: float
    point_spread: float


def _rng(seed: int, stream: int | tuple[int, ...]) -> np.random.Generator:
    key = (stream,) if isinstance(stream, int) else tuple(stream)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _sample_pose(config: SceneConfig, rng: np.random.Generator) -> Pose:
    (x_lo, x_hi), (z_lo, z_hi) = config.pose_box
    t_lo, t_hi = config.theta_range
    t_x = rng.uniform(x_lo, x_hi)
    t_z = rng.uniform(z_lo, z_hi)
    theta = rng.uniform(t_lo, t_hi)
    return Pose(t_x=t_x, t_z=t_z, theta=theta)


def generate(config: SceneConfig, stream: int | tuple[int, ...] = 0) -> Scene:
    """Generate one scene; deterministic for a fixed (config.seed, stream)."""
    rng = _rng(config.seed, stream)
    pose = _sample_pose(config, rng)
    cam = config.camera
    ct = math.cos(pose.theta)
    st = math.sin(pose.theta)
    half_span = (1.0 - config.lateral_margin) * 0.5 * cam.tau
    d_lo, d_hi = config.depth_range
    log_depth = config.depth_sampling == "log"
    points: list[Point2] = []
    for _ in range(config.num_points):
        if log_depth:
            depth = math.exp(rng.uniform(math.log(d_lo), math.log(d_hi)))
        else:
            depth = rng.uniform(d_lo, d_hi)
        p_img = rng.uniform(-half_span, half_span)
        x_cam = depth * p_img / cam.f
        # World offset: x_cam along the image axis, depth along the optical axis.
        points.append(
            Point2(
                pose.t_x + x_cam * ct - depth * st,
                pose.t_z + x_cam * st + depth * ct,
            )
        )
    observations = observe(cam, pose, points)
    if any(q is None for q in observations):
        raise AssertionError("generated point fell out of view; margin too small")
    return Scene(camera=cam, true_pose=pose, points=points, observations=observations)


def generate_collinear(
    config: SceneConfig,
    line: tuple[Point2, Point2],
    stream: int | tuple[int, ...] = 0,
) -> CollinearScene:
    """Scene with points drawn uniformly on the given world-frame segment.

    The pose is sampled from the config as usual (pin the pose box and theta
    range to a point to fix it).  Raises SegmentOutOfFovError when any sampled
    point does not observe as a pixel value.
    """
    p0, p1 = line
    ex, ez = p1.x - p0.x, p1.z - p0.z
    seg_len = math.hypot(ex, ez)
    if seg_len == 0.0:
        raise ValueError("line endpoints must be distinct")
    rng = _rng(config.seed, stream)
    pose = _sample_pose(config, rng)
    u = [rng.uniform(0.0, 1.0) for _ in range(config.num_points)]
    points = [Point2(p0.x + ui * ex, p0.z + ui * ez) for ui in u]
    observations = observe(config.camera, pose, points)
    if any(q is None for q in observations):
        raise SegmentOutOfFovError("a sampled segment point lies outside the field of view")
    spread = (max(u) - min(u)) * seg_len
    dist = abs(ex * (pose.t_z - p0.z) - ez * (pose.t_x - p0.x)) / seg_len
    return CollinearScene(
        scene=Scene(config.camera, pose, points, observations),
        line=line,
        camera_line_distance=dist,
        point_spread=spread,
    )


# ---------------------------------------------------------------------------
# Serialization.  Field names are part of the on-disk contract.
# ---------------------------------------------------------------------------


def scene_to_dict(scene: Scene) -> dict:
    return {
        "camera": {"f": scene.camera.f, "N": scene.camera.n, "tau": scene.camera.tau},
        "pose": None
        if scene.true_pose is None
        else {
            "tx": scene.true_pose.t_x,
            "tz": scene.true_pose.t_z,
            "theta": scene.true_pose.theta,
        },
        "points": [[p.x, p.z] for p in scene.points],
        "observations": list(scene.observations),
    }


def scene_from_dict(data: dict) -> Scene:
    try:
        cam_d = data["camera"]
        camera = CameraModel(f=float(cam_d["f"]), n=int(cam_d["N"]), tau=float(cam_d["tau"]))
        pose_d = data.get("pose")
        pose = (
            None
            if pose_d is None
            else Pose(t_x=float(pose_d["tx"]), t_z=float(pose_d["tz"]), theta=float(pose_d["theta"]))
        )
        points = [Point2(float(x), float(z)) for x, z in data["points"]]
        observations: list[Observation] = [
            None if q is None else float(q) for q in data["observations"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed scene object: {exc}") from exc
    if len(points) != len(observations):
        raise ValueError("scene points and observations differ in length")
    return Scene(camera=camera, true_pose=pose, points=points, observations=observations)


def save_scene(scene: Scene, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scene_to_dict(scene), fh, indent=2)
        fh.write("\n")


def load_scene(path: str) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("scene file must hold a JSON object")
    return scene_from_dict(data)


def config_to_dict(config: SceneConfig) -> dict:
    return {
        "seed": config.seed,
        "num_points": config.num_points,
        "depth_range": list(config.depth_range),
        "depth_sampling": config.depth_sampling,
        "lateral_margin": config.lateral_margin,
        "pose_box": [list(config.pose_box[0]), list(config.pose_box[1])],
        "theta_range": list(config.theta_range),
        "camera": {"f": config.camera.f, "N": config.camera.n, "tau": config.camera.tau},
    }


def config_from_dict(data: dict) -> SceneConfig:
    try:
        cam_d = data["camera"]
        camera = CameraModel(f=float(cam_d["f"]), n=int(cam_d["N"]), tau=float(cam_d["tau"]))
        (x_lo, x_hi), (z_lo, z_hi) = data["pose_box"]
        return SceneConfig(
            seed=int(data["seed"]),
            num_points=int(data["num_points"]),
            depth_range=(float(data["depth_range"][0]), float(data["depth_range"][1])),
            depth_sampling=str(data.get("depth_sampling", "uniform")),
            lateral_margin=float(data["lateral_margin"]),
            pose_box=((float(x_lo), float(x_hi)), (float(z_lo), float(z_hi))),
            theta_range=(float(data["theta_range"][0]), float(data["theta_range"][1])),
            camera=camera,
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed scene config: {exc}") from exc


def load_config(path: str) -> SceneConfig:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return config_from_dict(data)


def with_num_points(config: SceneConfig, num_points: int) -> SceneConfig:
    return replace(config, num_points=num_points)
