"""Consistency-region pose estimation for 1-D pinhole cameras.

The estimator (``shape``) intersects the half-plane constraints that each
quantized observation imposes on the camera location and reads the estimate
off the resulting convex consistency region; ``l2``/``linf`` grid-search
baselines and a Monte-Carlo harness reproduce its error-decay behaviour.
"""

from .baselines import GridSpec, minimize_l2, minimize_linf, reprojection_residuals
from .camera import (
    OUT_OF_VIEW,
    CameraModel,
    Observation,
    Pose,
    fov_from_degrees,
    observe,
    project,
    quantize,
)
from .errors import (
    AllSlicesEmptyError,
    BehindCameraError,
    DegenerateRegionError,
    EmptyRegionError,
    EstimationError,
    NoConstraintsError,
    SegmentOutOfFovError,
    SentinelObservationError,
    ShapePnPError,
)
from .estimator import (
    ConsistencySlice,
    PoseEstimate,
    SweepConfig,
    collinear_decay_bound,
    estimate_location,
    estimate_pose,
    location_region,
    point_halfplanes,
)
from .geometry import (
    EMPTY_POLYGON,
    EPS_AREA,
    EPS_GEOM,
    ClipStats,
    ConvexPolygon,
    HalfPlane,
    Point2,
    area,
    box_polygon,
    centroid,
    clip,
    contains,
    diameter,
    intersect_halfplanes,
    touches_boundary,
)
from .scenegen import (
    CollinearScene,
    Scene,
    SceneConfig,
    generate,
    generate_collinear,
    load_config,
    load_scene,
    save_scene,
    scene_from_dict,
    scene_to_dict,
)

__version__ = "0.1.0"

__all__ = [
    "AllSlicesEmptyError",
    "BehindCameraError",
    "CameraModel",
    "ClipStats",
    "CollinearScene",
    "ConsistencySlice",
    "ConvexPolygon",
    "DegenerateRegionError",
    "EMPTY_POLYGON",
    "EPS_AREA",
    "EPS_GEOM",
    "EmptyRegionError",
    "EstimationError",
    "GridSpec",
    "HalfPlane",
    "NoConstraintsError",
    "OUT_OF_VIEW",
    "Observation",
    "Point2",
    "Pose",
    "PoseEstimate",
    "Scene",
    "SceneConfig",
    "SegmentOutOfFovError",
    "SentinelObservationError",
    "ShapePnPError",
    "SweepConfig",
    "area",
    "box_polygon",
    "centroid",
    "clip",
    "collinear_decay_bound",
    "contains",
    "diameter",
    "estimate_location",
    "estimate_pose",
    "fov_from_degrees",
    "generate",
    "generate_collinear",
    "intersect_halfplanes",
    "load_config",
    "load_scene",
    "location_region",
    "minimize_l2",
    "minimize_linf",
    "observe",
    "point_halfplanes",
    "project",
    "quantize",
    "reprojection_residuals",
    "save_scene",
    "scene_from_dict",
    "scene_to_dict",
    "touches_boundary",
]
