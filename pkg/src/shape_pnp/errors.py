"""Exception types shared across the package.

Configuration mistakes (bad field-of-view, malformed grids, invalid scene
configs) raise plain ValueError.  The classes below cover failures that can
occur during estimation on structurally valid input; the CLI maps them to a
dedicated exit code.
"""


class ShapePnPError(Exception):
    """Base class for package-specific errors."""


class EstimationError(ShapePnPError):
    """An estimator could not produce a pose from the given observations."""


class BehindCameraError(EstimationError):
    """A point lies on or behind the image plane for the queried pose."""


class SentinelObservationError(EstimationError):
    """An out-of-view observation was passed where a pixel value is required."""


class NoConstraintsError(EstimationError):
    """Every observation is the out-of-view sentinel; nothing constrains the pose."""


class EmptyRegionError(EstimationError):
    """The consistency region is empty (observations are mutually inconsistent)."""


class DegenerateRegionError(EstimationError):
    """The consistency region has (near-)zero area; its centroid is undefined."""


class AllSlicesEmptyError(EstimationError):
    """No orientation in the sweep produced a non-empty consistency region."""


class SegmentOutOfFovError(ShapePnPError):
    """A requested collinear scene does not fit inside the camera's view."""
