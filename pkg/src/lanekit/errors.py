"""Exception hierarchy shared by all lanekit modules."""


class LaneKitError(Exception):
    """Base class for every error raised by this package."""


# --- raster / plane operations ---

class ChannelMismatchError(LaneKitError):
    """Operation needs a different channel count than the input has."""


class ImageTooSmallError(LaneKitError):
    """Input smaller than the kernel or minimum size an operation needs."""


class DimensionMismatchError(LaneKitError):
    """Two rasters that must share dimensions do not."""


# --- calibration ---

class InsufficientViewsError(LaneKitError):
    """Fewer chessboard views than the calibration minimum (3)."""


class DegenerateViewsError(LaneKitError):
    """Board poses leave the intrinsic constraint system rank-deficient."""


class NumericalFailureError(LaneKitError):
    """A linear solve or refinement step failed beyond recovery."""


class BehindCameraError(LaneKitError):
    """Point has non-positive depth in the camera frame."""


class NonConvergenceError(LaneKitError):
    """Fixed-point distortion inversion did not converge."""


class FileError(LaneKitError):
    """File missing or unreadable."""


class ParseError(LaneKitError):
    """Malformed text input (calibration file, corners file, config)."""


# --- homography / warping ---

class DegenerateQuadError(LaneKitError):
    """Three of the four quad points are collinear."""


class DegenerateConfigurationError(LaneKitError):
    """Point correspondences do not determine a homography."""


class PointAtInfinityError(LaneKitError):
    """Projective division by (numerically) zero."""


class SingularMatrixError(LaneKitError):
    """Homography is not invertible."""


# --- segmentation ---

class InvalidRangeError(LaneKitError):
    """Threshold range with lo > hi."""


class UnknownRuleNameError(LaneKitError):
    """Combine expression references a rule that was never defined."""


# --- lane detection / tracking ---

class LaneNotFoundError(LaneKitError):
    """No candidate pixels for one side of the lane."""

    def __init__(self, side: str):
        super().__init__(f"no lane pixels found on {side} side")
        self.side = side


class InsufficientPixelsError(LaneKitError):
    """Too few pixels to fit a second-degree polynomial."""


class DegenerateGeometryError(LaneKitError):
    """Fit pixels span too few distinct rows."""


class RejectedPairError(LaneKitError):
    """Metric requested on a lane pair that failed validation."""


class NoPriorAndNoDetectionError(LaneKitError):
    """First frame of a sequence yielded nothing to track."""


# --- pipeline / CLI ---

class EmptyInputError(LaneKitError):
    """Input directory has no usable frames (or too few for the operation)."""


class TruthMismatchError(LaneKitError):
    """Ground-truth entries do not match the input frames one to one."""


class ScenarioSpecError(LaneKitError):
    """Invalid synthetic scenario specification."""
