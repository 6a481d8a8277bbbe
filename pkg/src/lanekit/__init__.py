"""Classical lane detection: calibrate, warp, threshold, track, annotate."""

__version__ = "0.1.0"

from .calibration import (
    CalibrationResult,
    CameraModel,
    ChessboardObservation,
    calibrate_zhang,
    load_model,
    refine_reprojection,
    save_model,
    undistort_image,
    undistort_points,
)
from .config import PipelineConfig, birdseye_homography, load_config, parse_config_text
from .detect import (
    LaneFit,
    LanePair,
    SlidingWindowConfig,
    TrackConfig,
    TrackerState,
    ValidationConfig,
    base_histogram,
    fit_polynomial,
    search_around_fit,
    sliding_window_search,
    track_frame,
    validate_pair,
)
from .errors import LaneKitError
from .evaluate import EvalReport, run_eval
from .homography import Homography, estimate_homography_dlt, homography_from_quad, warp_image
from .image import ImageBuffer
from .metrics import FrameMetrics, ScaleConfig, compute_frame_metrics, curvature_radius, vehicle_offset
from .overlay import OverlayStyle, annotate_metrics, render_lane_region
from .pipeline import Pipeline, run_process
from .segmentation import ThresholdConfig, ThresholdRule, default_threshold_config, segment_frame
from .synth import ScenarioSpec, generate_scenario, load_scenario

__all__ = [
    "__version__",
    "CalibrationResult",
    "CameraModel",
    "ChessboardObservation",
    "calibrate_zhang",
    "load_model",
    "refine_reprojection",
    "save_model",
    "undistort_image",
    "undistort_points",
    "PipelineConfig",
    "birdseye_homography",
    "load_config",
    "parse_config_text",
    "LaneFit",
    "LanePair",
    "SlidingWindowConfig",
    "TrackConfig",
    "TrackerState",
    "ValidationConfig",
    "base_histogram",
    "fit_polynomial",
    "search_around_fit",
    "sliding_window_search",
    "track_frame",
    "validate_pair",
    "LaneKitError",
    "EvalReport",
    "run_eval",
    "Homography",
    "estimate_homography_dlt",
    "homography_from_quad",
    "warp_image",
    "ImageBuffer",
    "FrameMetrics",
    "ScaleConfig",
    "compute_frame_metrics",
    "curvature_radius",
    "vehicle_offset",
    "OverlayStyle",
    "annotate_metrics",
    "render_lane_region",
    "Pipeline",
    "run_process",
    "ThresholdConfig",
    "ThresholdRule",
    "default_threshold_config",
    "segment_frame",
    "ScenarioSpec",
    "generate_scenario",
    "load_scenario",
]
