"""Pixel-space fits to real-world measurements: curvature radius and offset."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import RejectedPairError

# below this |a| in meter space (radius beyond ~5,000 km) a lane counts as straight
STRAIGHT_CURVATURE_PER_M = 1e-7


@dataclass(frozen=True)
class ScaleConfig:
    xm_per_pix: float = 3.7 / 700.0
    ym_per_pix: float = 30.0 / 720.0

    def __post_init__(self):
        if self.xm_per_pix <= 0 or self.ym_per_pix <= 0:
            raise ValueError("meter-per-pixel scales must be positive")


@dataclass(frozen=True)
class MeterFit:
    a_m: float  # 1/m
    b_m: float  # dimensionless
    c_m: float  # m


@dataclass(frozen=True)
class FrameMetrics:
    left_radius_m: float | None
    right_radius_m: float | None
    mean_radius_m: float | None  # mean of the radii present; None when both straight
    offset_m: float
    frame_time_ms: float = 0.0


def to_meter_space(fit, scale: ScaleConfig) -> MeterFit:
    """Substitute x_m = x*xm, y_m = y*ym into x = a*y^2 + b*y + c."""
    xm, ym = scale.xm_per_pix, scale.ym_per_pix
    return MeterFit(
        a_m=fit.a * xm / (ym * ym),
        b_m=fit.b * xm / ym,
        c_m=fit.c * xm,
    )


def curvature_radius(fit, y_eval: float, scale: ScaleConfig) -> float | None:
    """Radius of curvature in meters at pixel row y_eval; None when straight."""
    m = to_meter_space(fit, scale)
    if abs(m.a_m) < STRAIGHT_CURVATURE_PER_M:
        return None
    y_m = y_eval * scale.ym_per_pix
    slope = 2.0 * m.a_m * y_m + m.b_m
    return (1.0 + slope * slope) ** 1.5 / abs(2.0 * m.a_m)


def vehicle_offset(pair, img_width: int, img_height: int, scale: ScaleConfig) -> float:
    """Signed meters from image center to lane center at the bottom row.

    Positive means the vehicle sits right of the lane center (camera assumed
    mounted on the vehicle centerline).
    """
    if pair.status != "accepted":
        raise RejectedPairError(f"cannot compute offset for a rejected pair ({pair.reason})")
    y_bottom = img_height - 1
    lane_center = (pair.left.eval(y_bottom) + pair.right.eval(y_bottom)) / 2.0
    return (img_width / 2.0 - lane_center) * scale.xm_per_pix


def compute_frame_metrics(
    pair, img_width: int, img_height: int, scale: ScaleConfig, frame_time_ms: float = 0.0
) -> FrameMetrics:
    """Bundle bottom-row radii and offset for one accepted pair."""
    y_bottom = img_height - 1
    left_r = curvature_radius(pair.left, y_bottom, scale)
    right_r = curvature_radius(pair.right, y_bottom, scale)
    present = [r for r in (left_r, right_r) if r is not None]
    mean_r = math.fsum(present) / len(present) if present else None
    return FrameMetrics(
        left_radius_m=left_r,
        right_radius_m=right_r,
        mean_radius_m=mean_r,
        offset_m=vehicle_offset(pair, img_width, img_height, scale),
        frame_time_ms=frame_time_ms,
    )
