"""Synthetic road scenes with exact ground truth.

True lane polynomials are chosen in bird's-eye space, rasterized as stripes
over a textured road, warped into a camera view with the same default quad
homography the pipeline inverts, optionally passed through a lens-distortion
model, degraded per condition, and written with a truth file. Because the
generator and the pipeline share the plane geometry, detected fits are
directly comparable to the truth coefficients.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .calibration import CameraModel, save_model, undistort_points
from .config import PipelineConfig, birdseye_homography
from .errors import FileError, ScenarioSpecError
from .frameio import write_mask_png, write_png
from .homography import invert, build_warp_remap
from .image import ImageBuffer, PrecomputedRemap
from .metrics import ScaleConfig

CONDITIONS = ("day", "night", "worn")
EMIT_MODES = ("frames", "masks")

STRIPE_HALF_WIDTH = 6.0  # 12 px stripes
YELLOW = (230, 200, 60)
WHITE = (245, 245, 245)
NIGHT_GAIN = 0.35
WORN_ALPHA = 0.4
ROAD_GRAY = 105.0
BACKDROP = (125, 130, 135)  # off-road / above-horizon fill
DASH_PERIOD = 70  # rows; first 45 drawn, rest gap


@dataclass(frozen=True)
class ScenarioSpec:
    frames: int
    width: int = 1280
    height: int = 720
    condition: str = "day"
    noise_sigma: float = 0.0  # 8-bit units
    radius_m: float = 0.0  # 0 means straight
    curve_direction: str = "right"
    lane_width_px: float = 700.0
    center_offset_px: float = 0.0
    sway_px: float = 0.0
    sway_period: int = 40
    dashed_right: bool = False
    emit: str = "frames"
    seed: int = 1234
    fx: float = 1000.0
    fy: float = 1000.0
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        if self.frames < 1:
            raise ScenarioSpecError(f"frame count must be >= 1, got {self.frames}")
        if self.width < 64 or self.height < 64:
            raise ScenarioSpecError("frame size too small")
        if self.condition not in CONDITIONS:
            raise ScenarioSpecError(f"condition must be one of {CONDITIONS}")
        if self.emit not in EMIT_MODES:
            raise ScenarioSpecError(f"emit must be one of {EMIT_MODES}")
        if self.noise_sigma < 0:
            raise ScenarioSpecError("noise_sigma must be >= 0")
        if self.radius_m < 0:
            raise ScenarioSpecError("radius_m must be >= 0 (0 = straight)")
        if self.curve_direction not in ("left", "right"):
            raise ScenarioSpecError("curve_direction must be left or right")
        if self.lane_width_px <= 0 or self.sway_period < 1:
            raise ScenarioSpecError("bad lane geometry")

    def camera_model(self) -> CameraModel:
        return CameraModel(
            fx=self.fx, fy=self.fy, cx=self.width / 2.0, cy=self.height / 2.0,
            k1=self.k1, k2=self.k2, k3=self.k3, p1=self.p1, p2=self.p2,
            image_width=self.width, image_height=self.height,
        )

    def has_distortion(self) -> bool:
        return any(abs(v) > 0 for v in (self.k1, self.k2, self.k3, self.p1, self.p2))


_SCENARIO_TYPES = {
    "frames": int, "width": int, "height": int, "condition": str,
    "noise_sigma": float, "radius_m": float, "curve_direction": str,
    "lane_width_px": float, "center_offset_px": float, "sway_px": float,
    "sway_period": int, "dashed_right": bool, "emit": str, "seed": int,
    "fx": float, "fy": float, "k1": float, "k2": float, "k3": float,
    "p1": float, "p2": float,
}


def parse_scenario_text(text: str) -> ScenarioSpec:
    from .config import parse_kv_text

    values = {}
    for lineno, key, value in parse_kv_text(text):
        if key not in _SCENARIO_TYPES:
            raise ScenarioSpecError(f"line {lineno}: unknown scenario key '{key}'")
        typ = _SCENARIO_TYPES[key]
        try:
            if typ is bool:
                values[key] = value.lower() in ("true", "1", "yes")
            else:
                values[key] = typ(value)
        except ValueError as exc:
            raise ScenarioSpecError(f"line {lineno}: bad value for '{key}': {value!r}") from exc
    if "frames" not in values:
        raise ScenarioSpecError("scenario must set frames=<n>")
    return ScenarioSpec(**values)


def load_scenario(path) -> ScenarioSpec:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_scenario_text(f.read())
    except OSError as exc:
        raise FileError(f"cannot read scenario {path}: {exc}") from exc


def truth_polys(spec: ScenarioSpec, frame_idx: int):
    """True (a, b, c) per side in bird's-eye pixels, vertex at the bottom row."""
    scale = ScaleConfig()
    yb = spec.height - 1
    if spec.radius_m > 0:
        a = scale.ym_per_pix ** 2 / (2.0 * spec.radius_m * scale.xm_per_pix)
        if spec.curve_direction == "left":
            a = -a
    else:
        a = 0.0
    b = -2.0 * a * yb
    sway = 0.0
    if spec.sway_px:
        sway = spec.sway_px * math.sin(2.0 * math.pi * frame_idx / spec.sway_period)
    bottom_center = spec.width / 2.0 + spec.center_offset_px + sway
    left_bottom = bottom_center - spec.lane_width_px / 2.0
    c_left = left_bottom + a * yb * yb
    left = (a, b, c_left)
    right = (a, b, c_left + spec.lane_width_px)
    return left, right


def _stripe_mask(poly, width: int, height: int, dashed: bool) -> np.ndarray:
    a, b, c = poly
    ys = np.arange(height, dtype=np.float64)
    centers = (a * ys + b) * ys + c
    xs = np.arange(width, dtype=np.float64)
    mask = np.abs(xs[None, :] - centers[:, None]) < STRIPE_HALF_WIDTH
    if dashed:
        mask &= ((np.arange(height) % DASH_PERIOD) < 45)[:, None]
    return mask


def _road_texture(width: int, height: int) -> np.ndarray:
    """Static low-frequency asphalt shading (deterministic, gradient-gentle)."""
    xs = np.arange(width, dtype=np.float32)
    ys = np.arange(height, dtype=np.float32)
    tex = 6.0 * np.sin(2 * np.pi * xs[None, :] / 97.0) * np.cos(2 * np.pi * ys[:, None] / 71.0)
    return (ROAD_GRAY + tex).astype(np.float32)


def render_birdseye_scene(spec: ScenarioSpec, left, right) -> np.ndarray:
    """Float RGB bird's-eye scene (stripes composited over the road)."""
    w, h = spec.width, spec.height
    scene = np.repeat(_road_texture(w, h)[:, :, None], 3, axis=2)
    alpha = WORN_ALPHA if spec.condition == "worn" else 1.0
    for poly, color, dashed in (
        (left, YELLOW, False),
        (right, WHITE, spec.dashed_right),
    ):
        stripe = _stripe_mask(poly, w, h, dashed)
        col = np.array(color, dtype=np.float32)
        scene[stripe] = (1.0 - alpha) * scene[stripe] + alpha * col
    return scene


def _distortion_remap(spec: ScenarioSpec) -> PrecomputedRemap:
    """Source map that the pipeline's forward-model undistortion inverts.

    The synthetic camera frame at pixel q shows the ideal scene at
    undistort(q); undistort_image then samples the synthetic frame at
    distort(p), landing back on the ideal scene at p.
    """
    model = spec.camera_model()
    xs, ys = np.meshgrid(np.arange(spec.width), np.arange(spec.height))
    pts = np.column_stack([xs.ravel(), ys.ravel()]).astype(np.float64)
    src = undistort_points(model, pts)
    return PrecomputedRemap(
        src[:, 0].reshape(spec.height, spec.width),
        src[:, 1].reshape(spec.height, spec.width),
        spec.width,
        spec.height,
    )


class _FrameFactory:
    def __init__(self, spec: ScenarioSpec):
        self.spec = spec
        cfg = PipelineConfig()
        h_bird = birdseye_homography(cfg, spec.width, spec.height)
        self.to_camera = build_warp_remap(
            invert(h_bird), (spec.width, spec.height), (spec.width, spec.height)
        )
        cov = self.to_camera.apply(np.ones((spec.height, spec.width), dtype=np.float32))
        self.uncovered = cov < 0.5
        self.dist_remap = _distortion_remap(spec) if spec.has_distortion() else None

    def camera_frame(self, scene: np.ndarray, frame_idx: int) -> np.ndarray:
        spec = self.spec
        view = self.to_camera.apply(scene)
        view[self.uncovered] = np.array(BACKDROP, dtype=np.float32)
        if self.dist_remap is not None:
            view = self.dist_remap.apply(view)
            view[~self.dist_remap.valid] = np.array(BACKDROP, dtype=np.float32)
        if spec.condition == "night":
            view = view * NIGHT_GAIN
        if spec.noise_sigma > 0:
            rng = np.random.default_rng([spec.seed, frame_idx])
            view = view + rng.normal(0.0, spec.noise_sigma, size=view.shape)
        return np.clip(np.floor(view + 0.5), 0, 255).astype(np.uint8)


def generate_scenario(spec: ScenarioSpec, out_dir) -> list[str]:
    """Write frames (or masks), truth.txt, and calibration.json; returns names."""
    os.makedirs(out_dir, exist_ok=True)
    factory = _FrameFactory(spec) if spec.emit == "frames" else None
    names = []
    truth_lines = []
    for i in range(spec.frames):
        left, right = truth_polys(spec, i)
        name = f"frame_{i:04d}.png"
        path = os.path.join(out_dir, name)
        if spec.emit == "masks":
            mask = _stripe_mask(left, spec.width, spec.height, False) | _stripe_mask(
                right, spec.width, spec.height, spec.dashed_right
            )
            write_mask_png(mask, path)
        else:
            scene = render_birdseye_scene(spec, left, right)
            write_png(ImageBuffer(factory.camera_frame(scene, i)), path)
        names.append(name)
        truth_lines.append(
            f"{name} {left[0]:.10g} {left[1]:.10g} {left[2]:.10g} "
            f"{right[0]:.10g} {right[1]:.10g} {right[2]:.10g} {spec.condition}"
        )
    with open(os.path.join(out_dir, "truth.txt"), "w", encoding="utf-8") as f:
        f.write("\n".join(truth_lines) + "\n")
    save_model(spec.camera_model(), os.path.join(out_dir, "calibration.json"))
    return names


def run_synth(spec_path, out_dir) -> int:
    spec = load_scenario(spec_path)
    names = generate_scenario(spec, out_dir)
    return len(names)
