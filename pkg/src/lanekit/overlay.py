"""Project detections back onto the camera frame and annotate metrics.

The lane region is filled row by row in bird's-eye space (the region is
y-monotone, so scanline fill is exact), warped back with the inverse
homography, and alpha-blended onto the frame. Text uses the embedded 8x8
font so output is bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .font8x8 import GLYPH_SIZE, glyph_for
from .homography import Homography, build_warp_remap
from .image import ImageBuffer, PrecomputedRemap

# text block layout: first baseline at TEXT_ORIGIN, one line every
# LINE_STRIDE_ROWS glyph rows, both scaled by style.text_scale
TEXT_ORIGIN = (16, 16)
LINE_STRIDE_ROWS = 10


@dataclass(frozen=True)
class OverlayStyle:
    fill_color: tuple = (0, 128, 0)
    alpha: float = 0.3
    line_color: tuple = (255, 140, 0)
    text_color: tuple = (255, 255, 255)
    text_scale: int = 2

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be within [0, 1]")
        if self.text_scale < 1:
            raise ValueError("text_scale must be >= 1")


def _fill_lane_layer(pair, width: int, height: int, color) -> tuple[np.ndarray, np.ndarray]:
    layer = np.zeros((height, width, 3), dtype=np.float32)
    coverage = np.zeros((height, width), dtype=np.float32)
    ys = np.arange(height, dtype=np.float64)
    lefts = np.floor(pair.left.eval(ys) + 0.5).astype(np.int64)
    rights = np.floor(pair.right.eval(ys) + 0.5).astype(np.int64)
    col = np.array(color, dtype=np.float32)
    for y in range(height):
        lo, hi = lefts[y], rights[y]
        if hi < lo or hi < 0 or lo > width - 1:
            continue
        lo = max(int(lo), 0)
        hi = min(int(hi), width - 1)
        layer[y, lo : hi + 1] = col
        coverage[y, lo : hi + 1] = 1.0
    return layer, coverage


def _round_half_away(values: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def render_lane_region(
    frame: ImageBuffer,
    pair,
    warp_inv: Homography,
    style: OverlayStyle,
    birdseye_size: tuple | None = None,
    remap: PrecomputedRemap | None = None,
) -> ImageBuffer:
    """Alpha-blend the warped lane region onto the frame.

    Only pixels whose warped coverage exceeds 0.5 blend; everything else is
    untouched. `remap` can supply a precomputed bird's-eye-to-frame mapping
    (it must match warp_inv); otherwise one is built here.
    """
    bw, bh = birdseye_size if birdseye_size is not None else (frame.width, frame.height)
    layer, coverage = _fill_lane_layer(pair, bw, bh, style.fill_color)
    if remap is None:
        remap = build_warp_remap(warp_inv, (bw, bh), (frame.width, frame.height))
    warped_layer = remap.apply(layer)
    warped_cov = remap.apply(coverage)
    covered = warped_cov > 0.5
    out = frame.data.astype(np.float32)
    a = np.float32(style.alpha)
    out[covered] = (1.0 - a) * out[covered] + a * warped_layer[covered]
    return ImageBuffer(np.clip(_round_half_away(out), 0, 255).astype(np.uint8))


def draw_text(data: np.ndarray, text: str, x: int, y: int, color, scale: int = 1) -> None:
    """Stamp glyphs into a (h, w, 3) uint8 array in place, clipped to bounds."""
    h, w = data.shape[:2]
    col = np.array(color, dtype=np.uint8)
    cx = x
    for ch in text:
        bits = glyph_for(ch)
        if scale != 1:
            bits = np.kron(bits, np.ones((scale, scale), dtype=bool))
        gh, gw = bits.shape
        y0, x0 = max(y, 0), max(cx, 0)
        y1, x1 = min(y + gh, h), min(cx + gw, w)
        if y1 > y0 and x1 > x0:
            sub = bits[y0 - y : y1 - y, x0 - cx : x1 - cx]
            region = data[y0:y1, x0:x1]
            region[sub] = col
        cx += GLYPH_SIZE * scale


def format_radius(mean_radius_m) -> str:
    if mean_radius_m is None:
        return "Radius: straight"
    return f"Radius: {mean_radius_m:.0f} m"


def format_offset(offset_m: float) -> str:
    return f"Offset: {offset_m:+.2f} m"


def annotate_metrics(frame: ImageBuffer, metrics, style: OverlayStyle) -> ImageBuffer:
    """Write the radius and offset lines at the documented positions."""
    data = frame.data.copy()
    ox, oy = TEXT_ORIGIN
    stride = LINE_STRIDE_ROWS * style.text_scale
    draw_text(data, format_radius(metrics.mean_radius_m), ox, oy, style.text_color, style.text_scale)
    draw_text(data, format_offset(metrics.offset_m), ox, oy + stride, style.text_color, style.text_scale)
    return ImageBuffer(data)


def draw_window_trace(frame_birdseye: ImageBuffer, trace, style: OverlayStyle) -> ImageBuffer:
    """1-px rectangles for each search window, clipped to the image."""
    data = frame_birdseye.data.copy()
    if data.ndim == 2:
        data = np.stack([data] * 3, axis=2)
    h, w = data.shape[:2]
    col = np.array(style.line_color, dtype=np.uint8)
    for _side, x0, y0, x1, y1 in trace:
        cx0, cx1 = max(x0, 0), min(x1, w - 1)
        cy0, cy1 = max(y0, 0), min(y1, h - 1)
        if cx0 > cx1 or cy0 > cy1:
            continue
        if 0 <= y0 < h:
            data[y0, cx0 : cx1 + 1] = col
        if 0 <= y1 < h:
            data[y1, cx0 : cx1 + 1] = col
        if 0 <= x0 < w:
            data[cy0 : cy1 + 1, x0] = col
        if 0 <= x1 < w:
            data[cy0 : cy1 + 1, x1] = col
    return ImageBuffer(data)
