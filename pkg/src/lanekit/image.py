"""Raster buffers, color-space conversions, gradient kernels, interpolation.

Shared substrate of every pipeline stage. Storage is 8-bit; math happens on
unit-interval float32 planes. A "plane" throughout this package is a 2-D
float32 ndarray (luma in [0,1], hue in degrees [0,360), gradients unbounded,
LAB channels on their native scales).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChannelMismatchError, DimensionMismatchError, ImageTooSmallError

# Rec.601 luma weights; fixed so tests are deterministic.
LUMA_R, LUMA_G, LUMA_B = 0.299, 0.587, 0.114

# sRGB -> XYZ (D65) and the CIELAB f(t) split point.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ],
    dtype=np.float64,
)
_D65 = np.array([0.95047, 1.0, 1.08883], dtype=np.float64)
_LAB_EPS = (6.0 / 29.0) ** 3

# 256-entry gamma expansion LUT: uint8 sRGB -> linear, float32.
_c = np.arange(256, dtype=np.float64) / 255.0
_GAMMA_LUT = np.where(_c <= 0.04045, _c / 12.92, ((_c + 0.055) / 1.055) ** 2.4).astype(
    np.float32
)
del _c


@dataclass(frozen=True)
class ImageBuffer:
    """Row-major 8-bit raster, 1 (grayscale) or 3 (RGB) channels.

    ``data`` is a uint8 ndarray of shape (height, width) or
    (height, width, 3).
    """

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.dtype != np.uint8:
            raise TypeError(f"ImageBuffer stores uint8, got {d.dtype}")
        if d.ndim == 2:
            pass
        elif d.ndim == 3 and d.shape[2] == 3:
            pass
        else:
            raise ChannelMismatchError(f"expected 1 or 3 channels, got shape {d.shape}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if not d.flags.c_contiguous:
            object.__setattr__(self, "data", np.ascontiguousarray(d))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.data.ndim == 2 else self.data.shape[2]

    def to_float(self) -> np.ndarray:
        """Unit-interval float32 view of the samples."""
        return self.data.astype(np.float32) / np.float32(255.0)

    @staticmethod
    def from_float(samples: np.ndarray) -> "ImageBuffer":
        """Quantize unit-interval floats back to 8-bit storage (round half up)."""
        q = np.floor(np.clip(samples, 0.0, 1.0) * 255.0 + 0.5)
        return ImageBuffer(q.astype(np.uint8))


def _require_rgb(img: ImageBuffer) -> np.ndarray:
    if img.channels != 3:
        raise ChannelMismatchError(f"need a 3-channel image, got {img.channels}")
    return img.to_float()


def to_grayscale(img: ImageBuffer) -> np.ndarray:
    """Rec.601 luma plane in [0,1] from an RGB image."""
    f = _require_rgb(img)
    return (
        np.float32(LUMA_R) * f[:, :, 0]
        + np.float32(LUMA_G) * f[:, :, 1]
        + np.float32(LUMA_B) * f[:, :, 2]
    )


def _hue_degrees(r, g, b, maxc, chroma):
    """Hexcone hue in degrees [0,360); 0 where chroma is zero."""
    safe = np.where(chroma > 0, chroma, np.float32(1.0))
    hr = np.mod((g - b) / safe, np.float32(6.0))
    hg = (b - r) / safe + np.float32(2.0)
    hb = (r - g) / safe + np.float32(4.0)
    sector = np.where(maxc == r, hr, np.where(maxc == g, hg, hb))
    h = np.float32(60.0) * sector
    h = np.where(chroma > 0, h, np.float32(0.0))
    # mod can land exactly on 6.0 through rounding; fold back into range
    return np.where(h >= 360.0, h - np.float32(360.0), h)


def rgb_to_hls(img: ImageBuffer):
    """Hexcone HLS planes: H degrees [0,360), L [0,1], S [0,1].

    Achromatic pixels get H = 0 and S = 0 by convention.
    """
    f = _require_rgb(img)
    r, g, b = f[:, :, 0], f[:, :, 1], f[:, :, 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    chroma = maxc - minc
    lum = (maxc + minc) * np.float32(0.5)
    denom = np.float32(1.0) - np.abs(np.float32(2.0) * lum - np.float32(1.0))
    sat = np.where(chroma > 0, chroma / np.where(denom > 0, denom, np.float32(1.0)), np.float32(0.0))
    hue = _hue_degrees(r, g, b, maxc, chroma)
    return hue, lum, sat.astype(np.float32)


def rgb_to_hsv(img: ImageBuffer):
    """Hexcone HSV planes: H degrees [0,360), S [0,1], V [0,1].

    S is defined 0 when V = 0.
    """
    f = _require_rgb(img)
    r, g, b = f[:, :, 0], f[:, :, 1], f[:, :, 2]
    maxc = np.maximum(np.maximum(r, g), b)
    minc = np.minimum(np.minimum(r, g), b)
    chroma = maxc - minc
    sat = np.where(maxc > 0, chroma / np.where(maxc > 0, maxc, np.float32(1.0)), np.float32(0.0))
    hue = _hue_degrees(r, g, b, maxc, chroma)
    return hue, sat.astype(np.float32), maxc


def _lab_f(t: np.ndarray) -> np.ndarray:
    # cube-root / linear split at (6/29)^3
    return np.where(t > _LAB_EPS, np.cbrt(t), t / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)


def rgb_to_lab(img: ImageBuffer):
    """CIELAB planes from sRGB: L* [0,100], a* and b* roughly [-128,127].

    sRGB gamma expansion, XYZ under D65, then the standard f(t) transform.
    """
    if img.channels != 3:
        raise ChannelMismatchError(f"need a 3-channel image, got {img.channels}")
    lin = _GAMMA_LUT[img.data]  # (h, w, 3) linear RGB
    x = lin @ _SRGB_TO_XYZ[0].astype(np.float32) / np.float32(_D65[0])
    y = lin @ _SRGB_TO_XYZ[1].astype(np.float32)  # Yn = 1
    z = lin @ _SRGB_TO_XYZ[2].astype(np.float32) / np.float32(_D65[2])
    fx, fy, fz = _lab_f(x), _lab_f(y), _lab_f(z)
    l_star = np.float32(116.0) * fy - np.float32(16.0)
    a_star = np.float32(500.0) * (fx - fy)
    b_star = np.float32(200.0) * (fy - fz)
    return l_star.astype(np.float32), a_star.astype(np.float32), b_star.astype(np.float32)


def sobel(plane: np.ndarray, axis: str) -> np.ndarray:
    """3x3 Sobel derivative of a plane, edge-replicate border, unnormalized.

    ``axis`` is "x" or "y". Response sign follows the ramp direction:
    an increasing ramp along the axis gives a positive gradient.
    """
    if plane.shape[0] < 3 or plane.shape[1] < 3:
        raise ImageTooSmallError(f"sobel needs at least 3x3, got {plane.shape}")
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    p = np.pad(plane.astype(np.float32, copy=False), 1, mode="edge")
    if axis == "x":
        right = p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:]
        left = p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2]
        return (right - left).astype(np.float32)
    bottom = p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]
    top = p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:]
    return (bottom - top).astype(np.float32)


def grad_magnitude(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Pointwise sqrt(gx^2 + gy^2)."""
    if gx.shape != gy.shape:
        raise DimensionMismatchError(f"gradient shapes differ: {gx.shape} vs {gy.shape}")
    return np.hypot(gx, gy).astype(np.float32)


def grad_direction(gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Absolute gradient direction arctan(|gy|/|gx|) in [0, pi/2]; 0 at (0,0)."""
    if gx.shape != gy.shape:
        raise DimensionMismatchError(f"gradient shapes differ: {gx.shape} vs {gy.shape}")
    return np.arctan2(np.abs(gy), np.abs(gx)).astype(np.float32)


def bilinear_sample(img: ImageBuffer, x: float, y: float) -> np.ndarray:
    """Bilinear sample at (x, y) in pixel coordinates, per-channel floats.

    Coordinates outside [0, w-1] x [0, h-1] return 0 (black). Total function.
    """
    h, w = img.height, img.width
    c = img.channels
    if x < 0 or y < 0 or x > w - 1 or y > h - 1:
        return np.zeros(c, dtype=np.float64)
    x0 = min(int(np.floor(x)), w - 2) if w > 1 else 0
    y0 = min(int(np.floor(y)), h - 2) if h > 1 else 0
    fx = x - x0
    fy = y - y0
    d = img.data if c == 3 else img.data[:, :, None]
    x1 = min(x0 + 1, w - 1)
    y1 = min(y0 + 1, h - 1)
    p00 = d[y0, x0].astype(np.float64)
    p10 = d[y0, x1].astype(np.float64)
    p01 = d[y1, x0].astype(np.float64)
    p11 = d[y1, x1].astype(np.float64)
    top = p00 * (1.0 - fx) + p10 * fx
    bot = p01 * (1.0 - fx) + p11 * fx
    return top * (1.0 - fy) + bot * fy


class PrecomputedRemap:
    """Bilinear gather for a fixed (map_x, map_y) -> repeated fast remapping.

    For every output pixel, (map_x, map_y) give the source location in an
    input of size (src_height, src_width). Out-of-range locations produce 0
    on every channel, matching :func:`bilinear_sample`. Index and weight
    arrays are computed once so per-frame application is four gathers and a
    lerp.
    """

    def __init__(self, map_x: np.ndarray, map_y: np.ndarray, src_width: int, src_height: int):
        if map_x.shape != map_y.shape:
            raise DimensionMismatchError("map_x and map_y must share a shape")
        self.out_shape = map_x.shape
        self.src_width = src_width
        self.src_height = src_height
        w, h = src_width, src_height
        mx = map_x.astype(np.float32).ravel()
        my = map_y.astype(np.float32).ravel()
        valid = (mx >= 0) & (my >= 0) & (mx <= w - 1) & (my <= h - 1)
        mx = np.clip(mx, 0, w - 1)
        my = np.clip(my, 0, h - 1)
        x0 = np.floor(mx).astype(np.int32)
        y0 = np.floor(my).astype(np.int32)
        if w > 1:
            np.minimum(x0, w - 2, out=x0)
        if h > 1:
            np.minimum(y0, h - 2, out=y0)
        fx = (mx - x0).astype(np.float32)
        fy = (my - y0).astype(np.float32)
        self._idx00 = (y0.astype(np.int64) * w + x0).astype(np.int64)
        self._dx = 1 if w > 1 else 0
        self._dy = w if h > 1 else 0
        self._w00 = ((1.0 - fx) * (1.0 - fy)).astype(np.float32)
        self._w10 = (fx * (1.0 - fy)).astype(np.float32)
        self._w01 = ((1.0 - fx) * fy).astype(np.float32)
        self._w11 = (fx * fy).astype(np.float32)
        self._valid = valid

    @property
    def valid(self) -> np.ndarray:
        """Bool mask of output pixels whose source location was in range."""
        return self._valid.reshape(self.out_shape)

    def apply(self, data: np.ndarray) -> np.ndarray:
        """Remap uint8 or float samples of shape (h, w) or (h, w, 3)."""
        h, w = data.shape[:2]
        if w != self.src_width or h != self.src_height:
            raise DimensionMismatchError(
                f"remap built for {self.src_width}x{self.src_height}, got {w}x{h}"
            )
        multi = data.ndim == 3
        flat = data.reshape(h * w, -1).astype(np.float32, copy=False)
        i00 = self._idx00
        acc = self._w00[:, None] * flat[i00]
        acc += self._w10[:, None] * flat[i00 + self._dx]
        acc += self._w01[:, None] * flat[i00 + self._dy]
        acc += self._w11[:, None] * flat[i00 + self._dx + self._dy]
        acc[~self._valid] = 0.0
        out_shape = self.out_shape + ((flat.shape[1],) if multi else ())
        return acc.reshape(out_shape) if multi else acc[:, 0].reshape(self.out_shape)

    def apply_u8(self, data: np.ndarray) -> np.ndarray:
        """Remap and quantize back to uint8 (round half up)."""
        return np.floor(self.apply(data) + 0.5).astype(np.uint8)
