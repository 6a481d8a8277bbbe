"""Plane-to-plane projective maps: estimation, inversion, image warping."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateConfigurationError,
    DegenerateQuadError,
    PointAtInfinityError,
    SingularMatrixError,
)
from .image import ImageBuffer, PrecomputedRemap

_DET_MIN = 1e-12


@dataclass(frozen=True)
class Homography:
    """3x3 projective map, normalized so the bottom-right element is 1."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError(f"homography must be 3x3, got {m.shape}")
        if abs(m[2, 2]) < _DET_MIN:
            raise SingularMatrixError("cannot normalize: bottom-right element ~ 0")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) < _DET_MIN:
            raise SingularMatrixError("homography matrix is singular")
        object.__setattr__(self, "m", m)

    @staticmethod
    def identity() -> "Homography":
        return Homography(np.eye(3))


def _collinear_triple_exists(pts: np.ndarray) -> bool:
    """True if any 3 of the 4 points are (numerically) collinear."""
    scale = max(1.0, float(np.max(np.abs(pts - pts.mean(axis=0)))))
    for skip in range(4):
        a, b, c = [pts[i] for i in range(4) if i != skip]
        cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cross) < 1e-8 * scale * scale:
            return True
    return False


def homography_from_quad(src, dst) -> Homography:
    """Exact homography mapping 4 source points to 4 destination points.

    Solves the 8x8 linear system directly (h33 fixed at 1). Raises
    DegenerateQuadError when 3 points of either quad are collinear or the
    system pivots vanish.
    """
    src = np.asarray(src, dtype=np.float64).reshape(4, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(4, 2)
    if _collinear_triple_exists(src) or _collinear_triple_exists(dst):
        raise DegenerateQuadError("three of the four quad points are collinear")

    a = np.zeros((8, 8), dtype=np.float64)
    rhs = np.zeros(8, dtype=np.float64)
    for i in range(4):
        x, y = src[i]
        u, v = dst[i]
        a[2 * i] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]
        a[2 * i + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]
        rhs[2 * i] = u
        rhs[2 * i + 1] = v

    h = _solve_partial_pivot(a, rhs)
    m = np.array(
        [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]], dtype=np.float64
    )
    return Homography(m)


def _solve_partial_pivot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Gaussian elimination with partial pivoting; tiny pivot -> degenerate."""
    a = a.copy()
    b = b.copy()
    n = a.shape[0]
    tol = 1e-10 * max(1.0, float(np.max(np.abs(a))))
    for col in range(n):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if abs(a[piv, col]) < tol:
            raise DegenerateQuadError("singular quad system (pivot below tolerance)")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        factors = a[col + 1 :, col] / a[col, col]
        a[col + 1 :, col:] -= factors[:, None] * a[col, col:]
        b[col + 1 :] -= factors * b[col]
    x = np.zeros(n)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1 :] @ x[row + 1 :]) / a[row, row]
    return x


def _hartley_normalization(pts: np.ndarray) -> np.ndarray:
    """Similarity transform taking pts to centroid 0, RMS distance sqrt(2)."""
    centroid = pts.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum((pts - centroid) ** 2, axis=1)))
    if rms < 1e-12:
        raise DegenerateConfigurationError("all points coincide")
    s = np.sqrt(2.0) / rms
    return np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )


def estimate_homography_dlt(src_pts, dst_pts) -> Homography:
    """Hartley-normalized DLT homography from >= 4 point correspondences.

    Least-squares solution via the smallest singular vector of the stacked
    2n x 9 system; exact for 4 correspondences.
    """
    src = np.asarray(src_pts, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(dst_pts, dtype=np.float64).reshape(-1, 2)
    n = src.shape[0]
    if n < 4 or dst.shape[0] != n:
        raise DegenerateConfigurationError(f"need >= 4 matched pairs, got {n}")

    t_src = _hartley_normalization(src)
    t_dst = _hartley_normalization(dst)
    sh = src @ t_src[:2, :2].T + t_src[:2, 2]
    dh = dst @ t_dst[:2, :2].T + t_dst[:2, 2]

    a = np.zeros((2 * n, 9), dtype=np.float64)
    a[0::2, 0] = -sh[:, 0]
    a[0::2, 1] = -sh[:, 1]
    a[0::2, 2] = -1.0
    a[0::2, 6] = dh[:, 0] * sh[:, 0]
    a[0::2, 7] = dh[:, 0] * sh[:, 1]
    a[0::2, 8] = dh[:, 0]
    a[1::2, 3] = -sh[:, 0]
    a[1::2, 4] = -sh[:, 1]
    a[1::2, 5] = -1.0
    a[1::2, 6] = dh[:, 1] * sh[:, 0]
    a[1::2, 7] = dh[:, 1] * sh[:, 1]
    a[1::2, 8] = dh[:, 1]

    _, sing, vt = np.linalg.svd(a)
    # rank must be exactly 8 for a 1-D solution family
    if sing[7] < 1e-10 * sing[0]:
        raise DegenerateConfigurationError("correspondences do not fix a homography")
    hn = vt[-1].reshape(3, 3)
    m = np.linalg.inv(t_dst) @ hn @ t_src
    if abs(m[2, 2]) < _DET_MIN:
        raise DegenerateConfigurationError("estimated homography has h33 ~ 0")
    return Homography(m)


def apply_homography(h: Homography, point) -> tuple[float, float]:
    """Map a single (x, y) point; raises PointAtInfinityError when w ~ 0."""
    x, y = float(point[0]), float(point[1])
    m = h.m
    w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
    if abs(w) <= _DET_MIN:
        raise PointAtInfinityError(f"point ({x}, {y}) maps to infinity")
    u = (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / w
    v = (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / w
    return (u, v)


def invert(h: Homography) -> Homography:
    """Inverse map, renormalized to bottom-right = 1."""
    det = np.linalg.det(h.m)
    if abs(det) < _DET_MIN:
        raise SingularMatrixError("homography is singular")
    inv = np.linalg.inv(h.m)
    if abs(inv[2, 2]) < _DET_MIN:
        raise SingularMatrixError("inverse cannot be normalized (h33 ~ 0)")
    return Homography(inv)


def project_grid(h: Homography, xs: np.ndarray, ys: np.ndarray):
    """Vectorized point mapping; w ~ 0 yields out-of-range (-1, -1)."""
    m = h.m
    w = m[2, 0] * xs + m[2, 1] * ys + m[2, 2]
    bad = np.abs(w) <= _DET_MIN
    w_safe = np.where(bad, 1.0, w)
    u = (m[0, 0] * xs + m[0, 1] * ys + m[0, 2]) / w_safe
    v = (m[1, 0] * xs + m[1, 1] * ys + m[1, 2]) / w_safe
    u[bad] = -1.0
    v[bad] = -1.0
    return u, v


def build_warp_remap(h: Homography, in_size, out_size) -> PrecomputedRemap:
    """Precompute the inverse-mapping remap for warp by ``h``.

    ``in_size`` and ``out_size`` are (width, height). Each output pixel is
    sampled at H^-1 (x, y); out-of-bounds samples are black.
    """
    h_inv = invert(h)
    out_w, out_h = out_size
    xs, ys = np.meshgrid(
        np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64)
    )
    sx, sy = project_grid(h_inv, xs, ys)
    return PrecomputedRemap(sx, sy, in_size[0], in_size[1])


def warp_image(img: ImageBuffer, h: Homography, out_size) -> ImageBuffer:
    """Warp an image by ``h`` into an ``out_size`` = (width, height) canvas."""
    remap = build_warp_remap(h, (img.width, img.height), out_size)
    return ImageBuffer(remap.apply_u8(img.data))
