"""Camera calibration from planar chessboard views, and distortion removal.

Closed-form linear stage (per-view homographies, intrinsic constraints from
the B-matrix, extrinsics from K^-1 H, distortion by linear least squares)
followed by an optional Levenberg-Marquardt refinement over every parameter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    BehindCameraError,
    DegenerateConfigurationError,
    DegenerateViewsError,
    FileError,
    InsufficientViewsError,
    NonConvergenceError,
    NumericalFailureError,
    ParseError,
)
from .homography import estimate_homography_dlt
from .image import ImageBuffer, PrecomputedRemap


@dataclass(frozen=True)
class CameraModel:
    """Pinhole intrinsics plus 5-coefficient radial/tangential distortion."""

    fx: float
    fy: float
    cx: float
    cy: float
    skew: float = 0.0
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    p1: float = 0.0
    p2: float = 0.0
    image_width: int = 0
    image_height: int = 0

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    @property
    def k_matrix(self) -> np.ndarray:
        return np.array(
            [[self.fx, self.skew, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    @property
    def dist_coeffs(self) -> np.ndarray:
        return np.array([self.k1, self.k2, self.k3, self.p1, self.p2])


@dataclass(frozen=True)
class ChessboardObservation:
    """One view of the board: (X, Y) meters on the plane vs (u, v) pixels."""

    object_points: np.ndarray
    image_points: np.ndarray

    def __post_init__(self):
        obj = np.asarray(self.object_points, dtype=np.float64).reshape(-1, 2)
        img = np.asarray(self.image_points, dtype=np.float64).reshape(-1, 2)
        if obj.shape[0] < 4:
            raise ValueError("a view needs at least 4 points")
        if obj.shape != img.shape:
            raise ValueError("object and image point counts differ")
        object.__setattr__(self, "object_points", obj)
        object.__setattr__(self, "image_points", img)


@dataclass(frozen=True)
class ViewExtrinsics:
    """Rigid pose of the board plane in the camera frame."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)


@dataclass(frozen=True)
class CalibrationResult:
    model: CameraModel
    extrinsics: list[ViewExtrinsics] = field(default_factory=list)
    rms_reprojection_error: float = 0.0


# --- forward model ---


def distort_normalized(x: np.ndarray, y: np.ndarray, model: CameraModel):
    """Apply the radial + tangential polynomial to normalized coordinates."""
    r2 = x * x + y * y
    radial = 1.0 + r2 * (model.k1 + r2 * (model.k2 + r2 * model.k3))
    xd = x * radial + 2.0 * model.p1 * x * y + model.p2 * (r2 + 2.0 * x * x)
    yd = y * radial + model.p1 * (r2 + 2.0 * y * y) + 2.0 * model.p2 * x * y
    return xd, yd


def _normalized_to_pixel(xd, yd, model: CameraModel):
    u = model.fx * xd + model.skew * yd + model.cx
    v = model.fy * yd + model.cy
    return u, v


def _pixel_to_normalized(u, v, model: CameraModel):
    y = (v - model.cy) / model.fy
    x = (u - model.cx - model.skew * y) / model.fx
    return x, y


def project_points(model: CameraModel, ext: ViewExtrinsics, object_points) -> np.ndarray:
    """Project board-plane points (X, Y, Z=0) to pixels, vectorized."""
    obj = np.asarray(object_points, dtype=np.float64).reshape(-1, 2)
    pts3 = np.column_stack([obj, np.zeros(len(obj))])
    cam = pts3 @ ext.rotation.T + ext.translation
    if np.any(cam[:, 2] <= 0):
        raise BehindCameraError("object point has non-positive camera depth")
    x = cam[:, 0] / cam[:, 2]
    y = cam[:, 1] / cam[:, 2]
    xd, yd = distort_normalized(x, y, model)
    u, v = _normalized_to_pixel(xd, yd, model)
    return np.column_stack([u, v])


def project_point(model: CameraModel, ext: ViewExtrinsics, object_point) -> tuple[float, float]:
    """Single-point version of :func:`project_points`."""
    uv = project_points(model, ext, [object_point])
    return (float(uv[0, 0]), float(uv[0, 1]))


# --- distortion inversion ---

_UNDISTORT_TOL = 1e-8
_UNDISTORT_MAX_ITER = 20


def undistort_points(model: CameraModel, points) -> np.ndarray:
    """Remove lens distortion from pixel points; returns ideal pinhole pixels.

    Fixed-point iteration on normalized coordinates seeded with the distorted
    values; raises NonConvergenceError when the distortion is too extreme for
    the polynomial model to invert.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    xd, yd = _pixel_to_normalized(pts[:, 0], pts[:, 1], model)
    x, y = xd.copy(), yd.copy()
    k1, k2, k3 = model.k1, model.k2, model.k3
    p1, p2 = model.p1, model.p2
    converged = False
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(_UNDISTORT_MAX_ITER):
            r2 = x * x + y * y
            radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3))
            tx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x)
            ty = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y
            x_new = (xd - tx) / radial
            y_new = (yd - ty) / radial
            step = np.hypot(x_new - x, y_new - y)
            x, y = x_new, y_new
            if not np.all(np.isfinite(step)):
                break
            if np.max(step) < _UNDISTORT_TOL:
                converged = True
                break
    if not converged or not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonConvergenceError("distortion inversion did not converge")
    u, v = _normalized_to_pixel(x, y, model)
    return np.column_stack([u, v])


def build_undistort_remap(model: CameraModel, width: int, height: int) -> PrecomputedRemap:
    """Per-output-pixel source map through the forward distortion model."""
    xs, ys = np.meshgrid(np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64))
    x, y = _pixel_to_normalized(xs, ys, model)
    xd, yd = distort_normalized(x, y, model)
    su, sv = _normalized_to_pixel(xd, yd, model)
    return PrecomputedRemap(su, sv, width, height)


def undistort_image(model: CameraModel, img: ImageBuffer) -> ImageBuffer:
    """Resample the frame so straight scene lines become straight."""
    remap = build_undistort_remap(model, img.width, img.height)
    return ImageBuffer(remap.apply_u8(img.data))


# --- Zhang linear stage ---


def _vij(h: np.ndarray, i: int, j: int) -> np.ndarray:
    hi, hj = h[:, i], h[:, j]
    return np.array(
        [
            hi[0] * hj[0],
            hi[0] * hj[1] + hi[1] * hj[0],
            hi[1] * hj[1],
            hi[2] * hj[0] + hi[0] * hj[2],
            hi[2] * hj[1] + hi[1] * hj[2],
            hi[2] * hj[2],
        ]
    )


def _intrinsics_from_b(b: np.ndarray) -> tuple[float, float, float, float, float]:
    if b[0] < 0:
        b = -b
    b11, b12, b22, b13, b23, b33 = b
    denom = b11 * b22 - b12 * b12
    if denom <= 0 or b11 <= 0:
        raise NumericalFailureError("intrinsic constraint matrix not positive definite")
    v0 = (b12 * b13 - b11 * b23) / denom
    lam = b33 - (b13 * b13 + v0 * (b12 * b13 - b11 * b23)) / b11
    if lam <= 0:
        raise NumericalFailureError("negative scale recovering intrinsics")
    alpha = math.sqrt(lam / b11)
    beta = math.sqrt(lam * b11 / denom)
    gamma = -b12 * alpha * alpha * beta / lam
    u0 = gamma * v0 / beta - b13 * alpha * alpha / lam
    return alpha, beta, gamma, u0, v0


def _nearest_rotation(q: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(q)
    r = u @ vt
    if np.linalg.det(r) < 0:
        r = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return r


def _extrinsics_from_homography(k: np.ndarray, h: np.ndarray) -> ViewExtrinsics:
    k_inv = np.linalg.inv(k)
    a1 = k_inv @ h[:, 0]
    a2 = k_inv @ h[:, 1]
    a3 = k_inv @ h[:, 2]
    norm = np.linalg.norm(a1)
    if norm < 1e-12:
        raise NumericalFailureError("degenerate homography column")
    lam = 1.0 / norm
    r1, r2, t = lam * a1, lam * a2, lam * a3
    if t[2] < 0:  # board must sit in front of the camera
        r1, r2, t = -r1, -r2, -t
    r3 = np.cross(r1, r2)
    rot = _nearest_rotation(np.column_stack([r1, r2, r3]))
    return ViewExtrinsics(rot, t)


def _estimate_distortion_linear(
    model: CameraModel, extrinsics: list[ViewExtrinsics], views: list[ChessboardObservation]
) -> np.ndarray:
    rows = []
    rhs = []
    for ext, view in zip(extrinsics, views):
        pts3 = np.column_stack([view.object_points, np.zeros(len(view.object_points))])
        cam = pts3 @ ext.rotation.T + ext.translation
        x = cam[:, 0] / cam[:, 2]
        y = cam[:, 1] / cam[:, 2]
        xd, yd = _pixel_to_normalized(view.image_points[:, 0], view.image_points[:, 1], model)
        r2 = x * x + y * y
        rows.append(np.column_stack([x * r2, x * r2 * r2, x * r2 ** 3, 2 * x * y, r2 + 2 * x * x]))
        rhs.append(xd - x)
        rows.append(np.column_stack([y * r2, y * r2 * r2, y * r2 ** 3, r2 + 2 * y * y, 2 * x * y]))
        rhs.append(yd - y)
    a = np.vstack(rows)
    b = np.concatenate(rhs)
    coeffs, *_ = np.linalg.lstsq(a, b, rcond=None)
    return coeffs


def _rms_error(model: CameraModel, extrinsics, views) -> float:
    sq = 0.0
    n = 0
    for ext, view in zip(extrinsics, views):
        proj = project_points(model, ext, view.object_points)
        d = proj - view.image_points
        sq += float(np.sum(d * d))
        n += len(view.object_points)
    return math.sqrt(sq / n)


def calibrate_zhang(views: list[ChessboardObservation], image_size) -> CalibrationResult:
    """Closed-form calibration from >= 3 board views (no nonlinear refinement).

    Returns intrinsics, per-view extrinsics, and a linear estimate of the
    distortion coefficients, plus the rms reprojection error of that estimate.
    """
    if len(views) < 3:
        raise InsufficientViewsError(f"need at least 3 views, got {len(views)}")
    grid = views[0].object_points
    for v in views[1:]:
        if v.object_points.shape != grid.shape or not np.allclose(v.object_points, grid):
            raise ValueError("all views must share the identical object-point grid")

    try:
        homs = [
            estimate_homography_dlt(v.object_points, v.image_points).m for v in views
        ]
    except DegenerateConfigurationError as exc:
        raise DegenerateViewsError(str(exc)) from exc

    vmat = np.zeros((2 * len(homs), 6))
    for i, h in enumerate(homs):
        vmat[2 * i] = _vij(h, 0, 1)
        vmat[2 * i + 1] = _vij(h, 0, 0) - _vij(h, 1, 1)
    _, sing, vt = np.linalg.svd(vmat)
    if sing[4] / sing[0] < 1e-8:
        raise DegenerateViewsError(
            "board poses leave the intrinsic constraints rank-deficient "
            "(all boards parallel?)"
        )
    alpha, beta, gamma, u0, v0 = _intrinsics_from_b(vt[-1])
    if abs(gamma) / alpha < 1e-4:  # real cameras have negligible skew
        gamma = 0.0

    width, height = int(image_size[0]), int(image_size[1])
    if not (0 <= u0 <= width and 0 <= v0 <= height):
        raise NumericalFailureError(
            f"recovered principal point ({u0:.1f}, {v0:.1f}) outside the image"
        )
    model = CameraModel(
        fx=alpha, fy=beta, cx=u0, cy=v0, skew=gamma,
        image_width=width, image_height=height,
    )
    k = model.k_matrix
    extrinsics = [_extrinsics_from_homography(k, h) for h in homs]
    k1, k2, k3, p1, p2 = _estimate_distortion_linear(model, extrinsics, views)
    model = replace(model, k1=float(k1), k2=float(k2), k3=float(k3), p1=float(p1), p2=float(p2))
    rms = _rms_error(model, extrinsics, views)
    if not math.isfinite(rms):
        raise NumericalFailureError("non-finite reprojection error")
    return CalibrationResult(model=model, extrinsics=extrinsics, rms_reprojection_error=rms)


# --- axis-angle helpers for the refinement parameterization ---


def rotation_to_rvec(r: np.ndarray) -> np.ndarray:
    cos_t = (np.trace(r) - 1.0) / 2.0
    cos_t = min(1.0, max(-1.0, cos_t))
    theta = math.acos(cos_t)
    if theta < 1e-12:
        return np.zeros(3)
    if math.pi - theta < 1e-6:
        # axis from the dominant diagonal of (R + I)/2
        m = (r + np.eye(3)) / 2.0
        i = int(np.argmax(np.diag(m)))
        axis = np.array([m[0, i], m[1, i], m[2, i]])
        axis = axis / math.sqrt(max(m[i, i], 1e-18))
        axis = axis / np.linalg.norm(axis)
        return theta * axis
    axis = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    return theta / (2.0 * math.sin(theta)) * axis


def rvec_to_rotation(rvec: np.ndarray) -> np.ndarray:
    theta = float(np.linalg.norm(rvec))
    k = np.array(
        [
            [0.0, -rvec[2], rvec[1]],
            [rvec[2], 0.0, -rvec[0]],
            [-rvec[1], rvec[0], 0.0],
        ]
    )
    if theta < 1e-12:
        return np.eye(3) + k + 0.5 * (k @ k)
    k = k / theta
    return np.eye(3) + math.sin(theta) * k + (1.0 - math.cos(theta)) * (k @ k)


# --- Levenberg-Marquardt refinement ---

_LM_LAMBDA0 = 1e-3
_LM_MAX_ITER = 50
_LM_REL_TOL = 1e-10


def _pack_params(model: CameraModel, extrinsics) -> np.ndarray:
    head = [
        model.fx, model.fy, model.cx, model.cy, model.skew,
        model.k1, model.k2, model.k3, model.p1, model.p2,
    ]
    tail = []
    for ext in extrinsics:
        tail.extend(rotation_to_rvec(ext.rotation))
        tail.extend(ext.translation)
    return np.array(head + tail, dtype=np.float64)


def _unpack_params(theta: np.ndarray, n_views: int, template: CameraModel):
    model = replace(
        template,
        fx=float(theta[0]), fy=float(theta[1]), cx=float(theta[2]), cy=float(theta[3]),
        skew=float(theta[4]), k1=float(theta[5]), k2=float(theta[6]), k3=float(theta[7]),
        p1=float(theta[8]), p2=float(theta[9]),
    )
    extrinsics = []
    for i in range(n_views):
        base = 10 + 6 * i
        rot = rvec_to_rotation(theta[base : base + 3])
        extrinsics.append(ViewExtrinsics(rot, theta[base + 3 : base + 6]))
    return model, extrinsics


def _residuals(theta: np.ndarray, views, template: CameraModel) -> np.ndarray:
    model, extrinsics = _unpack_params(theta, len(views), template)
    res = []
    for ext, view in zip(extrinsics, views):
        proj = project_points(model, ext, view.object_points)
        res.append((proj - view.image_points).ravel())
    return np.concatenate(res)


def refine_reprojection(
    result: CalibrationResult, views: list[ChessboardObservation]
) -> CalibrationResult:
    """Levenberg-Marquardt polish of every parameter; never increases rms.

    Damping starts at 1e-3, x10 on a rejected step, /10 on an accepted step;
    stops after 50 iterations or when the relative cost decrease drops below
    1e-10. Rotations move on a 3-vector axis-angle chart. Skew stays frozen
    at 0 when the linear stage regularized it away.
    """
    fix_skew = result.model.skew == 0.0
    theta = _pack_params(result.model, result.extrinsics)
    n_views = len(views)

    def cost_of(res):
        return float(res @ res)

    res = _residuals(theta, views, result.model)
    cost = cost_of(res)
    lam = _LM_LAMBDA0
    free = [i for i in range(len(theta)) if not (fix_skew and i == 4)]
    free_idx = np.array(free)

    for _ in range(_LM_MAX_ITER):
        jac = np.zeros((len(res), len(free_idx)))
        for col, pi in enumerate(free_idx):
            step = 1e-6 * max(1.0, abs(theta[pi]))
            tp = theta.copy()
            tp[pi] += step
            tm = theta.copy()
            tm[pi] -= step
            jac[:, col] = (_residuals(tp, views, result.model) - _residuals(tm, views, result.model)) / (2 * step)
        jtj = jac.T @ jac
        g = jac.T @ res
        diag = np.maximum(np.diag(jtj), 1e-12)

        accepted = False
        while lam < 1e12:
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError as exc:
                raise NumericalFailureError("refinement normal equations unsolvable") from exc
            trial = theta.copy()
            trial[free_idx] += delta
            try:
                trial_res = _residuals(trial, views, result.model)
            except BehindCameraError:
                lam *= 10.0
                continue
            trial_cost = cost_of(trial_res)
            if np.isfinite(trial_cost) and trial_cost < cost:
                rel_decrease = (cost - trial_cost) / max(cost, 1e-300)
                theta, res, cost = trial, trial_res, trial_cost
                lam = max(lam / 10.0, 1e-15)
                accepted = True
                if rel_decrease < _LM_REL_TOL:
                    lam = None  # signal outer stop
                break
            lam *= 10.0
        if not accepted or lam is None:
            break

    model, extrinsics = _unpack_params(theta, n_views, result.model)
    rms = _rms_error(model, extrinsics, views)
    return CalibrationResult(model=model, extrinsics=extrinsics, rms_reprojection_error=rms)


# --- persistence ---

_REQUIRED_KEYS = ("image_width", "image_height", "fx", "fy", "cx", "cy")
_OPTIONAL_KEYS = ("skew", "k1", "k2", "k3", "p1", "p2")


def save_model(model: CameraModel, path) -> None:
    """Write the calibration file (UTF-8 JSON, normative key names)."""
    payload = {
        "image_width": model.image_width,
        "image_height": model.image_height,
        "fx": model.fx,
        "fy": model.fy,
        "cx": model.cx,
        "cy": model.cy,
        "skew": model.skew,
        "k1": model.k1,
        "k2": model.k2,
        "k3": model.k3,
        "p1": model.p1,
        "p2": model.p2,
    }
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    except OSError as exc:
        raise FileError(f"cannot write calibration file {path}: {exc}") from exc


def load_model(path) -> CameraModel:
    """Read a calibration file; distortion and skew default to 0 if absent."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise FileError(f"cannot read calibration file {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed calibration file {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ParseError(f"calibration file {path} is not an object")
    for key in _REQUIRED_KEYS:
        if key not in payload:
            raise ParseError(f"calibration file {path} is missing field '{key}'")
    values = {}
    for key in _REQUIRED_KEYS + _OPTIONAL_KEYS:
        raw = payload.get(key, 0)
        if not isinstance(raw, (int, float)) or isinstance(raw, bool):
            raise ParseError(f"calibration field '{key}' is not a number")
        values[key] = float(raw)
    return CameraModel(
        fx=values["fx"], fy=values["fy"], cx=values["cx"], cy=values["cy"],
        skew=values["skew"], k1=values["k1"], k2=values["k2"], k3=values["k3"],
        p1=values["p1"], p2=values["p2"],
        image_width=int(values["image_width"]), image_height=int(values["image_height"]),
    )


# --- corners file ---


def parse_corners_text(text: str) -> list[ChessboardObservation]:
    """Parse the corners format: per view a ``view <n> <rows> <cols> <sq>``
    header then rows*cols ``u v`` lines in row-major board order."""
    views: list[ChessboardObservation] = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] != "view" or len(parts) != 5:
            raise ParseError(f"line {i}: expected 'view <n> <rows> <cols> <square_size_m>'")
        try:
            rows, cols = int(parts[2]), int(parts[3])
            square = float(parts[4])
        except ValueError as exc:
            raise ParseError(f"line {i}: bad view header numbers") from exc
        if rows < 1 or cols < 1 or square <= 0:
            raise ParseError(f"line {i}: invalid board geometry")
        n = rows * cols
        img_pts = np.zeros((n, 2))
        for j in range(n):
            while i < len(lines) and not lines[i].strip():
                i += 1
            if i >= len(lines):
                raise ParseError(f"line {i}: view truncated, expected {n} corner lines")
            fields = lines[i].split()
            i += 1
            if len(fields) != 2:
                raise ParseError(f"line {i}: expected 'u v'")
            try:
                img_pts[j] = [float(fields[0]), float(fields[1])]
            except ValueError as exc:
                raise ParseError(f"line {i}: corner is not numeric") from exc
        rr, cc = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
        obj = np.column_stack([cc.ravel() * square, rr.ravel() * square])
        views.append(ChessboardObservation(obj, img_pts))
    return views


def parse_corners_file(path) -> list[ChessboardObservation]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise FileError(f"cannot read corners file {path}: {exc}") from exc
    return parse_corners_text(text)


def write_corners_file(path, views: list[ChessboardObservation], rows: int, cols: int, square: float) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for n, view in enumerate(views):
            f.write(f"view {n} {rows} {cols} {square}\n")
            for u, v in view.image_points:
                f.write(f"{u:.6f} {v:.6f}\n")
