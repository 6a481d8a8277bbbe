"""Lane pixel search in a bird's-eye mask, quadratic fitting, and tracking.

Lanes are near-vertical after the warp, so each boundary is modeled as
x = a*y^2 + b*y + c. The tracker alternates between a full sliding-window
search and a cheaper search around the previous fit, smoothing accepted
coefficients with an exponential moving average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateGeometryError,
    InsufficientPixelsError,
    LaneNotFoundError,
    NoPriorAndNoDetectionError,
)

MODE_SLIDING = "sliding_window"
MODE_AROUND_PRIOR = "around_prior"


@dataclass(frozen=True)
class SlidingWindowConfig:
    n_windows: int = 9
    margin: int = 100
    minpix: int = 50

    def __post_init__(self):
        if self.n_windows < 1 or self.margin < 1 or self.minpix < 1:
            raise ValueError("window parameters must be >= 1")


@dataclass(frozen=True)
class LaneFit:
    a: float
    b: float
    c: float
    n_pixels: int
    residual_rms: float

    def eval(self, y):
        return (self.a * y + self.b) * y + self.c


@dataclass(frozen=True)
class LanePair:
    left: LaneFit
    right: LaneFit
    status: str  # "accepted" | "rejected"
    reason: str | None = None


@dataclass(frozen=True)
class ValidationConfig:
    min_width_px: float = 500.0
    max_width_px: float = 900.0
    parallel_tol: float = 0.4
    max_residual_px: float = 50.0


@dataclass(frozen=True)
class TrackConfig:
    window: SlidingWindowConfig = SlidingWindowConfig()
    search_margin: int = 100
    ema_alpha: float = 0.2
    miss_threshold: int = 5
    validation: ValidationConfig = ValidationConfig()


@dataclass(frozen=True)
class TrackerState:
    last_accepted: LanePair | None = None
    smoothed: LanePair | None = None
    consecutive_misses: int = 0
    mode: str = MODE_SLIDING


def base_histogram(mask: np.ndarray) -> tuple[int, int]:
    """Find starting columns from column sums over the bottom half.

    Ties break toward the lowest column index (argmax convention), so a flat
    plateau reports its leftmost column.
    """
    h, w = mask.shape
    sums = mask[h // 2 :, :].sum(axis=0)
    mid = w // 2
    left_half, right_half = sums[:mid], sums[mid:]
    if left_half.max(initial=0) == 0:
        raise LaneNotFoundError("left")
    if right_half.max(initial=0) == 0:
        raise LaneNotFoundError("right")
    return int(np.argmax(left_half)), int(mid + np.argmax(right_half))


def sliding_window_search(mask: np.ndarray, cfg: SlidingWindowConfig):
    """Stacked-window pixel collection per side, bottom to top.

    Windows span +/-margin (inclusive) around the running center; a window
    holding >= minpix pixels recenters the next one on their mean x. The top
    window absorbs any leftover rows so coverage spans the full height.
    Returns ((N,2) x,y int arrays per side, window trace). A pixel falling in
    both sides' windows goes to the left set so the sides stay disjoint.
    """
    h, w = mask.shape
    left_base, right_base = base_histogram(mask)
    ys, xs = np.nonzero(mask)
    win_h = max(h // cfg.n_windows, 1)
    lc, rc = left_base, right_base
    left_sel = np.zeros(len(xs), dtype=bool)
    right_sel = np.zeros(len(xs), dtype=bool)
    trace = []
    for i in range(cfg.n_windows):
        y_hi = h - i * win_h
        y_lo = 0 if i == cfg.n_windows - 1 else y_hi - win_h
        if y_hi <= 0:
            break
        in_rows = (ys >= y_lo) & (ys < y_hi)
        lsel = in_rows & (np.abs(xs - lc) <= cfg.margin)
        rsel = in_rows & (np.abs(xs - rc) <= cfg.margin) & ~lsel
        trace.append(("left", lc - cfg.margin, y_lo, lc + cfg.margin, y_hi - 1))
        trace.append(("right", rc - cfg.margin, y_lo, rc + cfg.margin, y_hi - 1))
        left_sel |= lsel
        right_sel |= rsel
        if int(lsel.sum()) >= cfg.minpix:
            lc = int(math.floor(float(xs[lsel].mean()) + 0.5))
        if int(rsel.sum()) >= cfg.minpix:
            rc = int(math.floor(float(xs[rsel].mean()) + 0.5))
    left_pixels = np.column_stack([xs[left_sel], ys[left_sel]])
    right_pixels = np.column_stack([xs[right_sel], ys[right_sel]])
    return left_pixels, right_pixels, trace


def fit_polynomial(pixels) -> LaneFit:
    """Least-squares x(y) quadratic via normal equations on centered/scaled y.

    y is shifted by its mean and divided by half its range before forming the
    normal equations; raw image rows cubed would cost ~9 digits of precision.
    """
    pts = np.asarray(pixels, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    if n < 3:
        raise InsufficientPixelsError(f"need >= 3 pixels to fit, got {n}")
    x, y = pts[:, 0], pts[:, 1]
    y_min, y_max = float(y.min()), float(y.max())
    if y_max == y_min:
        raise DegenerateGeometryError("all pixels share one row")
    y_bar = float(y.mean())
    s = (y_max - y_min) / 2.0
    t = (y - y_bar) / s
    t2 = t * t
    s1, s2 = float(t.sum()), float(t2.sum())
    s3, s4 = float((t2 * t).sum()), float((t2 * t2).sum())
    a_mat = np.array([[s4, s3, s2], [s3, s2, s1], [s2, s1, float(n)]])
    rhs = np.array([float((t2 * x).sum()), float((t * x).sum()), float(x.sum())])
    if np.linalg.cond(a_mat) > 1e12:
        raise DegenerateGeometryError("pixel rows span fewer than 3 distinct values")
    alpha, beta, gamma = np.linalg.solve(a_mat, rhs)
    a = alpha / (s * s)
    b = beta / s - 2.0 * alpha * y_bar / (s * s)
    c = gamma - beta * y_bar / s + alpha * (y_bar / s) ** 2
    resid = x - (alpha * t2 + beta * t + gamma)
    rms = math.sqrt(float(resid @ resid) / n)
    return LaneFit(a=float(a), b=float(b), c=float(c), n_pixels=n, residual_rms=rms)


def search_around_fit(mask: np.ndarray, prior: LanePair, margin: int):
    """Collect pixels within +/-margin of each prior curve (rounded per row)."""
    ys, xs = np.nonzero(mask)
    out = []
    for fit in (prior.left, prior.right):
        center = np.floor(fit.eval(ys.astype(np.float64)) + 0.5)
        sel = np.abs(xs - center) <= margin
        out.append(np.column_stack([xs[sel], ys[sel]]))
    return out[0], out[1]


def validate_pair(
    left: LaneFit, right: LaneFit, img_width: int, img_height: int, cfg: ValidationConfig
) -> LanePair:
    """Sanity-gate a candidate pair; rejection keeps the first failed reason.

    Checks, in order: bottom-row lane width inside [min, max]; top vs bottom
    width within the near-parallelism tolerance; both residuals under the cap.
    """
    y_bottom = img_height - 1
    w_bottom = right.eval(y_bottom) - left.eval(y_bottom)
    if not (cfg.min_width_px <= w_bottom <= cfg.max_width_px):
        return LanePair(left, right, "rejected", "width")
    w_top = right.eval(0) - left.eval(0)
    if abs(w_top - w_bottom) / w_bottom >= cfg.parallel_tol:
        return LanePair(left, right, "rejected", "parallel")
    if left.residual_rms >= cfg.max_residual_px or right.residual_rms >= cfg.max_residual_px:
        return LanePair(left, right, "rejected", "residual")
    return LanePair(left, right, "accepted")


def _ema_fit(prev: LaneFit, cur: LaneFit, alpha: float) -> LaneFit:
    return LaneFit(
        a=alpha * cur.a + (1 - alpha) * prev.a,
        b=alpha * cur.b + (1 - alpha) * prev.b,
        c=alpha * cur.c + (1 - alpha) * prev.c,
        n_pixels=cur.n_pixels,
        residual_rms=cur.residual_rms,
    )


def track_frame(state: TrackerState, mask: np.ndarray, cfg: TrackConfig):
    """Advance the tracker one frame; returns (new state, output pair, mode).

    With an accepted prior and fewer than miss_threshold consecutive misses
    the search runs around the smoothed fit, otherwise from scratch with
    sliding windows. Accepted fits update the EMA; a miss re-emits the last
    smoothed pair flagged rejected so rendering degrades gracefully.
    """
    h, w = mask.shape
    use_prior = state.last_accepted is not None and state.consecutive_misses < cfg.miss_threshold
    mode = MODE_AROUND_PRIOR if use_prior else MODE_SLIDING

    pair = None
    fail_reason = None
    try:
        if use_prior:
            left_px, right_px = search_around_fit(mask, state.smoothed, cfg.search_margin)
        else:
            left_px, right_px, _ = sliding_window_search(mask, cfg.window)
        left = fit_polynomial(left_px)
        right = fit_polynomial(right_px)
        pair = validate_pair(left, right, w, h, cfg.validation)
    except LaneNotFoundError as exc:
        fail_reason = f"lane_not_found_{exc.side}"
    except InsufficientPixelsError:
        fail_reason = "insufficient_pixels"
    except DegenerateGeometryError:
        fail_reason = "degenerate_pixels"

    if pair is not None and pair.status == "accepted":
        if state.smoothed is None:
            smoothed = pair
        else:
            smoothed = LanePair(
                left=_ema_fit(state.smoothed.left, pair.left, cfg.ema_alpha),
                right=_ema_fit(state.smoothed.right, pair.right, cfg.ema_alpha),
                status="accepted",
            )
        new_state = TrackerState(
            last_accepted=pair, smoothed=smoothed, consecutive_misses=0, mode=mode
        )
        return new_state, smoothed, mode

    if state.smoothed is None:
        raise NoPriorAndNoDetectionError(
            f"no prior fit and the first frame yielded nothing ({fail_reason or (pair and pair.reason)})"
        )
    reason = fail_reason if fail_reason is not None else pair.reason
    out = replace(state.smoothed, status="rejected", reason=reason)
    new_state = TrackerState(
        last_accepted=state.last_accepted,
        smoothed=state.smoothed,
        consecutive_misses=state.consecutive_misses + 1,
        mode=mode,
    )
    return new_state, out, mode
