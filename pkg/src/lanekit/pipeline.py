"""Frame-sequence orchestration: undistort, warp, segment, track, render.

One Pipeline instance owns the per-sequence caches (undistortion and warp
gather maps) and the tracker state. A pipelined mode overlaps the stateless
front half of frame n+1 with the stateful back half of frame n; outputs are
bit-identical to the serial path because tracking stays sequential.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .calibration import build_undistort_remap, load_model
from .config import PipelineConfig, birdseye_pair
from .detect import (
    TrackerState,
    sliding_window_search,
    track_frame,
)
from .errors import EmptyInputError, LaneKitError, NoPriorAndNoDetectionError
from .frameio import list_frame_files, read_image, read_mask, write_mask_png, write_png
from .homography import build_warp_remap
from .image import ImageBuffer, PrecomputedRemap
from .metrics import compute_frame_metrics
from .overlay import annotate_metrics, draw_window_trace, render_lane_region
from .segmentation import segment_frame

CSV_COLUMNS = (
    "frame", "name", "status", "mode",
    "left_a", "left_b", "left_c", "right_a", "right_b", "right_c",
    "radius_m", "offset_m", "frame_time_ms",
)

_DETECTION_FAILURES = (
    "lane_not_found_left", "lane_not_found_right",
    "insufficient_pixels", "degenerate_pixels",
)


def thread_budget() -> int:
    """Worker count from LANEKIT_THREADS (0 or unset = auto)."""
    raw = os.environ.get("LANEKIT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(os.cpu_count() or 2, 2)
    return n


@dataclass
class FrameRecord:
    index: int
    name: str
    status: str  # accepted | rejected | miss | error
    mode: str
    pair: object = None
    metrics: object = None
    frame_time_ms: float = 0.0
    annotated: ImageBuffer | None = None
    debug_mask: np.ndarray | None = None
    debug_birdseye: ImageBuffer | None = None

    def csv_row(self) -> str:
        def num(v, fmt=".9g"):
            return format(v, fmt) if v is not None else ""

        fields = [str(self.index), self.name, self.status, self.mode]
        if self.pair is not None:
            for fit in (self.pair.left, self.pair.right):
                fields += [num(fit.a), num(fit.b), num(fit.c)]
        else:
            fields += [""] * 6
        if self.metrics is not None:
            r = self.metrics.mean_radius_m
            fields.append("straight" if r is None else format(r, ".3f"))
            fields.append(format(self.metrics.offset_m, ".4f"))
        else:
            fields += ["", ""]
        fields.append(format(self.frame_time_ms, ".3f"))
        return ",".join(fields)


class Pipeline:
    def __init__(self, cfg: PipelineConfig, width: int, height: int):
        self.cfg = cfg
        self.width = width
        self.height = height
        self.state = TrackerState()
        self.last_metrics = None
        self._frame_index = 0

        self.model = None
        self.undist_remap = None
        self.warp_remap = None
        self.inv_remap = None
        self.h_bird = None
        self.h_inv = None
        if not cfg.mask_input:
            if cfg.calibration_file:
                self.model = load_model(cfg.calibration_file)
                if any(self.model.dist_coeffs) or self.model.skew:
                    self.undist_remap = build_undistort_remap(self.model, width, height)
            self.h_bird, self.h_inv = birdseye_pair(cfg, width, height)
            size = (width, height)
            self.warp_remap = build_warp_remap(self.h_bird, size, size)
            self.inv_remap = build_warp_remap(self.h_inv, size, size)

    # stateless front half: everything before tracking
    def prepare(self, img: ImageBuffer | np.ndarray):
        t0 = time.perf_counter()
        if self.cfg.mask_input:
            mask = img if isinstance(img, np.ndarray) else img.data.max(axis=2) > 127
            gray = np.where(mask, np.uint8(230), np.uint8(25))
            display = ImageBuffer(np.repeat(gray[:, :, None], 3, axis=2))
            birdseye = None
        else:
            display = ImageBuffer(self.undist_remap.apply_u8(img.data)) if self.undist_remap else img
            birdseye = ImageBuffer(self.warp_remap.apply_u8(display.data))
            mask = segment_frame(birdseye, self.cfg.threshold)
        return display, birdseye, mask, time.perf_counter() - t0

    # stateful back half: tracking, metrics, rendering
    def analyze(self, prepared, name: str, debug: bool = False) -> FrameRecord:
        display, birdseye, mask, t_front = prepared
        t0 = time.perf_counter()
        rec = FrameRecord(index=self._frame_index, name=name, status="miss", mode=self.state.mode)
        self._frame_index += 1
        try:
            self.state, pair, mode = track_frame(self.state, mask, self.cfg.track)
        except NoPriorAndNoDetectionError:
            pair, mode = None, self.state.mode
        rec.mode = mode

        annotated = display
        if pair is not None:
            rec.pair = pair
            if pair.status == "accepted":
                rec.status = "accepted"
                rec.metrics = compute_frame_metrics(
                    pair, self.width, self.height, self.cfg.scale
                )
                self.last_metrics = rec.metrics
            else:
                rec.status = "miss" if pair.reason in _DETECTION_FAILURES else "rejected"
            if self.cfg.mask_input:
                annotated = render_lane_region(
                    display, pair, None, self.cfg.style,
                    birdseye_size=(self.width, self.height),
                    remap=_identity_remap(self.width, self.height),
                )
            else:
                annotated = render_lane_region(
                    display, pair, self.h_inv, self.cfg.style,
                    birdseye_size=(self.width, self.height),
                    remap=self.inv_remap,
                )
        shown = rec.metrics if rec.metrics is not None else self.last_metrics
        if shown is not None:
            annotated = annotate_metrics(annotated, shown, self.cfg.style)
        rec.annotated = annotated
        rec.frame_time_ms = (t_front + (time.perf_counter() - t0)) * 1000.0

        if debug:
            rec.debug_mask = mask
            base = birdseye if birdseye is not None else ImageBuffer(
                np.where(mask, np.uint8(255), np.uint8(0))
            )
            try:
                _, _, trace = sliding_window_search(mask, self.cfg.track.window)
            except LaneKitError:
                trace = []
            rec.debug_birdseye = draw_window_trace(base, trace, self.cfg.style)
        return rec

    def process_frame(self, img, name: str, debug: bool = False) -> FrameRecord:
        return self.analyze(self.prepare(img), name, debug)

    def load(self, path):
        return read_mask(path) if self.cfg.mask_input else read_image(path)


_IDENTITY_REMAPS: dict = {}


def _identity_remap(width: int, height: int) -> PrecomputedRemap:
    key = (width, height)
    if key not in _IDENTITY_REMAPS:
        xs, ys = np.meshgrid(
            np.arange(width, dtype=np.float32), np.arange(height, dtype=np.float32)
        )
        _IDENTITY_REMAPS[key] = PrecomputedRemap(xs, ys, width, height)
    return _IDENTITY_REMAPS[key]


def probe_size(path) -> tuple[int, int]:
    img = read_image(path)
    return img.width, img.height


def iter_records(pipeline: Pipeline, files, debug: bool = False, pipelined: bool = False):
    """Yield one FrameRecord per input, in order.

    A frame whose load or analysis raises yields a status="error" record and
    the sequence continues; tracker state is simply not advanced for it.
    When pipelined, the stateless front half of the next frame runs on a
    worker thread while the current frame is tracked and rendered.
    """
    serial = not pipelined or thread_budget() < 2 or len(files) < 2

    def finish(prepared, name):
        try:
            return pipeline.analyze(prepared, name, debug)
        except LaneKitError:
            return FrameRecord(index=0, name=name, status="error", mode="")

    if serial:
        for path in files:
            name = os.path.basename(path)
            try:
                prepared = pipeline.prepare(pipeline.load(path))
            except LaneKitError:
                yield FrameRecord(index=0, name=name, status="error", mode="")
                continue
            yield finish(prepared, name)
        return

    with ThreadPoolExecutor(max_workers=1) as pool:
        def front(path):
            return pipeline.prepare(pipeline.load(path))

        pending = pool.submit(front, files[0])
        for i, path in enumerate(files):
            name = os.path.basename(path)
            try:
                prepared = pending.result()
            except LaneKitError:
                prepared = None
            if i + 1 < len(files):
                pending = pool.submit(front, files[i + 1])
            if prepared is None:
                yield FrameRecord(index=0, name=name, status="error", mode="")
            else:
                yield finish(prepared, name)


def run_process(input_dir, cfg: PipelineConfig, out_dir, debug: bool = False) -> str:
    """Process a frame directory; writes annotated PNGs and metrics.csv.

    Per-frame failures mark the CSV row and processing continues.
    """
    files = list_frame_files(input_dir)
    if not files:
        raise EmptyInputError(f"no frames found in {input_dir}")
    os.makedirs(out_dir, exist_ok=True)
    debug_dir = os.path.join(out_dir, "debug")
    if debug:
        os.makedirs(debug_dir, exist_ok=True)

    w, h = probe_size(files[0])
    pipeline = Pipeline(cfg, w, h)
    csv_path = os.path.join(out_dir, "metrics.csv")
    with open(csv_path, "w", encoding="utf-8", newline="\n") as csv:
        csv.write(",".join(CSV_COLUMNS) + "\n")
        for index, rec in enumerate(
            iter_records(pipeline, files, debug, cfg.pipelined)
        ):
            rec.index = index
            csv.write(rec.csv_row() + "\n")
            if rec.annotated is not None:
                stem = os.path.splitext(rec.name)[0]
                write_png(rec.annotated, os.path.join(out_dir, stem + ".png"))
                if debug and rec.debug_mask is not None:
                    write_mask_png(rec.debug_mask, os.path.join(debug_dir, stem + "_mask.png"))
                    write_png(rec.debug_birdseye, os.path.join(debug_dir, stem + "_windows.png"))
    return csv_path
