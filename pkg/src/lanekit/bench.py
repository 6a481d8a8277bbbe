"""Throughput measurement over a frame directory.

Frames are decoded up front so disk and PNG costs stay out of the numbers;
what is timed is the per-frame compute path (undistort, warp, segment,
track, render). Each rep uses a fresh pipeline so tracker warm-up costs are
counted every time.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .errors import EmptyInputError
from .frameio import list_frame_files, read_image, read_mask
from .pipeline import Pipeline, probe_size, thread_budget

TARGET_FPS = 24.0
MIN_BENCH_FRAMES = 10


@dataclass(frozen=True)
class BenchReport:
    frames: int
    reps: int
    mean_fps: float
    median_fps: float
    p95_fps: float
    pipelined_fps: float
    below_target: bool

    def to_text(self) -> str:
        lines = [
            f"benchmark: {self.frames} frames x {self.reps} reps",
            f"single fps: mean {self.mean_fps:.2f}, median {self.median_fps:.2f},"
            f" p95 {self.p95_fps:.2f}",
            f"pipelined fps: {self.pipelined_fps:.2f}",
        ]
        if self.below_target:
            lines.append(f"WARN: below {TARGET_FPS:.0f} fps real-time target")
        else:
            lines.append(f"meets {TARGET_FPS:.0f} fps real-time target")
        return "\n".join(lines) + "\n"


def _timed_serial(cfg, width, height, frames, names) -> list[float]:
    pipeline = Pipeline(cfg, width, height)
    times = []
    for frame, name in zip(frames, names):
        rec = pipeline.process_frame(frame, name)
        times.append(rec.frame_time_ms)
    return times


def _timed_pipelined(cfg, width, height, frames, names) -> float:
    """Wall-clock fps with the front half overlapped one frame ahead."""
    pipeline = Pipeline(cfg, width, height)
    if thread_budget() < 2 or len(frames) < 2:
        t0 = time.perf_counter()
        for frame, name in zip(frames, names):
            pipeline.process_frame(frame, name)
        return len(frames) / (time.perf_counter() - t0)
    t0 = time.perf_counter()
    with ThreadPoolExecutor(max_workers=1) as pool:
        pending = pool.submit(pipeline.prepare, frames[0])
        for i, name in enumerate(names):
            prepared = pending.result()
            if i + 1 < len(frames):
                pending = pool.submit(pipeline.prepare, frames[i + 1])
            pipeline.analyze(prepared, name)
    return len(frames) / (time.perf_counter() - t0)


def run_bench(input_dir, cfg: PipelineConfig, reps: int = 3) -> BenchReport:
    files = list_frame_files(input_dir)
    if len(files) < MIN_BENCH_FRAMES:
        raise EmptyInputError(
            f"benchmark needs >= {MIN_BENCH_FRAMES} frames, found {len(files)}"
        )
    if reps < 1:
        raise ValueError("reps must be >= 1")
    width, height = probe_size(files[0])
    names = [os.path.basename(f) for f in files]
    if cfg.mask_input:
        frames = [read_mask(f) for f in files]
    else:
        frames = [read_image(f) for f in files]

    times = []
    for _ in range(reps):
        times.extend(_timed_serial(cfg, width, height, frames, names))
    arr = np.asarray(times, dtype=np.float64)
    mean_fps = 1000.0 / float(arr.mean())
    median_fps = 1000.0 / float(np.median(arr))
    p95_fps = 1000.0 / float(np.percentile(arr, 95))
    pipelined_fps = _timed_pipelined(cfg, width, height, frames, names)
    return BenchReport(
        frames=len(files),
        reps=reps,
        mean_fps=mean_fps,
        median_fps=median_fps,
        p95_fps=p95_fps,
        pipelined_fps=pipelined_fps,
        below_target=max(mean_fps, pipelined_fps) < TARGET_FPS,
    )
