"""Score pipeline output against generator ground truth.

Truth files pair each frame with the exact lane polynomials the synthesizer
drew, so detection and error rates here measure the pipeline against known
geometry rather than against hand labels.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .errors import EmptyInputError, ParseError, TruthMismatchError
from .frameio import list_frame_files
from .pipeline import Pipeline, iter_records, probe_size

# a frame counts as detected only when accepted and within this bound
DETECT_ERROR_LIMIT_PX = 20.0
ERROR_SAMPLE_ROWS = 10


@dataclass(frozen=True)
class TruthEntry:
    name: str
    left: tuple  # (a, b, c) for x = a*y^2 + b*y + c
    right: tuple
    condition: str

    def eval_left(self, y):
        a, b, c = self.left
        return (a * y + b) * y + c

    def eval_right(self, y):
        a, b, c = self.right
        return (a * y + b) * y + c


@dataclass(frozen=True)
class EvalReport:
    frames_total: int
    frames_detected: int
    detection_rate: float
    mean_lateral_error_px: float
    relative_error_rate: float
    mean_fps: float

    def to_text(self) -> str:
        lines = [
            "evaluation against generator ground truth",
            f"frames_total: {self.frames_total}",
            f"frames_detected: {self.frames_detected}",
            f"detection_rate: {self.detection_rate:.4f}",
            f"mean_lateral_error_px: {self.mean_lateral_error_px:.3f}",
            f"relative_error_rate: {self.relative_error_rate:.4f}",
            f"mean_fps: {self.mean_fps:.2f}",
        ]
        return "\n".join(lines) + "\n"


def parse_truth_file(path) -> list[TruthEntry]:
    """Rows of "name la lb lc ra rb rc condition", one per frame."""
    entries = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError as exc:
        raise ParseError(f"truth file not found: {path}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 8:
            raise ParseError(f"truth line {lineno}: expected 8 fields, got {len(parts)}")
        try:
            nums = [float(p) for p in parts[1:7]]
        except ValueError as exc:
            raise ParseError(f"truth line {lineno}: bad coefficient") from exc
        entries.append(
            TruthEntry(
                name=parts[0],
                left=tuple(nums[0:3]),
                right=tuple(nums[3:6]),
                condition=parts[7],
            )
        )
    return entries


def _frame_error_px(pair, entry: TruthEntry, rows: np.ndarray) -> float:
    le = np.abs(pair.left.eval(rows) - entry.eval_left(rows))
    re = np.abs(pair.right.eval(rows) - entry.eval_right(rows))
    return float((le.sum() + re.sum()) / (2 * len(rows)))


def run_eval(input_dir, truth_path, cfg: PipelineConfig) -> EvalReport:
    """Process a sequence and compare emitted fits with the truth polynomials.

    Detected means accepted with mean lateral error under
    DETECT_ERROR_LIMIT_PX, sampled at ERROR_SAMPLE_ROWS evenly spaced rows on
    both lanes. Relative error normalizes by the true bottom lane width.
    """
    files = list_frame_files(input_dir)
    if not files:
        raise EmptyInputError(f"no frames found in {input_dir}")
    truth = parse_truth_file(truth_path)
    names = [os.path.basename(f) for f in files]
    if len(truth) != len(names):
        raise TruthMismatchError(
            f"{len(names)} frames but {len(truth)} truth rows"
        )
    for i, (name, entry) in enumerate(zip(names, truth)):
        if name != entry.name:
            raise TruthMismatchError(f"frame {i}: {name} vs truth {entry.name}")

    width, height = probe_size(files[0])
    pipeline = Pipeline(cfg, width, height)
    rows = np.linspace(0.0, height - 1.0, ERROR_SAMPLE_ROWS)

    detected = 0
    detected_errors = []
    total_ms = 0.0
    for rec, entry in zip(iter_records(pipeline, files, pipelined=cfg.pipelined), truth):
        total_ms += rec.frame_time_ms
        if rec.status != "accepted" or rec.pair is None:
            continue
        err = _frame_error_px(rec.pair, entry, rows)
        if err < DETECT_ERROR_LIMIT_PX:
            detected += 1
            detected_errors.append(err)

    n = len(files)
    mean_err = float(np.mean(detected_errors)) if detected_errors else 0.0
    y_bottom = height - 1
    widths = [e.eval_right(y_bottom) - e.eval_left(y_bottom) for e in truth]
    mean_width = math.fsum(widths) / len(widths)
    return EvalReport(
        frames_total=n,
        frames_detected=detected,
        detection_rate=detected / n,
        mean_lateral_error_px=mean_err,
        relative_error_rate=(mean_err / mean_width) if mean_width > 0 else 0.0,
        mean_fps=(1000.0 * n / total_ms) if total_ms > 0 else 0.0,
    )
