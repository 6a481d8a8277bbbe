"""Pipeline configuration: flat key=value text with dotted section prefixes.

Unknown keys are errors on purpose (typo safety). Every value has a default,
so an absent file or empty text yields a fully working configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .detect import SlidingWindowConfig, TrackConfig, ValidationConfig
from .errors import FileError, ParseError
from .homography import Homography, homography_from_quad, invert
from .metrics import ScaleConfig
from .overlay import OverlayStyle
from .segmentation import ThresholdConfig, ThresholdRule, default_threshold_config

# default road trapezoid (fractions of width/height) and its rectangle target
DEFAULT_SRC_QUAD = (0.43, 0.65, 0.57, 0.65, 0.10, 1.0, 0.95, 1.0)
DEFAULT_DST_LEFT_X = 0.2
DEFAULT_DST_RIGHT_X = 0.8


@dataclass(frozen=True)
class PipelineConfig:
    calibration_file: str | None = None
    src_quad: tuple = DEFAULT_SRC_QUAD
    dst_left_x: float = DEFAULT_DST_LEFT_X
    dst_right_x: float = DEFAULT_DST_RIGHT_X
    threshold: ThresholdConfig = field(default_factory=default_threshold_config)
    scale: ScaleConfig = ScaleConfig()
    track: TrackConfig = TrackConfig()
    style: OverlayStyle = OverlayStyle()
    mask_input: bool = False
    pipelined: bool = False

    def __post_init__(self):
        for v in self.src_quad + (self.dst_left_x, self.dst_right_x):
            if not 0.0 <= v <= 1.0:
                raise ParseError(f"quad fraction {v} outside [0, 1]")


def parse_kv_text(text: str):
    """Yield (line_number, key, value) from flat key=value text.

    Blank lines and '#' comments are skipped; values may contain '='.
    """
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key:
            raise ParseError(f"line {lineno}: empty key")
        yield lineno, key, value


def _parse_bool(value: str, lineno: int) -> bool:
    low = value.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ParseError(f"line {lineno}: expected a boolean, got {value!r}")


def _parse_float(value: str, lineno: int) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ParseError(f"line {lineno}: expected a number, got {value!r}") from exc


def _parse_int(value: str, lineno: int) -> int:
    try:
        return int(value)
    except ValueError as exc:
        raise ParseError(f"line {lineno}: expected an integer, got {value!r}") from exc


_FLOAT_KEYS = {
    "perspective.src0_x", "perspective.src0_y", "perspective.src1_x", "perspective.src1_y",
    "perspective.src2_x", "perspective.src2_y", "perspective.src3_x", "perspective.src3_y",
    "perspective.dst_left_x", "perspective.dst_right_x",
    "scale.xm_per_pix", "scale.ym_per_pix",
    "tracker.ema_alpha",
    "validate.min_width_px", "validate.max_width_px",
    "validate.parallel_tol", "validate.max_residual_px",
    "overlay.alpha",
}
_INT_KEYS = {
    "window.n_windows", "window.margin", "window.minpix",
    "tracker.miss_threshold", "tracker.search_margin",
    "overlay.fill_r", "overlay.fill_g", "overlay.fill_b",
    "overlay.line_r", "overlay.line_g", "overlay.line_b",
    "overlay.text_r", "overlay.text_g", "overlay.text_b",
    "overlay.text_scale",
}
_BOOL_KEYS = {"segmentation.adaptive", "pipeline.mask_input", "pipeline.pipelined"}
_STR_KEYS = {"calibration.file", "segmentation.combine"}


def _parse_rule(name: str, value: str, lineno: int) -> ThresholdRule:
    parts = value.split(":")
    if len(parts) != 3:
        raise ParseError(f"line {lineno}: rule '{name}' must be source:lo:hi, got {value!r}")
    lo = _parse_float(parts[1], lineno)
    hi = _parse_float(parts[2], lineno)
    return ThresholdRule(parts[0].strip(), lo, hi)


def parse_config_text(text: str) -> PipelineConfig:
    values: dict = {}
    rules: dict = {}
    for lineno, key, value in parse_kv_text(text):
        if key.startswith("segmentation.rule."):
            rule_name = key[len("segmentation.rule."):]
            if not rule_name.isidentifier():
                raise ParseError(f"line {lineno}: bad rule name {rule_name!r}")
            rules[rule_name] = _parse_rule(rule_name, value, lineno)
        elif key in _FLOAT_KEYS:
            values[key] = _parse_float(value, lineno)
        elif key in _INT_KEYS:
            values[key] = _parse_int(value, lineno)
        elif key in _BOOL_KEYS:
            values[key] = _parse_bool(value, lineno)
        elif key in _STR_KEYS:
            values[key] = value
        else:
            raise ParseError(f"line {lineno}: unknown key '{key}'")

    adaptive = values.get("segmentation.adaptive", True)
    if rules:
        if "segmentation.combine" not in values:
            raise ParseError("segmentation.rule.* given without segmentation.combine")
        threshold = ThresholdConfig(rules=rules, combine=values["segmentation.combine"], adaptive=adaptive)
    elif "segmentation.combine" in values:
        raise ParseError("segmentation.combine given without any segmentation.rule.*")
    else:
        threshold = default_threshold_config(adaptive=adaptive)

    d = DEFAULT_SRC_QUAD
    src_quad = tuple(
        values.get(f"perspective.src{i}_{ax}", d[2 * i + (ax == "y")])
        for i in range(4)
        for ax in ("x", "y")
    )
    window = SlidingWindowConfig(
        n_windows=values.get("window.n_windows", 9),
        margin=values.get("window.margin", 100),
        minpix=values.get("window.minpix", 50),
    )
    validation = ValidationConfig(
        min_width_px=values.get("validate.min_width_px", 500.0),
        max_width_px=values.get("validate.max_width_px", 900.0),
        parallel_tol=values.get("validate.parallel_tol", 0.4),
        max_residual_px=values.get("validate.max_residual_px", 50.0),
    )
    track = TrackConfig(
        window=window,
        search_margin=values.get("tracker.search_margin", 100),
        ema_alpha=values.get("tracker.ema_alpha", 0.2),
        miss_threshold=values.get("tracker.miss_threshold", 5),
        validation=validation,
    )
    style = OverlayStyle(
        fill_color=(
            values.get("overlay.fill_r", 0),
            values.get("overlay.fill_g", 128),
            values.get("overlay.fill_b", 0),
        ),
        alpha=values.get("overlay.alpha", 0.3),
        line_color=(
            values.get("overlay.line_r", 255),
            values.get("overlay.line_g", 140),
            values.get("overlay.line_b", 0),
        ),
        text_color=(
            values.get("overlay.text_r", 255),
            values.get("overlay.text_g", 255),
            values.get("overlay.text_b", 255),
        ),
        text_scale=values.get("overlay.text_scale", 2),
    )
    return PipelineConfig(
        calibration_file=values.get("calibration.file"),
        src_quad=src_quad,
        dst_left_x=values.get("perspective.dst_left_x", DEFAULT_DST_LEFT_X),
        dst_right_x=values.get("perspective.dst_right_x", DEFAULT_DST_RIGHT_X),
        threshold=threshold,
        scale=ScaleConfig(
            xm_per_pix=values.get("scale.xm_per_pix", 3.7 / 700.0),
            ym_per_pix=values.get("scale.ym_per_pix", 30.0 / 720.0),
        ),
        track=track,
        style=style,
        mask_input=values.get("pipeline.mask_input", False),
        pipelined=values.get("pipeline.pipelined", False),
    )


def load_config(path=None) -> PipelineConfig:
    """Read a config file; None returns the defaults."""
    if path is None:
        return PipelineConfig()
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise FileError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def birdseye_homography(cfg: PipelineConfig, width: int, height: int) -> Homography:
    """Camera-to-bird's-eye map from the configured quad fractions."""
    q = cfg.src_quad
    src = [(q[0] * width, q[1] * height), (q[2] * width, q[3] * height),
           (q[4] * width, q[5] * height), (q[6] * width, q[7] * height)]
    xl, xr = cfg.dst_left_x * width, cfg.dst_right_x * width
    dst = [(xl, 0.0), (xr, 0.0), (xl, float(height)), (xr, float(height))]
    return homography_from_quad(src, dst)


def birdseye_pair(cfg: PipelineConfig, width: int, height: int):
    h = birdseye_homography(cfg, width, height)
    return h, invert(h)
