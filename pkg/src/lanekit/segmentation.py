"""Color and gradient thresholding of a bird's-eye frame into a lane mask.

A config holds named rules (plane source + inclusive [lo, hi] range) and a
boolean expression over the rule names. Rules on value-like color planes can
shift with scene brightness (percentile stretch) so dark or washed-out
frames still pass their markings; saturation, hue, and gradient planes are
left alone because they already normalize away global gain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ChannelMismatchError,
    DimensionMismatchError,
    InvalidRangeError,
    ParseError,
    UnknownRuleNameError,
)
from . import image as im

# masks are plain bool arrays of shape (h, w)
BinaryMask = np.ndarray

COLOR_SOURCES = (
    "gray", "rgb_r", "rgb_g", "rgb_b", "rgb_min",
    "hls_h", "hls_l", "hls_s", "hsv_h", "hsv_s", "hsv_v",
    "lab_l", "lab_a", "lab_b",
)
GRADIENT_SOURCES = ("sobel_x", "sobel_y", "grad_mag", "grad_dir")

# planes that scale with scene brightness, and their nominal full-scale value;
# rules on these participate in adaptive shifting
_ADAPT_FULLSCALE = {
    "gray": 1.0, "rgb_r": 1.0, "rgb_g": 1.0, "rgb_b": 1.0, "rgb_min": 1.0,
    "hls_l": 1.0, "hsv_v": 1.0,
    "lab_l": 100.0, "lab_a": 127.0, "lab_b": 127.0,
}

_ADAPT_PASS_PCT = 92.0      # cap: at most 8% of pixels may pass a shifted rule
_ADAPT_REF_PCT = 99.9       # brightness reference percentile
_ADAPT_MIN_REF = 0.02       # below 2% of full scale the frame is treated as empty
_ADAPT_STRIDE = 3           # percentile subsampling stride (deterministic)


@dataclass(frozen=True)
class ThresholdRule:
    source: str
    lo: float
    hi: float

    def __post_init__(self):
        if self.source not in COLOR_SOURCES + GRADIENT_SOURCES:
            raise UnknownRuleNameError(f"unknown plane source '{self.source}'")
        if self.lo > self.hi:
            raise InvalidRangeError(f"rule range [{self.lo}, {self.hi}] has lo > hi")


# --- boolean expression tree over rule names ---


class _Expr:
    def evaluate(self, masks: dict) -> np.ndarray:
        raise NotImplementedError

    def names(self) -> set:
        raise NotImplementedError


@dataclass(frozen=True)
class _Name(_Expr):
    name: str

    def evaluate(self, masks):
        if self.name not in masks:
            raise UnknownRuleNameError(f"expression references undefined rule '{self.name}'")
        return masks[self.name]

    def names(self):
        return {self.name}


@dataclass(frozen=True)
class _Not(_Expr):
    arg: _Expr

    def evaluate(self, masks):
        return ~self.arg.evaluate(masks)

    def names(self):
        return self.arg.names()


@dataclass(frozen=True)
class _And(_Expr):
    left: _Expr
    right: _Expr

    def evaluate(self, masks):
        return self.left.evaluate(masks) & self.right.evaluate(masks)

    def names(self):
        return self.left.names() | self.right.names()


@dataclass(frozen=True)
class _Or(_Expr):
    left: _Expr
    right: _Expr

    def evaluate(self, masks):
        return self.left.evaluate(masks) | self.right.evaluate(masks)

    def names(self):
        return self.left.names() | self.right.names()


def _tokenize(text: str) -> list[str]:
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append(c)
            i += 1
        elif c.isalpha() or c == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        else:
            raise ParseError(f"bad character {c!r} in combine expression")
    return tokens


def parse_combine_expr(text: str) -> _Expr:
    """Parse AND/OR/NOT over rule names; NOT binds tightest, then AND, OR."""
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def parse_or():
        node = parse_and()
        while peek() is not None and peek().upper() == "OR":
            take()
            node = _Or(node, parse_and())
        return node

    def parse_and():
        node = parse_factor()
        while peek() is not None and peek().upper() == "AND":
            take()
            node = _And(node, parse_factor())
        return node

    def parse_factor():
        tok = peek()
        if tok is None:
            raise ParseError("combine expression ended unexpectedly")
        if tok.upper() == "NOT":
            take()
            return _Not(parse_factor())
        if tok == "(":
            take()
            node = parse_or()
            if take() != ")":
                raise ParseError("missing ')' in combine expression")
            return node
        if tok == ")":
            raise ParseError("unexpected ')' in combine expression")
        if tok.upper() in ("AND", "OR"):
            raise ParseError(f"unexpected operator '{tok}' in combine expression")
        return _Name(take())

    node = parse_or()
    if peek() is not None:
        raise ParseError(f"trailing tokens in combine expression near '{peek()}'")
    return node


@dataclass(frozen=True)
class ThresholdConfig:
    rules: dict
    combine: str
    adaptive: bool = True

    def __post_init__(self):
        expr = parse_combine_expr(self.combine)
        undefined = expr.names() - set(self.rules)
        if undefined:
            raise UnknownRuleNameError(
                f"combine expression references undefined rule(s): {sorted(undefined)}"
            )
        object.__setattr__(self, "_expr", expr)

    @property
    def expr(self) -> _Expr:
        return self._expr


def default_threshold_config(adaptive: bool = True) -> ThresholdConfig:
    return ThresholdConfig(
        rules={
            "s_channel": ThresholdRule("hls_s", 0.67, 1.0),
            "lab_b": ThresholdRule("lab_b", 27.0, 127.0),
            "white": ThresholdRule("rgb_min", 200.0 / 255.0, 1.0),
            "grad_x": ThresholdRule("sobel_x", 20.0, 100.0),
        },
        combine="s_channel OR lab_b OR white OR grad_x",
        adaptive=adaptive,
    )


# --- plane computation ---


def _gradient_plane(gray: np.ndarray, kind: str) -> np.ndarray:
    """Derived plane a gradient rule thresholds: |g| rescaled so the plane max
    maps to 255 (x/y/magnitude), or the direction angle in radians."""
    if kind in ("x", "sobel_x"):
        g = np.abs(im.sobel(gray, "x"))
    elif kind in ("y", "sobel_y"):
        g = np.abs(im.sobel(gray, "y"))
    elif kind in ("magnitude", "grad_mag"):
        g = im.grad_magnitude(im.sobel(gray, "x"), im.sobel(gray, "y"))
    elif kind in ("direction", "grad_dir"):
        return im.grad_direction(im.sobel(gray, "x"), im.sobel(gray, "y"))
    else:
        raise UnknownRuleNameError(f"unknown gradient kind '{kind}'")
    peak = float(g.max())
    if peak <= 0.0:
        return np.zeros_like(g)
    return g * (255.0 / peak)


def compute_planes(img: im.ImageBuffer, sources) -> dict:
    """Compute each requested plane exactly once, sharing intermediates."""
    if img.channels != 3:
        raise ChannelMismatchError("segmentation needs a 3-channel frame")
    wanted = set(sources)
    planes: dict[str, np.ndarray] = {}
    rgb = None
    if wanted & {"rgb_r", "rgb_g", "rgb_b", "rgb_min"}:
        rgb = img.to_float()
        for name, ch in (("rgb_r", 0), ("rgb_g", 1), ("rgb_b", 2)):
            if name in wanted:
                planes[name] = rgb[:, :, ch]
        if "rgb_min" in wanted:
            planes["rgb_min"] = rgb.min(axis=2)
    if wanted & {"hls_h", "hls_l", "hls_s"}:
        h, l, s = im.rgb_to_hls(img)
        planes.update({"hls_h": h, "hls_l": l, "hls_s": s})
    if wanted & {"hsv_h", "hsv_s", "hsv_v"}:
        h, s, v = im.rgb_to_hsv(img)
        planes.update({"hsv_h": h, "hsv_s": s, "hsv_v": v})
    if wanted & {"lab_l", "lab_a", "lab_b"}:
        l, a, b = im.rgb_to_lab(img)
        planes.update({"lab_l": l, "lab_a": a, "lab_b": b})
    gray = None
    if wanted & {"gray", "sobel_x", "sobel_y", "grad_mag", "grad_dir"}:
        gray = im.to_grayscale(img)
        if "gray" in wanted:
            planes["gray"] = gray
    for g in ("sobel_x", "sobel_y", "grad_mag", "grad_dir"):
        if g in wanted:
            planes[g] = _gradient_plane(gray, g)
    return {k: v for k, v in planes.items() if k in wanted}


# --- thresholding ---


def channel_threshold(plane: np.ndarray, lo: float, hi: float) -> BinaryMask:
    """Inclusive range test on a float plane."""
    if lo > hi:
        raise InvalidRangeError(f"range [{lo}, {hi}] has lo > hi")
    return (plane >= lo) & (plane <= hi)


def gradient_threshold(gray: np.ndarray, kind: str, lo: float, hi: float) -> BinaryMask:
    """Threshold a Sobel-derived plane of `gray` (see _gradient_plane)."""
    if lo > hi:
        raise InvalidRangeError(f"range [{lo}, {hi}] has lo > hi")
    return channel_threshold(_gradient_plane(gray, kind), lo, hi)


def combine(masks: dict, expr) -> BinaryMask:
    """Pointwise boolean evaluation of `expr` (tree or text) over named masks."""
    if isinstance(expr, str):
        expr = parse_combine_expr(expr)
    shapes = {m.shape for m in masks.values()}
    if len(shapes) > 1:
        raise DimensionMismatchError(f"mask dimensions differ: {sorted(shapes)}")
    return expr.evaluate(masks)


def effective_ranges(cfg: ThresholdConfig, planes: dict) -> dict:
    """Per-rule (lo, hi) after the adaptive brightness shift.

    For value-scaled color planes: lo scales with the plane's 99.9th
    percentile relative to nominal full scale, floored at the 92nd percentile
    so no shifted rule passes more than 8% of pixels. Frames darker than 2%
    of full scale keep their configured range (an all-black frame must stay
    an empty mask). Percentiles are taken on a stride-3 subsample.
    """
    out = {}
    for name, rule in cfg.rules.items():
        lo, hi = rule.lo, rule.hi
        full = _ADAPT_FULLSCALE.get(rule.source)
        if cfg.adaptive and full is not None:
            sub = planes[rule.source][::_ADAPT_STRIDE, ::_ADAPT_STRIDE]
            ref = float(np.percentile(sub, _ADAPT_REF_PCT))
            if ref > _ADAPT_MIN_REF * full:
                floor = float(np.percentile(sub, _ADAPT_PASS_PCT))
                lo = max(lo * ref / full, floor)
        out[name] = (lo, hi)
    return out


def segment_frame(img: im.ImageBuffer, cfg: ThresholdConfig) -> BinaryMask:
    """Evaluate every rule on its (shared) plane and combine."""
    sources = {rule.source for rule in cfg.rules.values()}
    planes = compute_planes(img, sources)
    ranges = effective_ranges(cfg, planes)
    masks = {
        name: channel_threshold(planes[rule.source], *ranges[name])
        for name, rule in cfg.rules.items()
    }
    return combine(masks, cfg.expr)
