"""Reading and writing frames: 8-bit RGB PNG and binary PPM (P6)."""

from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .errors import FileError, ParseError
from .image import ImageBuffer

FRAME_EXTENSIONS = (".png", ".ppm")


def list_frame_files(directory) -> list[str]:
    """Frame paths in the directory, lexicographic by file name."""
    try:
        names = os.listdir(directory)
    except OSError as exc:
        raise FileError(f"cannot list {directory}: {exc}") from exc
    names = [n for n in names if os.path.splitext(n)[1].lower() in FRAME_EXTENSIONS]
    return [os.path.join(directory, n) for n in sorted(names)]


def _read_ppm(path) -> np.ndarray:
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc}") from exc

    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(raw):
            c = raw[pos : pos + 1]
            if c == b"#":  # comment to end of line
                while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError(f"{path}: truncated PPM header")
        return raw[start:pos]

    if next_token() != b"P6":
        raise ParseError(f"{path}: not a binary PPM (P6) file")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric PPM header field") from exc
    if width < 1 or height < 1:
        raise ParseError(f"{path}: bad PPM dimensions {width}x{height}")
    if maxval != 255:
        raise ParseError(f"{path}: only maxval 255 PPM supported, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    need = width * height * 3
    pixels = raw[pos : pos + need]
    if len(pixels) < need:
        raise ParseError(f"{path}: PPM pixel data truncated")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width, 3).copy()


def read_image(path) -> ImageBuffer:
    """Load a PNG or PPM frame as 3-channel RGB."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext == ".ppm":
        return ImageBuffer(_read_ppm(path))
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.uint8)
    except FileNotFoundError as exc:
        raise FileError(f"cannot read {path}: {exc}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: not a readable image ({exc})") from exc
    return ImageBuffer(arr)


def read_mask(path) -> np.ndarray:
    """Load a frame as a boolean mask (any channel value > 127 counts set)."""
    img = read_image(path)
    if img.channels == 3:
        return img.data.max(axis=2) > 127
    return img.data > 127


def write_png(img: ImageBuffer, path) -> None:
    try:
        Image.fromarray(img.data).save(path, format="PNG")
    except OSError as exc:
        raise FileError(f"cannot write {path}: {exc}") from exc


def write_mask_png(mask: np.ndarray, path) -> None:
    write_png(ImageBuffer(np.where(mask, 255, 0).astype(np.uint8)), path)


def write_ppm(img: ImageBuffer, path) -> None:
    data = img.data
    if data.ndim == 2:
        data = np.stack([data] * 3, axis=2)
    try:
        with open(path, "wb") as f:
            f.write(f"P6\n{img.width} {img.height}\n255\n".encode("ascii"))
            f.write(data.tobytes())
    except OSError as exc:
        raise FileError(f"cannot write {path}: {exc}") from exc
