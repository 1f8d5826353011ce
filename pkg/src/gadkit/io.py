"""Raster file I/O.

Float rasters use the portable float map convention: magic "PF" for
3-channel and "Pf" for 1-channel, a width/height line, a scale line whose
sign encodes endianness (negative = little-endian), then raw float32
samples stored row by row from the bottom row up.  Float round-trips are
bit-exact.

8-bit images are PNG on write; PNG, PGM and PPM are accepted on read and
are mapped to [0, 1] by value/255.  Label maps are single-channel PNGs
whose pixel values are the class ids.
"""

from __future__ import annotations

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import RasterFormatError, ShapeError
from .fields import as_stack
from .labels import DEFAULT_IGNORE_ID, LabelMap

PFM_SUFFIXES = (".pfm",)


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited token starting at ``pos``."""
    n = len(buf)
    while pos < n and buf[pos : pos + 1].isspace():
        pos += 1
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise RasterFormatError("unexpected end of header", offset=pos)
    return buf[start:pos], pos


def read_float_map(path) -> np.ndarray:
    """Read a PF/Pf float raster into a (C, H, W) float64 stack."""
    with open(path, "rb") as fh:
        buf = fh.read()
    magic = buf[:2]
    if magic == b"PF":
        channels = 3
    elif magic == b"Pf":
        channels = 1
    else:
        raise RasterFormatError(f"bad float-map magic {magic!r}", offset=0)
    pos = 2
    try:
        wtok, pos = _read_token(buf, pos)
        htok, pos = _read_token(buf, pos)
        width, height = int(wtok), int(htok)
    except ValueError:
        raise RasterFormatError("dimensions are not integers", offset=pos) from None
    if width <= 0 or height <= 0:
        raise RasterFormatError(f"bad dimensions {width}x{height}", offset=pos)
    try:
        stok, pos = _read_token(buf, pos)
        scale = float(stok)
    except ValueError:
        raise RasterFormatError("scale is not a number", offset=pos) from None
    if scale == 0:
        raise RasterFormatError("scale must be non-zero", offset=pos)
    pos += 1  # single whitespace byte terminates the header
    count = width * height * channels
    expected = count * 4
    if len(buf) - pos < expected:
        raise RasterFormatError(
            f"truncated pixel data: need {expected} bytes, have {len(buf) - pos}",
            offset=pos,
        )
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
    data = data.reshape(height, width, channels)[::-1]  # rows stored bottom-up
    return np.moveaxis(data, -1, 0).astype(np.float64)


def write_float_map(path, stack) -> None:
    """Write a 1- or 3-channel stack as a little-endian float map."""
    a = as_stack(stack)
    c, h, w = a.shape
    if c == 1:
        magic = b"Pf"
    elif c == 3:
        magic = b"PF"
    else:
        raise ValueError(f"float maps support 1 or 3 channels, got {c}")
    payload = np.moveaxis(a, 0, -1)[::-1].astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(magic + b"\n" + f"{w} {h}\n".encode() + b"-1.0\n" + payload)


def _to_image(arr: np.ndarray) -> Image.Image:
    if arr.shape[0] == 1:
        return Image.fromarray(arr[0], mode="L")
    if arr.shape[0] == 3:
        return Image.fromarray(np.moveaxis(arr, 0, -1), mode="RGB")
    raise ValueError(f"8-bit images support 1 or 3 channels, got {arr.shape[0]}")


def _from_image(img: Image.Image) -> np.ndarray:
    if img.mode in ("LA",):
        img = img.convert("L")
    elif img.mode in ("RGBA", "P"):
        img = img.convert("RGB")
    elif img.mode not in ("L", "RGB"):
        raise RasterFormatError(f"unsupported image mode {img.mode!r}")
    arr = np.asarray(img)
    if arr.ndim == 2:
        arr = arr[np.newaxis]
    else:
        arr = np.moveaxis(arr, -1, 0)
    return arr


def read_raster(path) -> np.ndarray:
    """Read a raster into a (C, H, W) float64 stack.

    Float maps return their stored values; 8-bit images are scaled to
    [0, 1] by value/255.
    """
    with open(path, "rb") as fh:
        magic = fh.read(2)
    if magic in (b"PF", b"Pf"):
        return read_float_map(path)
    try:
        with Image.open(path) as img:
            arr = _from_image(img)
    except UnidentifiedImageError:
        raise RasterFormatError(f"unrecognized raster format in {path}", offset=0) from None
    return arr.astype(np.float64) / 255.0


def write_raster(path, stack) -> None:
    """Write a stack by extension: .pfm as float map, .png as 8-bit.

    PNG values are clamped to [0, 1] and scaled by 255.
    """
    a = as_stack(stack)
    name = str(path).lower()
    if name.endswith(PFM_SUFFIXES):
        write_float_map(path, a)
        return
    if name.endswith(".png"):
        scaled = np.rint(np.clip(a, 0.0, 1.0) * 255.0).astype(np.uint8)
        _to_image(scaled).save(path, format="PNG")
        return
    raise ValueError(f"unsupported output extension for {path} (use .pfm or .png)")


def read_labels(path, num_classes: int = 2, ignore_id: int = DEFAULT_IGNORE_ID) -> LabelMap:
    """Read a single-channel 8-bit image as a label map of class ids."""
    try:
        with Image.open(path) as img:
            if img.mode != "L":
                img = img.convert("L")
            ids = np.asarray(img)
    except UnidentifiedImageError:
        raise RasterFormatError(f"unrecognized label format in {path}", offset=0) from None
    return LabelMap(ids.copy(), num_classes=num_classes, ignore_id=ignore_id)


def write_labels(path, labels: LabelMap) -> None:
    """Write a label map as a single-channel PNG of class ids."""
    ids = labels.ids
    if ids.min() < 0 or ids.max() > 255:
        raise ValueError("label ids must fit in 8 bits")
    Image.fromarray(ids.astype(np.uint8), mode="L").save(path, format="PNG")


def check_same_shape(stacks) -> None:
    """Raise ShapeError unless all stacks share spatial dimensions."""
    shapes = [s.shape[1:] for s in stacks]
    if any(s != shapes[0] for s in shapes[1:]):
        raise ShapeError(f"input dimensions disagree: {shapes}")
