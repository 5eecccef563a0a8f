"""Planar 8-bit frames and their binary PPM/PGM interchange format.

P5 (gray) and P6 (RGB) with maxval 255 are read and written bit-exactly.
Other raster formats (PNG, JPEG, ...) go through Pillow and are only a
convenience layered on top.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np

from .errors import MalformedHeader, TruncatedData, UnsupportedMaxval

PNM_EXTENSIONS = {".ppm", ".pgm", ".pnm"}
_WHITESPACE = b" \t\n\r\v\f"


def as_samples(values, what: str) -> np.ndarray:
    """uint8 copy of values; raises ValueError unless every value is an integer in [0, 255]."""
    array = np.asarray(values)
    if array.dtype != np.uint8 and array.size:
        if array.dtype.kind not in "biuf":
            raise ValueError(f"{what} must be numeric, got dtype {array.dtype}")
        if array.min() < 0 or array.max() > 255:
            raise ValueError(f"{what} must lie in [0, 255]")
        if array.dtype.kind == "f" and not np.all(array == np.floor(array)):
            raise ValueError(f"{what} must be whole numbers")
    return np.array(array, dtype=np.uint8, copy=True, order="C")


@dataclass(frozen=True, eq=False)
class PixelBuffer:
    """
    Immutable planar image.

    planes: uint8 array of shape (channels, height, width); plane j holds p_j(x, y)
    at [j, y, x].
    """

    planes: np.ndarray

    def __post_init__(self):
        planes = as_samples(self.planes, "pixel samples")
        if planes.ndim != 3:
            raise ValueError(f"planes must be 3-D (channels, height, width), got shape {planes.shape}")
        channels, height, width = planes.shape
        if channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {channels}")
        if width < 1 or height < 1:
            raise ValueError(f"empty frame {width}x{height}")
        planes.setflags(write=False)
        object.__setattr__(self, "planes", planes)

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def dims(self) -> tuple[int, int]:
        """(width, height)"""
        return self.width, self.height

    @classmethod
    def from_array(cls, array) -> "PixelBuffer":
        """Build from an interleaved (H, W) or (H, W, 3) array of 0..255 samples."""
        array = np.asarray(array)
        if array.ndim == 2:
            return cls(array[np.newaxis, :, :])
        if array.ndim == 3 and array.shape[2] == 3:
            return cls(np.moveaxis(array, 2, 0))
        raise ValueError(f"unsupported array shape {array.shape}")

    def to_array(self) -> np.ndarray:
        """Interleaved copy: (H, W) for gray, (H, W, 3) for RGB."""
        if self.channels == 1:
            return self.planes[0].copy()
        return np.moveaxis(self.planes, 0, 2).copy()

    def __eq__(self, other):
        if not isinstance(other, PixelBuffer):
            return NotImplemented
        return self.planes.shape == other.planes.shape and bool(np.array_equal(self.planes, other.planes))

    def __hash__(self):
        return hash((self.planes.shape, self.planes.tobytes()))


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next header token, skipping whitespace and # comments."""
    size = len(data)
    while pos < size:
        byte = data[pos : pos + 1]
        if byte in _WHITESPACE:
            pos += 1
        elif byte == b"#":
            while pos < size and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < size and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise MalformedHeader("unexpected end of header")
    return data[start:pos], pos


def _header_int(token: bytes, name: str) -> int:
    if not token.isdigit():
        raise MalformedHeader(f"{name} is not a decimal integer: {token!r}")
    return int(token)


def load_ppm(data: bytes) -> PixelBuffer:
    """Parse a binary P5/P6 image with maxval 255."""
    data = bytes(data)
    magic = data[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise MalformedHeader(f"unsupported magic {magic!r} (expected P5 or P6)")

    pos = 2
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        raise MalformedHeader("missing whitespace after magic")
    token, pos = _next_token(data, pos)
    width = _header_int(token, "width")
    token, pos = _next_token(data, pos)
    height = _header_int(token, "height")
    token, pos = _next_token(data, pos)
    maxval = _header_int(token, "maxval")

    if width < 1 or height < 1:
        raise MalformedHeader(f"invalid dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxval(f"maxval {maxval} not supported (only 255)")
    # 헤더 끝: maxval 다음 공백 한 바이트
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise MalformedHeader("missing single whitespace byte after maxval")
    pos += 1

    expected = width * height * channels
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise TruncatedData(f"expected {expected} payload bytes, got {len(payload)}")

    samples = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return PixelBuffer(np.moveaxis(samples, 2, 0))


def save_ppm(buf: PixelBuffer) -> bytes:
    """Serialize as P5 (gray) or P6 (RGB), maxval 255."""
    magic = "P5" if buf.channels == 1 else "P6"
    header = f"{magic}\n{buf.width} {buf.height}\n255\n".encode("ascii")
    payload = np.moveaxis(buf.planes, 0, 2).tobytes()
    return header + payload


def _from_pillow(img) -> PixelBuffer:
    # alpha is dropped; palette and 16-bit images are converted to 8-bit L or RGB
    mode = "L" if img.mode in ("1", "L", "I", "I;16", "F") else "RGB"
    return PixelBuffer.from_array(np.asarray(img.convert(mode)))


def load_image(path) -> PixelBuffer:
    """Read an image file; PPM/PGM natively, anything else through Pillow."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext in PNM_EXTENSIONS:
        with open(path, "rb") as f:
            return load_ppm(f.read())

    from PIL import Image

    with Image.open(path) as img:
        return _from_pillow(img)


def save_image(buf: PixelBuffer, path) -> None:
    """Write an image file; PPM/PGM natively, anything else through Pillow."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext in PNM_EXTENSIONS:
        with open(path, "wb") as f:
            f.write(save_ppm(buf))
        return

    from PIL import Image

    Image.fromarray(buf.to_array()).save(path)


def decode_image_bytes(data: bytes) -> PixelBuffer:
    """In-memory counterpart of load_image: P5/P6 by magic, anything else through Pillow."""
    if data[:2] in (b"P5", b"P6"):
        return load_ppm(data)

    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(io.BytesIO(data)) as img:
            return _from_pillow(img)
    except UnidentifiedImageError:
        raise MalformedHeader("body is neither PPM/PGM nor an image format Pillow can read") from None
