"""Ground-truth images, the point measurement oracle, and PGM input/output.

Images are dense 8-bit grayscale rasters. ``measure`` reads one pixel of a
hidden ground truth, standing in for a point-wise scanning instrument.
``generate_dendrite`` builds synthetic targets with the gross morphology of
solidification skeletons: straight primary arms radiating from a nucleus
with short perpendicular side branches, bright on a dark noisy background.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import NamedTuple

import numpy as np


class PgmError(Exception):
    """Base class for PGM codec failures."""


class PgmFormatError(PgmError):
    """The file is not an 8-bit grayscale PGM (wrong or unknown magic)."""


class PgmHeaderError(PgmError):
    """The PGM header is malformed (missing or non-numeric fields)."""


class PgmDepthError(PgmError):
    """The sample depth exceeds 8 bits (maxval > 255)."""


class PgmDataError(PgmError):
    """The pixel payload is truncated or out of range."""


class Location(NamedTuple):
    """A pixel position; ``row * width + col`` is its linearized index."""

    row: int
    col: int


class Image:
    """An immutable 8-bit grayscale raster.

    ``pixels`` is a read-only ``(height, width)`` uint8 array in row-major
    order. Inputs of other integer dtypes are accepted if every value lies
    in [0, 255].
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels) -> None:
        px = np.asarray(pixels)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("image data must be a non-empty 2-D array")
        if px.dtype != np.uint8:
            if not np.issubdtype(px.dtype, np.number):
                raise ValueError("image data must be numeric")
            if np.any(px < 0) or np.any(px > 255) or np.any(px != np.floor(px)):
                raise ValueError("intensities must be integers in [0, 255]")
            px = px.astype(np.uint8)
        px = np.ascontiguousarray(px).copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def size(self) -> int:
        return self.pixels.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return bool(np.array_equal(self.pixels, other.pixels))

    def __repr__(self) -> str:
        return f"Image({self.width}x{self.height})"


class MeasurementSet:
    """Ordered (location, intensity) pairs plus an O(1) membership mask.

    ``entries`` preserves acquisition order; ``mask`` is true exactly at the
    measured locations. A location can be added only once.
    """

    def __init__(self, height: int, width: int) -> None:
        if height < 1 or width < 1:
            raise ValueError("domain must be at least 1x1")
        self.height = height
        self.width = width
        self.mask = np.zeros((height, width), dtype=bool)
        self.entries: list[tuple[Location, int]] = []

    @classmethod
    def from_mask(cls, mask: np.ndarray, truth: Image) -> "MeasurementSet":
        """Build a set from a boolean mask, reading intensities off ``truth``.

        Entries are ordered row-major; the acquisition order is lost.
        """
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != truth.pixels.shape:
            raise ValueError("mask dimensions do not match the image")
        ms = cls(truth.height, truth.width)
        for r, c in zip(*np.nonzero(mask)):
            ms.add(Location(int(r), int(c)), int(truth.pixels[r, c]))
        return ms

    @property
    def domain(self) -> tuple[int, int]:
        return (self.height, self.width)

    def add(self, loc: Location, intensity: int) -> None:
        r, c = loc
        if not (0 <= r < self.height and 0 <= c < self.width):
            raise IndexError(f"location {loc} outside {self.width}x{self.height} domain")
        if self.mask[r, c]:
            raise ValueError(f"location {loc} measured twice")
        self.mask[r, c] = True
        self.entries.append((Location(int(r), int(c)), int(intensity)))

    def ratio(self) -> float:
        return len(self.entries) / (self.height * self.width)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, loc) -> bool:
        r, c = loc
        if not (0 <= r < self.height and 0 <= c < self.width):
            return False
        return bool(self.mask[r, c])


def measure(image: Image, loc: Location) -> int:
    """Read the ground-truth intensity at ``loc`` (pure, deterministic)."""
    r, c = loc
    if not (0 <= r < image.height and 0 <= c < image.width):
        raise IndexError(f"location {loc} outside {image.width}x{image.height} image")
    return int(image.pixels[r, c])


def sampled_image(truth: Image, ms: MeasurementSet) -> Image:
    """The unreconstructed view: truth at measured pixels, 0 elsewhere."""
    if ms.domain != (truth.height, truth.width):
        raise ValueError("measurement domain does not match the image")
    out = np.where(ms.mask, truth.pixels, 0).astype(np.uint8)
    return Image(out)


# ---------------------------------------------------------------------------
# PGM codec (P2 ASCII and P5 binary, maxval <= 255)

_WHITESPACE = b" \t\n\r\x0b\x0c"


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next header token, skipping whitespace and # comments."""
    n = len(data)
    while pos < n:
        ch = data[pos : pos + 1]
        if ch in b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif ch in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < n and data[pos : pos + 1] not in _WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PgmHeaderError("unexpected end of header")
    return data[start:pos], pos


def _header_int(data: bytes, pos: int, what: str) -> tuple[int, int]:
    token, pos = _next_token(data, pos)
    try:
        value = int(token)
    except ValueError:
        raise PgmHeaderError(f"non-numeric {what}: {token!r}") from None
    return value, pos


def load_image(path) -> Image:
    """Load an 8-bit grayscale PGM (binary P5 or ASCII P2).

    Raises FileNotFoundError for a missing file, PgmFormatError for other
    PNM flavors (color, bitmap), PgmHeaderError for malformed headers,
    PgmDepthError for maxval > 255, and PgmDataError for bad payloads.
    """
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        if magic in (b"P1", b"P3", b"P4", b"P6"):
            kind = {b"P1": "bitmap", b"P3": "color", b"P4": "bitmap", b"P6": "color"}[magic]
            raise PgmFormatError(f"unsupported format {magic.decode()} ({kind}); need grayscale P2/P5")
        raise PgmFormatError("not a PGM file")
    pos = 2
    width, pos = _header_int(data, pos, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise PgmHeaderError(f"invalid dimensions {width}x{height}")
    if maxval > 255:
        raise PgmDepthError(f"maxval {maxval} exceeds 8-bit depth")
    if maxval < 1:
        raise PgmHeaderError(f"invalid maxval {maxval}")

    count = width * height
    if magic == b"P5":
        if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
            raise PgmHeaderError("missing whitespace after maxval")
        pos += 1
        raw = data[pos : pos + count]
        if len(raw) < count:
            raise PgmDataError(f"truncated pixel data: {len(raw)} of {count} bytes")
        values = np.frombuffer(raw, dtype=np.uint8)
    else:
        tokens = []
        try:
            while len(tokens) < count:
                token, pos = _next_token(data, pos)
                tokens.append(int(token))
        except PgmHeaderError:
            raise PgmDataError(f"truncated pixel data: {len(tokens)} of {count} samples") from None
        except ValueError:
            raise PgmDataError("non-numeric pixel sample") from None
        values = np.asarray(tokens, dtype=np.int64)
    if values.max(initial=0) > maxval:
        raise PgmDataError(f"pixel sample exceeds maxval {maxval}")
    return Image(values.reshape(height, width).astype(np.uint8))


def save_image(img: Image, path) -> None:
    """Write ``img`` as a binary (P5) PGM with maxval 255."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + img.pixels.tobytes())


def save_mask(ms: MeasurementSet, path) -> None:
    """Write the measured-location mask as a P5 PGM: 255 measured, 0 not."""
    save_image(Image(np.where(ms.mask, 255, 0).astype(np.uint8)), path)


# ---------------------------------------------------------------------------
# Synthetic dendrite targets

_BG_MAX = 30
_FG_MIN = 200


def _stamp(fg: np.ndarray, y: float, x: float, thickness: int) -> None:
    # Square stamp of side `thickness` centered on the rounded point; offsets
    # are chosen so thickness 1 paints one pixel and thickness 2 paints 2x2.
    h, w = fg.shape
    iy, ix = int(round(y)), int(round(x))
    lo = -(thickness // 2)
    hi = thickness - thickness // 2
    for oy in range(lo, hi):
        for ox in range(lo, hi):
            r, c = iy + oy, ix + ox
            if 0 <= r < h and 0 <= c < w:
                fg[r, c] = True


def _stamp_segment(fg, y0, x0, dy, dx, length, thickness):
    steps = max(1, int(math.ceil(length / 0.5)))
    for i in range(steps + 1):
        t = min(i * 0.5, length)
        _stamp(fg, y0 + t * dy, x0 + t * dx, thickness)


def generate_dendrite(
    width: int,
    height: int,
    n_primary_arms: int = 4,
    secondary_arm_rate: float = 0.25,
    arm_thickness: int = 3,
    seed: int = 0,
) -> Image:
    """Procedural skeleton target: bright arms on a dark noisy background.

    ``n_primary_arms`` straight rays leave the image center at evenly spaced
    angles (with one seeded global rotation). Perpendicular secondary arms
    branch off at ``secondary_arm_rate`` per unit length of primary arm.
    Foreground intensities are drawn from [200, 255] and the background from
    [0, 30], so an intensity histogram is always bimodal and separable.
    Deterministic for a fixed seed.
    """
    if width < 32 or height < 32:
        raise ValueError(f"degenerate dimensions {width}x{height}; need at least 32x32")
    if n_primary_arms < 1:
        raise ValueError("need at least one primary arm")
    if arm_thickness < 1:
        raise ValueError("arm thickness must be at least 1 pixel")
    if secondary_arm_rate < 0:
        raise ValueError("secondary arm rate must be non-negative")

    rng = np.random.default_rng(seed)
    img = rng.integers(0, _BG_MAX + 1, size=(height, width), dtype=np.int64)
    fg = np.zeros((height, width), dtype=bool)

    cy, cx = (height - 1) / 2.0, (width - 1) / 2.0
    base_angle = rng.uniform(0.0, 2.0 * math.pi / n_primary_arms)
    arm_len = 0.46 * min(width, height)
    angles = [base_angle + 2.0 * math.pi * j / n_primary_arms for j in range(n_primary_arms)]

    for theta in angles:
        _stamp_segment(fg, cy, cx, math.sin(theta), math.cos(theta), arm_len, arm_thickness)

    branch_thickness = max(1, arm_thickness - 1)
    for theta in angles:
        dy, dx = math.sin(theta), math.cos(theta)
        for step in range(2, int(arm_len)):
            if rng.random() >= secondary_arm_rate:
                continue
            side = 1.0 if rng.random() < 0.5 else -1.0
            blen = rng.uniform(3.0, max(3.5, 0.45 * arm_len))
            phi = theta + side * math.pi / 2.0
            y0, x0 = cy + step * dy, cx + step * dx
            _stamp_segment(fg, y0, x0, math.sin(phi), math.cos(phi), blen, branch_thickness)

    img[fg] = rng.integers(_FG_MIN, 256, size=int(fg.sum()))
    return Image(img)
