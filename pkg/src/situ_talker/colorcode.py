"""Stripe-code codec: object IDs as blue/red stripe patterns on raster scanlines.

The code geometry is this project's own design (no external standard):
18 stripes total, laid out as

    RED BLUE | 12 data stripes | 2 parity stripes | RED BLUE

Data stripes carry the 12-bit big-endian ID (BLUE=0, RED=1).  The two
parity stripes encode ``popcount(data) mod 4`` big-endian, which detects
every single-stripe error.  Rendering and decoding operate on synthetic
scanlines (one pixel row); locating a code inside a full camera frame is
out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from random import Random
from typing import Optional, Sequence

MIN_ID = 0
MAX_ID = 4095

DATA_BITS = 12
GUARD_WIDTH = 2
PARITY_WIDTH = 2
STRIPE_COUNT = 2 * GUARD_WIDTH + DATA_BITS + PARITY_WIDTH  # 18

# A pixel counts as red/blue only if that channel dominates by this margin.
CHANNEL_MARGIN = 30

MAX_NOISE_AMPLITUDE = 128
MAX_JITTER = 0.4


class Stripe(Enum):
    BLUE = 0
    RED = 1

    @property
    def letter(self) -> str:
        return "R" if self is Stripe.RED else "B"


GUARD = (Stripe.RED, Stripe.BLUE)

_RED_RGB = (255, 0, 0)
_BLUE_RGB = (0, 0, 255)


@dataclass(frozen=True)
class ColorCode:
    """An ordered stripe pattern; always STRIPE_COUNT stripes long."""

    stripes: tuple[Stripe, ...]

    def __post_init__(self) -> None:
        if len(self.stripes) != STRIPE_COUNT:
            raise ValueError(f"color code needs {STRIPE_COUNT} stripes, got {len(self.stripes)}")

    def __str__(self) -> str:
        return "".join(s.letter for s in self.stripes)


@dataclass(frozen=True)
class Scanline:
    """One rendered pixel row of RGB triples."""

    pixels: tuple[tuple[int, int, int], ...]

    @property
    def width(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True)
class NoiseSpec:
    """Synthetic degradation: additive per-channel noise and stripe-width jitter.

    ``seed`` makes a rendering reproducible; two renders with the same spec
    are pixel-identical.
    """

    amplitude: int = 0
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.amplitude <= MAX_NOISE_AMPLITUDE:
            raise ValueError(f"noise amplitude must be in [0, {MAX_NOISE_AMPLITUDE}]")
        if not 0.0 <= self.jitter <= MAX_JITTER:
            raise ValueError(f"stripe jitter must be in [0.0, {MAX_JITTER}]")


ZERO_NOISE = NoiseSpec()


def encode_id(object_id: int) -> ColorCode:
    """Encode an object ID into its stripe pattern.

    Raises ValueError when the ID is outside [MIN_ID, MAX_ID].
    """
    if not isinstance(object_id, int) or isinstance(object_id, bool):
        raise ValueError(f"object id must be an integer, got {object_id!r}")
    if not MIN_ID <= object_id <= MAX_ID:
        raise ValueError(f"object id {object_id} outside [{MIN_ID}, {MAX_ID}]")

    data_bits = [(object_id >> (DATA_BITS - 1 - i)) & 1 for i in range(DATA_BITS)]
    parity = sum(data_bits) % 4
    parity_bits = [(parity >> 1) & 1, parity & 1]

    stripes = (
        GUARD
        + tuple(Stripe(b) for b in data_bits)
        + tuple(Stripe(b) for b in parity_bits)
        + GUARD
    )
    return ColorCode(stripes)


def render_scanline(code: ColorCode, width: int, noise: NoiseSpec = ZERO_NOISE) -> Scanline:
    """Render a stripe pattern into a pixel row of the given width.

    Stripes get equal nominal widths; interior stripe boundaries are
    displaced by up to ``jitter`` of one nominal width, and every channel
    of every pixel is perturbed by a uniform integer in [-amplitude,
    amplitude], clamped to [0, 255].
    """
    if width < STRIPE_COUNT:
        raise ValueError(f"width {width} too small for {STRIPE_COUNT} stripes")

    rng = Random(noise.seed)
    nominal = width / STRIPE_COUNT
    boundaries = [0.0]
    for i in range(1, STRIPE_COUNT):
        offset = rng.uniform(-noise.jitter, noise.jitter) * nominal if noise.jitter else 0.0
        boundaries.append(i * nominal + offset)
    boundaries.append(float(width))

    pixels = []
    stripe_index = 0
    for x in range(width):
        while stripe_index < STRIPE_COUNT - 1 and x >= boundaries[stripe_index + 1]:
            stripe_index += 1
        base = _RED_RGB if code.stripes[stripe_index] is Stripe.RED else _BLUE_RGB
        if noise.amplitude:
            pixel = tuple(
                min(255, max(0, c + rng.randint(-noise.amplitude, noise.amplitude)))
                for c in base
            )
        else:
            pixel = base
        pixels.append(pixel)
    return Scanline(tuple(pixels))


def classify_pixel(pixel: Sequence[int], margin: int = CHANNEL_MARGIN) -> Optional[Stripe]:
    """Dominant-channel classification; None when neither channel dominates."""
    r, _, b = pixel
    if r - b >= margin:
        return Stripe.RED
    if b - r >= margin:
        return Stripe.BLUE
    return None


def decode_scanline(line: Scanline) -> Optional[int]:
    """Decode an object ID from a scanline; None means no valid code present.

    The absence of a code is a normal outcome, not an error: guard or
    parity failures, unclassifiable pixels, and stripe-count mismatches
    all simply yield None.
    """
    classes = [classify_pixel(p) for p in line.pixels]

    first = next((i for i, c in enumerate(classes) if c is not None), None)
    if first is None:
        return None
    last = max(i for i, c in enumerate(classes) if c is not None)

    # Run-length encode the classified span; unclassified pixels inside the
    # span are treated as noise belonging to the current run.
    runs: list[list] = []  # [color, width]
    for i in range(first, last + 1):
        color = classes[i]
        if color is None:
            if runs:
                runs[-1][1] += 1
            continue
        if runs and runs[-1][0] is color:
            runs[-1][1] += 1
        else:
            runs.append([color, 1])

    total = last - first + 1
    module = total / STRIPE_COUNT
    stripes: list[Stripe] = []
    for color, run_width in runs:
        count = int(run_width / module + 0.5)
        if count < 1:
            return None
        stripes.extend([color] * count)
    if len(stripes) != STRIPE_COUNT:
        return None

    if tuple(stripes[:GUARD_WIDTH]) != GUARD or tuple(stripes[-GUARD_WIDTH:]) != GUARD:
        return None

    data = stripes[GUARD_WIDTH : GUARD_WIDTH + DATA_BITS]
    parity_stripes = stripes[GUARD_WIDTH + DATA_BITS : GUARD_WIDTH + DATA_BITS + PARITY_WIDTH]
    data_bits = [s.value for s in data]
    parity = (parity_stripes[0].value << 1) | parity_stripes[1].value
    if parity != sum(data_bits) % 4:
        return None

    object_id = 0
    for bit in data_bits:
        object_id = (object_id << 1) | bit
    return object_id


# --- PPM (P6) interchange -------------------------------------------------


def scanline_to_ppm(line: Scanline, height: int = 1) -> bytes:
    """Serialize a scanline as a binary PPM image, repeating the row ``height`` times."""
    if height < 1:
        raise ValueError("height must be >= 1")
    header = f"P6\n{line.width} {height}\n255\n".encode("ascii")
    row = b"".join(bytes(p) for p in line.pixels)
    return header + row * height


def _read_ppm_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Read whitespace/comment-separated integer header tokens; returns (values, offset)."""
    values: list[int] = []
    i = 0
    while len(values) < count:
        if i >= len(data):
            raise ValueError("truncated PPM header")
        c = data[i : i + 1]
        if c == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            token = data[i:j]
            if not token.isdigit():
                raise ValueError(f"malformed PPM header token {token!r}")
            values.append(int(token))
            i = j
    return values, i + 1  # single whitespace byte after the last header token


def ppm_to_scanlines(data: bytes) -> list[Scanline]:
    """Parse a binary PPM image into one Scanline per pixel row."""
    if not data.startswith(b"P6"):
        raise ValueError("not a binary PPM (P6) image")
    (width, height, maxval), offset = _read_ppm_tokens(data[2:], 3)
    offset += 2
    if maxval != 255:
        raise ValueError(f"unsupported PPM maxval {maxval}")
    needed = width * height * 3
    body = data[offset : offset + needed]
    if len(body) < needed:
        raise ValueError("truncated PPM pixel data")
    rows = []
    for y in range(height):
        row = body[y * width * 3 : (y + 1) * width * 3]
        pixels = tuple((row[x * 3], row[x * 3 + 1], row[x * 3 + 2]) for x in range(width))
        rows.append(Scanline(pixels))
    return rows


def decode_ppm(data: bytes) -> Optional[int]:
    """Decode the middle row of a PPM image; None when no valid code is present."""
    rows = ppm_to_scanlines(data)
    return decode_scanline(rows[len(rows) // 2])
