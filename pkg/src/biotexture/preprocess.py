"""Channel splitting, gray conversion and the two enhancement filters.

Both filters use border replication and return ``uint8`` images.  The unsharp
mask convolves with an integer-quantized Gaussian so the blur is exact; that
makes it bit-for-bit equivariant under every 90-degree rotation and flip.
"""

from __future__ import annotations

import numpy as np

from .ecosystem import InvalidInputError, as_gray, as_rgb

# Fixed-point scale of the quantized Gaussian taps.
_KERNEL_SCALE = 1 << 16

# (dy, dx) of the four Crimmins directions: N-S, E-W, NW-SE, NE-SW.
CRIMMINS_DIRECTIONS = ((1, 0), (0, 1), (1, 1), (1, -1))


def split_channels(image) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rgb = as_rgb(image)
    return rgb[:, :, 0].copy(), rgb[:, :, 1].copy(), rgb[:, :, 2].copy()


def merge_channels(r, g, b) -> np.ndarray:
    return np.stack([as_gray(r), as_gray(g), as_gray(b)], axis=-1)


def to_gray(image) -> np.ndarray:
    """Luminance ``0.299 r + 0.587 g + 0.114 b`` rounded half up."""
    rgb = as_rgb(image).astype(np.int32)
    # Integer weights in thousandths keep the half-up rounding exact.
    acc = 299 * rgb[:, :, 0] + 587 * rgb[:, :, 1] + 114 * rgb[:, :, 2]
    return np.clip((acc + 500) // 1000, 0, 255).astype(np.uint8)


def gaussian_taps(radius: float) -> np.ndarray:
    """Integer Gaussian taps (sigma = radius, truncated at 4 sigma)."""
    if not radius > 0:
        raise InvalidInputError("radius must be positive")
    half = int(4.0 * radius + 0.5)
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / radius) ** 2)
    taps = np.rint(g / g.sum() * _KERNEL_SCALE).astype(np.int64)
    # Enforce exact symmetry after rounding.
    return np.maximum(taps, taps[::-1])


def _blur_numerator(image: np.ndarray, taps: np.ndarray) -> np.ndarray:
    half = taps.size // 2
    h, w = image.shape
    padded = np.pad(image.astype(np.int64), half, mode="edge")
    rows = np.zeros((h + 2 * half, w), dtype=np.int64)
    for k, t in enumerate(taps):
        rows += t * padded[:, k : k + w]
    out = np.zeros((h, w), dtype=np.int64)
    for k, t in enumerate(taps):
        out += t * rows[k : k + h, :]
    return out


def gaussian_blur(image, radius: float) -> np.ndarray:
    """Float Gaussian blur with border replication (quantized kernel)."""
    img = as_gray(image)
    taps = gaussian_taps(radius)
    norm = int(taps.sum()) ** 2
    return _blur_numerator(img, taps) / norm


def unsharp(image, radius: float = 1.0, amount: float = 1.0) -> np.ndarray:
    """Unsharp mask: ``clamp(round(in + amount * (in - blur(in))))``."""
    if not amount > 0:
        raise InvalidInputError("amount must be positive")
    img = as_gray(image)
    taps = gaussian_taps(radius)
    norm = int(taps.sum()) ** 2
    # in - blur as an exact integer numerator over norm
    detail = img.astype(np.int64) * norm - _blur_numerator(img, taps)
    sharpened = img + amount * (detail / norm)
    return np.clip(np.floor(sharpened + 0.5), 0, 255).astype(np.uint8)


def _neighbors(img: np.ndarray, dy: int, dx: int) -> tuple[np.ndarray, np.ndarray]:
    """Neighbors on both sides of each pixel along (dy, dx), edges replicated."""
    h, w = img.shape
    p = np.pad(img, 1, mode="edge")
    before = p[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w]
    after = p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
    return before, after


def _classic_rules(b, a, c, dark: bool):
    if dark:
        return (a >= b + 2, (a > b) & (b <= c), (c > b) & (b <= a), c >= b + 2)
    return (a <= b - 2, (a < b) & (b >= c), (c < b) & (b >= a), c <= b - 2)


def _crimmins_classic(img: np.ndarray) -> np.ndarray:
    b = img.astype(np.int16)
    for dark in (True, False):
        step = 1 if dark else -1
        for dy, dx in CRIMMINS_DIRECTIONS:
            for rule in range(4):
                a, c = _neighbors(b, dy, dx)
                b = b + step * _classic_rules(b, a, c, dark)[rule]
    return b


def _crimmins_symmetric(img: np.ndarray) -> np.ndarray:
    b = img.astype(np.int16)
    for dark in (True, False):
        step = 1 if dark else -1
        for _ in CRIMMINS_DIRECTIONS:
            for stage in ("far", "near", "near", "far"):
                fire = np.zeros(b.shape, dtype=bool)
                for dy, dx in CRIMMINS_DIRECTIONS:
                    a, c = _neighbors(b, dy, dx)
                    lo, hi = np.minimum(a, c), np.maximum(a, c)
                    if stage == "far":
                        fire |= (hi >= b + 2) if dark else (lo <= b - 2)
                    elif dark:
                        fire |= (b <= lo) & (b < hi)
                    else:
                        fire |= (b >= hi) & (b > lo)
                b = b + step * fire
    return b


def crimmins(image, iterations: int = 1, schedule: str = "symmetric") -> np.ndarray:
    """Crimmins complementary-hulling speckle removal.

    ``schedule="classic"`` runs the published order: the dark-pixel pass over
    the four directions (four rules each), then the light-pixel pass.  Its
    result depends on image orientation.

    ``schedule="symmetric"`` (the default) has the same budget of unit
    adjustments but evaluates all directions at once and merges each rule
    with its mirror image (rules 1/4 become "far", rules 2/3 "near").  The
    output is then exactly equivariant under rotations by 90 degrees and
    flips, which the descriptor relies on.
    """
    if int(iterations) != iterations or iterations < 1:
        raise InvalidInputError("iterations must be a positive integer")
    img = as_gray(image)
    if schedule == "classic":
        step = _crimmins_classic
    elif schedule == "symmetric":
        step = _crimmins_symmetric
    else:
        raise InvalidInputError(f"unknown Crimmins schedule {schedule!r}")
    out = img
    for _ in range(int(iterations)):
        out = np.clip(step(out), 0, 255).astype(np.uint8)
    return out

