"""Images as ecosystems: gray levels are species, pixels are individuals.

Gray images are 2-D ``uint8`` arrays (height, width) and RGB images are
3-D ``uint8`` arrays (height, width, 3); both are row-major.  Everything an
index needs from an image is captured by its :class:`SpeciesHistogram`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

MAX_LEVEL = 255
MIN_SIDE = 2


class InvalidInputError(ValueError):
    """Raised when an image, histogram or table violates a precondition."""


def as_gray(image) -> np.ndarray:
    """Validate ``image`` as a gray image and return it as ``uint8``."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise InvalidInputError(f"gray image must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInputError("image is empty")
    return _as_levels(arr)


def as_rgb(image) -> np.ndarray:
    """Validate ``image`` as an RGB image and return it as ``uint8``."""
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidInputError(f"RGB image must have shape (h, w, 3), got {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidInputError("image is empty")
    return _as_levels(arr)


def _as_levels(arr: np.ndarray) -> np.ndarray:
    if arr.dtype == np.uint8:
        return arr
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise InvalidInputError("intensities must be integers in [0, 255]")
    elif arr.dtype.kind not in "iub":
        raise InvalidInputError(f"unsupported pixel dtype {arr.dtype}")
    if arr.min() < 0 or arr.max() > MAX_LEVEL:
        raise InvalidInputError("intensities must lie in [0, 255]")
    return arr.astype(np.uint8)


def check_min_size(image: np.ndarray) -> None:
    h, w = image.shape[:2]
    if h < MIN_SIDE or w < MIN_SIDE:
        raise InvalidInputError(f"image must be at least {MIN_SIDE}x{MIN_SIDE}, got {h}x{w}")


@dataclass(frozen=True, eq=False)
class SpeciesHistogram:
    """Sparse gray-level histogram: present levels (ascending) and their counts."""

    levels: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        levels = np.array(self.levels, dtype=np.int64).reshape(-1)
        counts = np.array(self.counts, dtype=np.int64).reshape(-1)
        if levels.size == 0:
            raise InvalidInputError("histogram has no species")
        if levels.shape != counts.shape:
            raise InvalidInputError("levels and counts differ in length")
        if levels[0] < 0 or levels[-1] > MAX_LEVEL or np.any(np.diff(levels) <= 0):
            raise InvalidInputError("levels must be strictly increasing within [0, 255]")
        if np.any(counts < 1):
            raise InvalidInputError("every species needs at least one individual")
        levels.flags.writeable = False
        counts.flags.writeable = False
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "SpeciesHistogram":
        pairs = sorted(pairs)
        return cls([p[0] for p in pairs], [p[1] for p in pairs])

    @property
    def entries(self) -> list[tuple[int, int]]:
        return [(int(l), int(c)) for l, c in zip(self.levels, self.counts)]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def richness(self) -> int:
        return int(self.levels.size)

    @property
    def max_count(self) -> int:
        return int(self.counts.max())

    def expand(self) -> np.ndarray:
        """Pixel multiset (sorted) that this histogram describes."""
        return np.repeat(self.levels, self.counts).astype(np.uint8)

    def __eq__(self, other):
        if not isinstance(other, SpeciesHistogram):
            return NotImplemented
        return np.array_equal(self.levels, other.levels) and np.array_equal(
            self.counts, other.counts
        )

    def __hash__(self):
        return hash((self.levels.tobytes(), self.counts.tobytes()))

    def __repr__(self):
        return f"SpeciesHistogram(entries={self.entries}, total={self.total})"


def build_histogram(image) -> SpeciesHistogram:
    """Histogram of the distinct gray levels in ``image`` (any shape of levels)."""
    arr = np.asarray(image)
    if arr.size == 0:
        raise InvalidInputError("image is empty")
    arr = _as_levels(arr)
    full = np.bincount(arr.ravel(), minlength=MAX_LEVEL + 1)
    levels = np.flatnonzero(full)
    return SpeciesHistogram(levels, full[levels])


def richness(hist: SpeciesHistogram) -> int:
    return hist.richness
