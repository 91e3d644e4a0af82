"""The 56-value BiT vector: 14 indices on the composite gray image and on R, G, B."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .biodiversity import BIODIVERSITY_NAMES, biodiversity_indices
from .ecosystem import as_rgb, build_histogram, check_min_size
from .preprocess import crimmins, split_channels, to_gray, unsharp
from .taxonomy import TAXONOMIC_NAMES, taxonomic_indices

CHANNELS = ("gray", "r", "g", "b")
INDEX_NAMES = BIODIVERSITY_NAMES + TAXONOMIC_NAMES
N_INDICES = len(INDEX_NAMES)

# Indices that stay put when an image is resampled.
SCALE_ROBUST = ("d_sw", "delta_star", "e_iq", "d_nn")


@dataclass(frozen=True)
class ExtractOptions:
    preprocess_enabled: bool = True
    unsharp_radius: float = 1.0
    unsharp_amount: float = 1.0
    crimmins_iterations: int = 1
    crimmins_schedule: str = "symmetric"
    gray_only: bool = False


def feature_names(gray_only: bool = False) -> tuple[str, ...]:
    channels = CHANNELS[:1] if gray_only else CHANNELS
    return tuple(f"{c}_{i}" for c in channels for i in INDEX_NAMES)


@dataclass(frozen=True, eq=False)
class BiTVector:
    values: np.ndarray
    names: tuple[str, ...]
    flags: tuple[str, ...] = ()

    def __len__(self):
        return len(self.names)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, (float(v) for v in self.values)))


def index_values(gray: np.ndarray) -> tuple[tuple[float, ...], tuple[str, ...]]:
    """The 14 indices of one gray image, biodiversity first."""
    hist = build_histogram(gray)
    bio = biodiversity_indices(hist)
    tax = taxonomic_indices(hist)
    return bio.values() + tax.values(), bio.flags + tax.flags


def channel_images(image, opts: ExtractOptions = ExtractOptions()) -> dict[str, np.ndarray]:
    """The (optionally preprocessed) gray images the indices are computed on.

    Unsharp masking goes on the R, G, B planes and Crimmins on the composite
    gray image, which is built from the unfiltered RGB input.
    """
    rgb = as_rgb(image)
    gray = to_gray(rgb)
    if opts.preprocess_enabled:
        gray = crimmins(gray, opts.crimmins_iterations, opts.crimmins_schedule)
    out = {"gray": gray}
    if opts.gray_only:
        return out
    for name, plane in zip(CHANNELS[1:], split_channels(rgb)):
        if opts.preprocess_enabled:
            plane = unsharp(plane, opts.unsharp_radius, opts.unsharp_amount)
        out[name] = plane
    return out


def extract(image, opts: ExtractOptions = ExtractOptions()) -> BiTVector:
    rgb = as_rgb(image)
    check_min_size(rgb)
    images = channel_images(rgb, opts)
    values, flags = [], []
    for channel, gray in images.items():
        v, f = index_values(gray)
        values.extend(v)
        flags.extend(f"{channel}:{x}" for x in f)
    vec = np.array(values, dtype=np.float64)
    assert np.all(np.isfinite(vec)), "descriptor produced a non-finite value"
    return BiTVector(vec, feature_names(opts.gray_only), tuple(flags))
