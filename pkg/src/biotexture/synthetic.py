"""Seeded synthetic RGB textures for desk-scale experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TextureClass:
    name: str
    noise_sigma: float
    period: float  # pixels per cycle of the periodic pattern


DEFAULT_CLASSES = (
    TextureClass("calm_wide", noise_sigma=6.0, period=24.0),
    TextureClass("calm_fine", noise_sigma=6.0, period=5.0),
    TextureClass("noisy_wide", noise_sigma=30.0, period=24.0),
    TextureClass("noisy_fine", noise_sigma=30.0, period=5.0),
)


def texture(cls: TextureClass, size: int, rng: np.random.Generator, rotate: bool = True) -> np.ndarray:
    """One RGB texture: an oriented sinusoid plus Gaussian noise, random phase.

    With ``rotate`` the result is turned by a random multiple of 90 degrees.
    """
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    theta = rng.uniform(0, np.pi / 4)
    phase = rng.uniform(0, 2 * np.pi)
    wave = np.sin(2 * np.pi * (x * np.cos(theta) + y * np.sin(theta)) / cls.period + phase)
    tint = np.array([1.0, 0.85, 0.7]) * rng.uniform(0.9, 1.1, size=3)
    base = 128 + 70 * wave[..., None] * tint
    img = base + rng.normal(0, cls.noise_sigma, size=(size, size, 3))
    img = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    if rotate:
        img = np.rot90(img, int(rng.integers(4))).copy()
    return img


def texture_dataset(per_class: int = 40, size: int = 64, seed: int = 0, classes=DEFAULT_CLASSES):
    """Return (images, labels, sample_ids) with ``per_class`` images of each class."""
    rng = np.random.default_rng(seed)
    images, labels, ids = [], [], []
    for cls in classes:
        for i in range(per_class):
            images.append(texture(cls, size, rng))
            labels.append(cls.name)
            ids.append(f"{cls.name}/{i:04d}")
    return images, labels, ids


def smooth_gradient(size: int = 128, seed: int = 0) -> np.ndarray:
    """A smooth RGB image built from low-frequency ramps (no noise)."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64) / (size - 1)
    channels = []
    for _ in range(3):
        a, b = rng.uniform(0.2, 1.0, size=2)
        c = rng.uniform(0, 0.3)
        ramp = a * x + b * y + c * np.sin(np.pi * x) * np.sin(np.pi * y)
        ramp = (ramp - ramp.min()) / (ramp.max() - ramp.min())
        channels.append(255 * ramp)
    return np.clip(np.rint(np.stack(channels, axis=-1)), 0, 255).astype(np.uint8)
