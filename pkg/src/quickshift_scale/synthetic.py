"""Seeded flat and bicolor CIELAB images.

Pixel noise comes from :func:`rng.normal_image`, so it depends only on
``(seed, i, j)`` and a crop generated at ``origin`` equals the matching slice
of the full image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rng import normal_image


def _color(c) -> tuple[float, float, float]:
    c = tuple(float(x) for x in c)
    if len(c) != 3:
        raise ValueError(f"colour must have 3 components, got {len(c)}")
    return c


@dataclass(frozen=True)
class FlatModel:
    height: int
    width: int
    c: tuple = (50.0, 0.0, 0.0)
    sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("image dimensions must be positive")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        object.__setattr__(self, "c", _color(self.c))


@dataclass(frozen=True)
class BicolorModel:
    """Columns ``< j0`` are around ``c1``, the rest around ``c2``."""

    height: int
    width: int
    j0: int
    c1: tuple = (50.0, 0.0, 0.0)
    c2: tuple = (65.0, 0.0, 0.0)
    sigma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError("image dimensions must be positive")
        if not 1 <= self.j0 < self.width:
            raise ValueError(f"j0 must satisfy 1 <= j0 < width, got j0={self.j0}, width={self.width}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        object.__setattr__(self, "c1", _color(self.c1))
        object.__setattr__(self, "c2", _color(self.c2))

    @property
    def color_gap(self) -> float:
        return float(np.linalg.norm(np.subtract(self.c1, self.c2)))


def _crop_shape(model, shape):
    return (model.height, model.width) if shape is None else (int(shape[0]), int(shape[1]))


def flat_image(model: FlatModel, origin: tuple[int, int] = (0, 0), shape=None) -> np.ndarray:
    """Full image, or the ``shape`` crop whose top-left pixel is ``origin``."""
    h, w = _crop_shape(model, shape)
    noise = normal_image(model.seed, h, w, 3, origin)
    return np.asarray(model.c) + model.sigma * noise


def bicolor_image(model: BicolorModel, origin: tuple[int, int] = (0, 0), shape=None) -> np.ndarray:
    """Like :func:`flat_image`; ``j0`` is a column of the full image."""
    h, w = _crop_shape(model, shape)
    noise = normal_image(model.seed, h, w, 3, origin)
    cols = np.arange(origin[1], origin[1] + w)
    base = np.where((cols < model.j0)[None, :, None], np.asarray(model.c1), np.asarray(model.c2))
    return base + model.sigma * noise
