"""Kernel density estimate P, its main term Q and its Hajek projection.

All fields are unnormalised sums over the square window of radius
``k_w = ceil(3 k_s)`` clipped to the image, exactly as the reference
quickshift implementation computes them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .pixels import check_image
from .rng import NoiseModel

INF = math.inf


def kernel_width(k_s: float) -> int:
    return int(math.ceil(3.0 * k_s))


def parse_dm(value) -> float:
    """Accept a positive number or the strings ``inf``/``+inf``/``none``."""
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "+inf", "infinity", "none"):
            return INF
        value = float(value)
    value = float(value)
    if not value > 0:
        raise ValueError(f"max distance must be positive or inf, got {value}")
    return value


@dataclass(frozen=True)
class Hyperparams:
    k_s: float = 5.0
    d_m: float = 10.0
    ratio: float = 1.0
    sigma0: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if not self.k_s > 0:
            raise ValueError(f"k_s must be positive, got {self.k_s}")
        object.__setattr__(self, "d_m", parse_dm(self.d_m))
        if not self.ratio >= 0:
            raise ValueError(f"ratio must be non-negative, got {self.ratio}")
        if not self.sigma0 >= 0:
            raise ValueError(f"sigma0 must be non-negative, got {self.sigma0}")

    @property
    def k_w(self) -> int:
        return kernel_width(self.k_s)

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(seed=self.seed, sigma0=self.sigma0)

    def as_dict(self) -> dict:
        return {"k_s": self.k_s, "d_m": "inf" if math.isinf(self.d_m) else self.d_m,
                "k_w": self.k_w, "ratio": self.ratio, "sigma0": self.sigma0,
                "seed": self.seed}


# ---------------------------------------------------------------------------
# deterministic weights

def window(i: int, j: int, H: int, W: int, k_w: int) -> list[tuple[int, int]]:
    """In-bounds points of the Chebyshev ball of radius ``k_w``, row-major."""
    return [(u, v)
            for u in range(max(0, i - k_w), min(H, i + k_w + 1))
            for v in range(max(0, j - k_w), min(W, j + k_w + 1))]


def spatial_weight(i: int, j: int, u: int, v: int, k_s: float) -> float:
    return math.exp(-((i - u) ** 2 + (j - v) ** 2) / (2.0 * k_s * k_s))


def _band(n: int, k_s: float, k_w: int, power: int = 1) -> np.ndarray:
    """(n, n) matrix of 1-D Gaussian weights restricted to |a - b| <= k_w."""
    idx = np.arange(n)
    off = idx[:, None] - idx[None, :]
    m = np.exp(-power * off.astype(np.float64) ** 2 / (2.0 * k_s * k_s))
    m[np.abs(off) > k_w] = 0.0
    return m


def delta_field(shape, k_s: float, k_w: int | None = None, power: int = 1) -> np.ndarray:
    """Sum of ``delta**power`` over every pixel's window (Delta for power=1)."""
    H, W = int(shape[0]), int(shape[1])
    k_w = kernel_width(k_s) if k_w is None else k_w
    rows = _band(H, k_s, k_w, power).sum(axis=1)
    cols = _band(W, k_s, k_w, power).sum(axis=1)
    return np.outer(rows, cols)


def delta_sum(i: int, j: int, shape, k_s: float, k_w: int | None = None) -> float:
    k_w = kernel_width(k_s) if k_w is None else k_w
    H, W = int(shape[0]), int(shape[1])
    r = sum(math.exp(-(i - u) ** 2 / (2 * k_s * k_s))
            for u in range(max(0, i - k_w), min(H, i + k_w + 1)))
    c = sum(math.exp(-(j - v) ** 2 / (2 * k_s * k_s))
            for v in range(max(0, j - k_w), min(W, j + k_w + 1)))
    return r * c


def norm_constant(p: float, k_s: float, sigma: float) -> float:
    """C_p = (k_s^2 / (k_s^2 + p sigma^2))^(3/2)."""
    if p < 1 or sigma < 0:
        raise ValueError("norm_constant needs p >= 1 and sigma >= 0")
    return (k_s * k_s / (k_s * k_s + p * sigma * sigma)) ** 1.5


# ---------------------------------------------------------------------------
# density estimates

def _scaled(image: np.ndarray, ratio: float) -> np.ndarray:
    image = check_image(image)
    return np.ascontiguousarray(np.asarray(image, dtype=np.float64) * ratio)


def density_P(image: np.ndarray, hp: Hyperparams, noise: NoiseModel | None = None,
              origin: tuple[int, int] = (0, 0)) -> np.ndarray:
    """Quickshift density estimate plus counter-based tie-break noise.

    ``noise`` defaults to ``hp.noise``; ``origin`` places the image inside a
    larger global grid so the noise of a crop matches the full image.
    """
    img = _scaled(image, hp.ratio)
    field = _kernels.density_field(img, float(hp.k_s), hp.k_w)
    noise = hp.noise if noise is None else noise
    if noise.sigma0:
        field = field + noise.draw(img.shape[0], img.shape[1], origin)
    return field


def density_P_at(image: np.ndarray, pixels, hp: Hyperparams,
                 noise: NoiseModel | None = None,
                 origin: tuple[int, int] = (0, 0)) -> np.ndarray:
    """Density estimate evaluated only at ``pixels`` (sequence of (i, j))."""
    img = _scaled(image, hp.ratio)
    pix = np.asarray(pixels, dtype=np.int64).reshape(-1, 2)
    vals = _kernels.density_at(img, float(hp.k_s), hp.k_w,
                               np.ascontiguousarray(pix[:, 0]),
                               np.ascontiguousarray(pix[:, 1]))
    noise = hp.noise if noise is None else noise
    if noise.sigma0:
        vals = vals + noise.at(pix[:, 0] + origin[0], pix[:, 1] + origin[1])
    return vals


def _main_kernel(image: np.ndarray, k_s: float, sigma: float, c) -> np.ndarray:
    image = check_image(image)
    dist2 = np.sum((np.asarray(image, dtype=np.float64) - np.asarray(c, dtype=np.float64)) ** 2,
                   axis=-1)
    return np.exp(-dist2 / (2.0 * (k_s * k_s + sigma * sigma)))


def density_Q(image: np.ndarray, k_s: float, sigma: float, c,
              k_w: int | None = None) -> np.ndarray:
    """Conditional expectation of P given the centre pixel, under the flat model."""
    g = _main_kernel(image, k_s, sigma, c)
    return norm_constant(1, k_s, sigma) * g * delta_field(g.shape, k_s, k_w)


def hajek_projection(image: np.ndarray, k_s: float, sigma: float, c,
                     k_w: int | None = None) -> np.ndarray:
    """Projection of P onto sums of functions of single pixels (flat model)."""
    k_w = kernel_width(k_s) if k_w is None else k_w
    g = _main_kernel(image, k_s, sigma, c)
    H, W = g.shape
    s2 = k_s * k_s + sigma * sigma
    centred = g - (s2 / (s2 + sigma * sigma)) ** 1.5
    # separable window-weighted sum, then drop the centre term
    smoothed = _band(H, k_s, k_w) @ centred @ _band(W, k_s, k_w).T
    C1 = norm_constant(1, k_s, sigma)
    return C1 * g * delta_field((H, W), k_s, k_w) + C1 * (smoothed - centred)


def estimate_color(image: np.ndarray, region=None) -> np.ndarray:
    """Mean CIELAB colour of ``region`` (whole image by default)."""
    image = check_image(image)
    if region is not None:
        image = image[region.slices]
    return image.reshape(-1, 3).mean(axis=0)
