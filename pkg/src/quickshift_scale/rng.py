"""Counter-based Gaussian noise keyed by (seed, row, column, stream).

Every draw is a pure function of its key, so a crop of a generated image is
bit-identical to generating the crop directly, and per-pixel work can be
split across threads in any order.

Transform, fixed for reproducibility:

    h  = mix(mix(mix(mix(seed) + row*G) + col*G) + stream*G)      (uint64, wrapping)
    u  = ((h >> 11) + 1) * 2**-53                                  in (0, 1]
    z  = sqrt(-2 ln u_a) * cos(2 pi u_b)                           streams a=2k, b=2k+1

where ``mix`` is the SplitMix64 finalizer and G = 0x9E3779B97F4A7C15.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# stream ids; image channels use 2k / 2k+1 for k = 0, 1, 2
DENSITY_STREAM = 64


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_uniform(seed: int, rows, cols, stream: int) -> np.ndarray:
    """Uniforms in (0, 1] for broadcast ``rows`` x ``cols`` under ``stream``."""
    s = np.asarray([int(seed) & _MASK64], dtype=np.uint64)
    # negative coordinates wrap to their two's-complement image
    r = np.asarray(rows, dtype=np.int64).astype(np.uint64)
    c = np.asarray(cols, dtype=np.int64).astype(np.uint64)
    st = np.asarray([int(stream) & _MASK64], dtype=np.uint64)
    h = _mix(s)
    h = _mix(h + r * _GOLDEN)
    h = _mix(h + c * _GOLDEN)
    h = _mix(h + st * _GOLDEN)
    return ((h >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def normal_field(seed: int, rows, cols, stream: int = 0) -> np.ndarray:
    """Standard normals on the broadcast grid, one per (row, col)."""
    u1 = hash_uniform(seed, rows, cols, 2 * stream)
    u2 = hash_uniform(seed, rows, cols, 2 * stream + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def normal_image(seed: int, height: int, width: int, channels: int = 3,
                 origin: tuple[int, int] = (0, 0)) -> np.ndarray:
    """(height, width, channels) standard normals at global offset ``origin``."""
    rows = np.arange(origin[0], origin[0] + height)[:, None]
    cols = np.arange(origin[1], origin[1] + width)[None, :]
    out = np.empty((height, width, channels))
    for k in range(channels):
        out[:, :, k] = normal_field(seed, rows, cols, stream=k)
    return out


@dataclass(frozen=True)
class NoiseModel:
    """Tie-breaking noise added to density estimates."""

    seed: int = 0
    sigma0: float = 1e-5

    def draw(self, height: int, width: int, origin: tuple[int, int] = (0, 0)) -> np.ndarray:
        if self.sigma0 == 0:
            return np.zeros((height, width))
        rows = np.arange(origin[0], origin[0] + height)[:, None]
        cols = np.arange(origin[1], origin[1] + width)[None, :]
        return self.sigma0 * normal_field(self.seed, rows, cols, stream=DENSITY_STREAM)

    def at(self, rows, cols) -> np.ndarray:
        if self.sigma0 == 0:
            return np.zeros(np.broadcast(np.asarray(rows), np.asarray(cols)).shape)
        return self.sigma0 * normal_field(self.seed, rows, cols, stream=DENSITY_STREAM)


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial seed, independent of how trials are scheduled."""
    return (int(seed) ^ int(trial)) & _MASK64
