"""Closed-form predictions for quickshift on flat and bicolor images.

Covers the variance helpers psi_1 / psi_2, the lookout-set areas (circle
segment, rounded square), exact lattice counts, the expected number of local
maxima of an i.i.d. field (exact and leading-order), and the first two
moments of the density estimate under the flat and bicolor noise models.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .density import delta_field, delta_sum, kernel_width, norm_constant, parse_dm
from .graph import shape_case
from .pixels import Region


# Both are differences of nearly equal powers near t = 0. Below _SERIES_T the
# Taylor expansion (exact rational coefficients, t^2 .. t^9) is used; above it
# the log1p / expm1 form keeps full relative precision.
_SERIES_T = 1e-3
_PSI1_SERIES = (6.0, -60.0, 390.0, -2100.0, 10220.0, -46872.0, 207270.0, -895620.0)
_PSI2_SERIES = (1.5, -15.0, 735 / 8, -1785 / 4, 30275 / 16, -58779 / 8, 3437595 / 128,
                -6017385 / 64)


def _series(t, coeffs):
    acc = np.zeros_like(t)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc * t * t


def psi1(t):
    """(1 + 4t)^(-3/2) - (1 + 2t)^(-3)."""
    t = np.asarray(t, dtype=np.float64)
    b = -3.0 * np.log1p(2.0 * t)
    direct = np.exp(b) * np.expm1(-1.5 * np.log1p(4.0 * t) - b)
    return np.where(t < _SERIES_T, _series(t, _PSI1_SERIES), direct)


def psi2(t):
    """(1 + t)^(-3/2) (1 + 3t)^(-3/2) - (1 + 2t)^(-3)."""
    t = np.asarray(t, dtype=np.float64)
    b = -3.0 * np.log1p(2.0 * t)
    direct = np.exp(b) * np.expm1(-1.5 * (np.log1p(t) + np.log1p(3.0 * t)) - b)
    return np.where(t < _SERIES_T, _series(t, _PSI2_SERIES), direct)


# ---------------------------------------------------------------------------
# areas and lattice counts

def circle_segment_area(s: float, d: float) -> float:
    """Area of the disk of radius ``d`` beyond the line at distance ``s``."""
    if not 0 < s <= d:
        raise ValueError(f"circle segment needs 0 < s <= d, got s={s}, d={d}")
    r = math.sqrt(d * d - s * s)
    return d * d * math.atan(r / s) - s * r


def rounded_square_area(s: float, d: float) -> float:
    """Area of the square of half-side ``s`` intersected with the disk of radius ``d``."""
    if not (s > 0 and s <= d <= math.sqrt(2.0) * s * (1 + 1e-12)):
        raise ValueError(f"rounded square needs s <= d <= sqrt(2) s, got s={s}, d={d}")
    d = min(d, math.sqrt(2.0) * s)
    return math.pi * d * d - 4.0 * circle_segment_area(s, d)


def rounded_square_approx(s: float, d: float) -> float:
    return math.pi * (3.0 * s * d - s * s - d * d)


def lookout_area(k_w: float, d_m: float) -> float:
    """Continuous area of the lookout set for the matching shape case."""
    d_m = parse_dm(d_m)
    case = shape_case(k_w, d_m)
    if case == "disk":
        return math.pi * d_m * d_m
    if case == "rounded-square":
        return rounded_square_area(k_w, d_m)
    return 4.0 * k_w * k_w


def _offset_mask(k_w: int, d_m: float) -> np.ndarray:
    a = np.arange(-k_w, k_w + 1)
    return np.sqrt(a[:, None] ** 2 + a[None, :] ** 2) <= d_m


def lattice_count(k_w: int, d_m: float, at: tuple[int, int, int, int] | None = None) -> int:
    """Points of the lookout set, optionally clipped for pixel (i, j) of an H x W image.

    ``at`` is ``(i, j, H, W)``. The centre is always counted.
    """
    mask = _offset_mask(int(k_w), parse_dm(d_m))
    if at is None:
        return int(mask.sum())
    i, j, H, W = at
    a = np.arange(-k_w, k_w + 1)
    rows = (i + a >= 0) & (i + a < H)
    cols = (j + a >= 0) & (j + a < W)
    return int(mask[np.ix_(rows, cols)].sum())


def lattice_count_field(shape, k_w: int, d_m: float) -> np.ndarray:
    """Border-aware lookout-set size of every pixel."""
    H, W = int(shape[0]), int(shape[1])
    mask = _offset_mask(int(k_w), parse_dm(d_m)).astype(np.float64)
    a = np.arange(-k_w, k_w + 1)
    R = ((np.arange(H)[:, None] + a[None, :] >= 0)
         & (np.arange(H)[:, None] + a[None, :] < H)).astype(np.float64)
    C = ((np.arange(W)[:, None] + a[None, :] >= 0)
         & (np.arange(W)[:, None] + a[None, :] < W)).astype(np.float64)
    return np.rint(R @ mask @ C.T).astype(np.int64)


# ---------------------------------------------------------------------------
# expected number of local maxima

@dataclass
class Prediction:
    expected: float
    method: str  # "exact-lattice" or "asymptotic"
    case: str
    k_w: float
    d_m: float
    h: int
    w: int

    def to_dict(self) -> dict:
        return {"expected": self.expected, "method": self.method, "case": self.case,
                "k_w": self.k_w, "d_m": "inf" if math.isinf(self.d_m) else self.d_m,
                "h": self.h, "w": self.w}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def expected_local_maxima_exact(region: Region, shape, k_w: int, d_m: float) -> float:
    """Sum of 1/|E_ij| over the region: exact for any i.i.d. continuous field."""
    region.check(shape)
    if region.area == 0:
        return 0.0
    counts = lattice_count_field(shape, k_w, d_m)[region.slices]
    return float(np.sum(1.0 / counts))


def predict_exact(region: Region, shape, k_w: int, d_m: float) -> Prediction:
    d_m = parse_dm(d_m)
    return Prediction(expected_local_maxima_exact(region, shape, k_w, d_m), "exact-lattice",
                      shape_case(k_w, d_m), k_w, d_m, region.height, region.width)


def expected_local_maxima_asymptotic(h: float, w: float, k_w: float, d_m: float) -> Prediction:
    """Leading-order count for an interior h x w rectangle."""
    d_m = parse_dm(d_m)
    case = shape_case(k_w, d_m)
    if case == "disk":
        denom = math.pi * d_m * d_m
    elif case == "rounded-square":
        denom = rounded_square_approx(k_w, d_m)
    else:
        denom = 4.0 * k_w * k_w
    return Prediction(h * w / denom, "asymptotic", case, k_w, d_m, h, w)


# ---------------------------------------------------------------------------
# density moments under the noise models

def expected_density_flat(i: int, j: int, shape, k_s: float, sigma: float,
                          center_exact: bool = False) -> float:
    """E[P_ij] on a flat patch: C_2 * Delta_ij.

    The centre pixel always contributes exactly 1; ``center_exact`` accounts
    for that, giving ``1 + C_2 (Delta_ij - 1)``.
    """
    D = delta_sum(i, j, shape, k_s)
    C2 = norm_constant(2, k_s, sigma)
    return 1.0 + C2 * (D - 1.0) if center_exact else C2 * D


def variance_density_flat(i: int, j: int, shape, k_s: float, sigma: float,
                          sigma0: float = 0.0, center_exact: bool = False) -> float:
    """Var[P_ij] on a flat patch from the psi covariance structure."""
    k_w = kernel_width(k_s)
    D = delta_sum(i, j, shape, k_s)
    S = float(delta_field(shape, k_s, k_w, power=2)[i, j])
    if center_exact:
        D, S = D - 1.0, S - 1.0
    t = sigma * sigma / (k_s * k_s)
    return float(psi2(t) * (D * D - S) + psi1(t) * S + sigma0 * sigma0)


def _split_window_sums(i, j, j0, shape, k_s):
    """Delta restricted to the left (columns < j0) and right parts of the window."""
    H, W = int(shape[0]), int(shape[1])
    k_w = kernel_width(k_s)
    inv = 1.0 / (2.0 * k_s * k_s)
    rows = sum(math.exp(-(i - u) ** 2 * inv)
               for u in range(max(0, i - k_w), min(H, i + k_w + 1)))
    left = right = 0.0
    for v in range(max(0, j - k_w), min(W, j + k_w + 1)):
        wgt = math.exp(-(j - v) ** 2 * inv)
        if v < j0:
            left += wgt
        else:
            right += wgt
    return rows * left, rows * right


def expected_density_bicolor(i: int, j: int, j0: int, shape, k_s: float, sigma: float,
                             color_gap: float, center_exact: bool = False) -> float:
    """E[P_ij] for a left-patch pixel of a bicolor image.

    ``j0`` is the number of left-patch columns (0-based columns ``< j0``);
    ``color_gap`` is ||c1 - c2||.
    """
    if j >= j0:
        raise ValueError("expected_density_bicolor takes a pixel of the left patch")
    left, right = _split_window_sums(i, j, j0, shape, k_s)
    C2 = norm_constant(2, k_s, sigma)
    cross = math.exp(-color_gap ** 2 / (2.0 * (k_s * k_s + 2.0 * sigma * sigma)))
    if center_exact:
        return 1.0 + C2 * (left - 1.0 + cross * right)
    return C2 * (left + cross * right)


def bicolor_gap(i: int, j: int, j0: int, shape, k_s: float, sigma: float,
                color_gap: float) -> float:
    """E[P_ij] - E[P_i,j+1] for two left-patch pixels."""
    return (expected_density_bicolor(i, j, j0, shape, k_s, sigma, color_gap)
            - expected_density_bicolor(i, j + 1, j0, shape, k_s, sigma, color_gap))


def pq_tail_bound(sigma: float, eps: float) -> float:
    return 71.0 * sigma * sigma / (eps * eps)


def bicolor_probability_bound(sigma: float) -> float:
    return 1.0 - 16.0 * sigma * sigma


def variance_upper_bound(sigma: float) -> float:
    return 107.0 * sigma ** 4


def variance_lower_bound(Delta: float, k_s: float, sigma: float) -> float:
    return sigma ** 4 * Delta * Delta / k_s ** 4
