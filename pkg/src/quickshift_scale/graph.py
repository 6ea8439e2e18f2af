"""Quickshift parent graphs, connected components and local-maximum counts.

Two constructions are provided:

* :func:`build_graph_original` links each pixel to the nearest pixel of higher
  density inside its square window, nearest in joint (position, colour) space,
  and drops links longer than ``d_m``.
* :func:`build_graph_simplified` ignores colour: the candidate set is the
  lookout set ``E`` (square window intersected with the disk of radius
  ``d_m``) and the parent is the spatially closest higher pixel in ``E``.

Roots have no parent (stored as ``-1``). Distance ties resolve to the
candidate with the smallest row-major index.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .density import Hyperparams, parse_dm
from .pixels import LabelMap, Region, check_image


@dataclass
class ParentGraph:
    parent: np.ndarray  # (H*W,) flat parent index, -1 for roots
    height: int
    width: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    @property
    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent < 0)

    def parent_of(self, i: int, j: int) -> tuple[int, int] | None:
        p = int(self.parent[i * self.width + j])
        return None if p < 0 else divmod(p, self.width)

    def edges(self) -> np.ndarray:
        """(n, 4) array of (i, j, pu, pv), roots as (i, j, -1, -1)."""
        idx = np.arange(self.parent.size)
        i, j = np.divmod(idx, self.width)
        pu, pv = np.divmod(self.parent, self.width)
        pu = np.where(self.parent < 0, -1, pu)
        pv = np.where(self.parent < 0, -1, pv)
        return np.column_stack([i, j, pu, pv])

    def save_csv(self, path: str | os.PathLike) -> None:
        np.savetxt(path, self.edges(), fmt="%d", delimiter=",",
                   header="i,j,pu,pv", comments="")


def shape_case(k_w: float, d_m: float) -> str:
    """Which shape the lookout set takes: disk, rounded-square or square."""
    d_m = parse_dm(d_m)
    if d_m <= k_w:
        return "disk"
    if d_m <= math.sqrt(2.0) * k_w:
        return "rounded-square"
    return "square"


@dataclass(frozen=True)
class NeighborhoodSpec:
    k_w: int
    d_m: float

    @property
    def shape(self) -> str:
        return shape_case(self.k_w, self.d_m)


def _in_disk(a: int, b: int, d_m: float) -> bool:
    return math.sqrt(a * a + b * b) <= d_m


@lru_cache(maxsize=64)
def lookout_offsets(k_w: int, d_m: float) -> tuple[np.ndarray, np.ndarray]:
    """Non-zero offsets of E sorted by (distance, du, dv)."""
    offs = [(a * a + b * b, a, b)
            for a in range(-k_w, k_w + 1)
            for b in range(-k_w, k_w + 1)
            if (a or b) and _in_disk(a, b, d_m)]
    offs.sort()
    du = np.array([o[1] for o in offs], dtype=np.int64)
    dv = np.array([o[2] for o in offs], dtype=np.int64)
    du.setflags(write=False)
    dv.setflags(write=False)
    return du, dv


def neighborhood_E(i: int, j: int, shape, k_w: int, d_m: float) -> list[tuple[int, int]]:
    """In-bounds lookout set of (i, j), row-major, including (i, j) itself."""
    H, W = int(shape[0]), int(shape[1])
    d_m = parse_dm(d_m)
    return [(u, v)
            for u in range(max(0, i - k_w), min(H, i + k_w + 1))
            for v in range(max(0, j - k_w), min(W, j + k_w + 1))
            if _in_disk(u - i, v - j, d_m)]


def build_graph_original(image: np.ndarray, P: np.ndarray, hp: Hyperparams, *,
                         squared_dm: bool = False,
                         cut_after_argmin: bool = False) -> ParentGraph:
    """Reference quickshift links on density ``P``.

    By default candidates farther than ``d_m`` (unsquared 5-D distance) are
    excluded before taking the nearest. ``squared_dm`` compares the squared
    distance against ``d_m`` instead; ``cut_after_argmin`` takes the nearest
    higher candidate first and drops the link if it is too long.
    """
    img = check_image(image)
    P = np.asarray(P, dtype=np.float64)
    if P.shape != img.shape[:2]:
        raise ValueError(f"density shape {P.shape} does not match image {img.shape[:2]}")
    img = np.ascontiguousarray(np.asarray(img, dtype=np.float64) * hp.ratio)
    du, dv = lookout_offsets(hp.k_w, math.inf)
    parent, _ = _kernels.graph_original(img, np.ascontiguousarray(P), du, dv,
                                        float(hp.d_m), squared_dm, cut_after_argmin)
    return ParentGraph(parent, *P.shape)


def build_graph_simplified(A: np.ndarray, k_w: int, d_m: float) -> ParentGraph:
    A = np.ascontiguousarray(A, dtype=np.float64)
    du, dv = lookout_offsets(int(k_w), parse_dm(d_m))
    parent = _kernels.graph_simplified(A, du, dv)
    return ParentGraph(parent, *A.shape)


def local_maxima(A: np.ndarray, k_w: int, d_m: float,
                 region: Region | None = None) -> tuple[int, list[tuple[int, int]]]:
    """Pixels of ``region`` strictly above every other pixel of their lookout set."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    region = Region.whole(A.shape) if region is None else region
    region.check(A.shape)
    if region.area == 0:
        return 0, []
    du, dv = lookout_offsets(int(k_w), parse_dm(d_m))
    mask = _kernels.local_max_mask(A, du, dv, region.top, region.left,
                                   region.height, region.width)
    rr, cc = np.nonzero(mask)
    pts = [(int(r) + region.top, int(c) + region.left) for r, c in zip(rr, cc)]
    return len(pts), pts


def count_local_maxima(A: np.ndarray, k_w: int, d_m: float,
                       region: Region | None = None) -> int:
    return local_maxima(A, k_w, d_m, region)[0]


def connected_components(graph: ParentGraph) -> LabelMap:
    """Label pixels by their root; labels follow the row-major order of roots."""
    root = _kernels.find_roots(np.ascontiguousarray(graph.parent, dtype=np.int64))
    roots = np.flatnonzero(graph.parent < 0)
    rank = np.full(graph.parent.size, -1, dtype=np.int64)
    rank[roots] = np.arange(roots.size)
    labels = rank[root].reshape(graph.shape)
    return LabelMap(labels, int(roots.size))


def count_superpixels(labels: LabelMap, region: Region | None = None) -> int:
    if region is None:
        return labels.num_labels
    region.check(labels.shape)
    return int(np.unique(labels.labels[region.slices]).size)


def edge_lengths(graph: ParentGraph) -> np.ndarray:
    """Spatial length of every parent link (roots excluded)."""
    child = np.flatnonzero(graph.parent >= 0)
    ci, cj = np.divmod(child, graph.width)
    pi, pj = np.divmod(graph.parent[child], graph.width)
    return np.hypot(ci - pi, cj - pj)
