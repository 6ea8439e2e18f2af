"""Compiled per-pixel loops.

Each output pixel is computed independently, in a fixed scan order, so the
results do not depend on how ``prange`` partitions the rows.
"""

import math

import numpy as np
from numba import config, njit, prange

# the bundled TBB is too old for numba; avoid the warning it triggers
config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@njit(cache=True, parallel=True)
def density_field(img, ks, kw):
    H, W, C = img.shape
    inv = 1.0 / (2.0 * ks * ks)
    out = np.empty((H, W))
    for i in prange(H):
        for j in range(W):
            s = 0.0
            for u in range(max(0, i - kw), min(H, i + kw + 1)):
                for v in range(max(0, j - kw), min(W, j + kw + 1)):
                    d = float((i - u) * (i - u) + (j - v) * (j - v))
                    for c in range(C):
                        t = img[i, j, c] - img[u, v, c]
                        d += t * t
                    s += math.exp(-d * inv)
            out[i, j] = s
    return out


@njit(cache=True)
def density_at(img, ks, kw, rows, cols):
    H, W, C = img.shape
    inv = 1.0 / (2.0 * ks * ks)
    out = np.empty(rows.shape[0])
    for n in range(rows.shape[0]):
        i = rows[n]
        j = cols[n]
        s = 0.0
        for u in range(max(0, i - kw), min(H, i + kw + 1)):
            for v in range(max(0, j - kw), min(W, j + kw + 1)):
                d = float((i - u) * (i - u) + (j - v) * (j - v))
                for c in range(C):
                    t = img[i, j, c] - img[u, v, c]
                    d += t * t
                s += math.exp(-d * inv)
        out[n] = s
    return out


@njit(cache=True, parallel=True)
def graph_original(img, A, du, dv, dm, squared, cut_after):
    """Parent flat index per pixel (-1 for roots) and the distance to it.

    ``du, dv`` list the square-window offsets sorted by (spatial distance,
    du, dv); the scan stops once the spatial part alone exceeds the best
    joint distance found so far.
    """
    H, W, C = img.shape
    parent = np.full(H * W, -1, dtype=np.int64)
    dist = np.full(H * W, np.inf)
    n = du.shape[0]
    for i in prange(H):
        for j in range(W):
            a = A[i, j]
            best = np.inf
            bi = -1
            for k in range(n):
                s2 = float(du[k] * du[k] + dv[k] * dv[k])
                if s2 > best:
                    break
                u = i + du[k]
                v = j + dv[k]
                if u < 0 or u >= H or v < 0 or v >= W:
                    continue
                if A[u, v] > a:
                    d2 = s2
                    for c in range(C):
                        t = img[i, j, c] - img[u, v, c]
                        d2 += t * t
                    if not cut_after:
                        if squared:
                            if d2 > dm:
                                continue
                        elif math.sqrt(d2) > dm:
                            continue
                    idx = u * W + v
                    if d2 < best or (d2 == best and idx < bi):
                        best = d2
                        bi = idx
            if bi >= 0 and cut_after:
                if (best if squared else math.sqrt(best)) > dm:
                    bi = -1
            if bi >= 0:
                parent[i * W + j] = bi
                dist[i * W + j] = math.sqrt(best)
    return parent, dist


@njit(cache=True, parallel=True)
def graph_simplified(A, du, dv):
    """``du, dv`` list the lookout offsets sorted by (distance, du, dv), origin excluded."""
    H, W = A.shape
    parent = np.full(H * W, -1, dtype=np.int64)
    n = du.shape[0]
    for i in prange(H):
        for j in range(W):
            a = A[i, j]
            for k in range(n):
                u = i + du[k]
                v = j + dv[k]
                if u < 0 or u >= H or v < 0 or v >= W:
                    continue
                if A[u, v] > a:
                    parent[i * W + j] = u * W + v
                    break
    return parent


@njit(cache=True, parallel=True)
def local_max_mask(A, du, dv, top, left, h, w):
    H, W = A.shape
    out = np.zeros((h, w), dtype=np.bool_)
    n = du.shape[0]
    for r in prange(h):
        i = top + r
        for c in range(w):
            j = left + c
            a = A[i, j]
            ok = True
            for k in range(n):
                u = i + du[k]
                v = j + dv[k]
                if u < 0 or u >= H or v < 0 or v >= W:
                    continue
                if A[u, v] >= a:
                    ok = False
                    break
            out[r, c] = ok
    return out


@njit(cache=True)
def find_roots(parent):
    """Root of every node, memoising along each followed path."""
    n = parent.shape[0]
    root = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    for s in range(n):
        if root[s] >= 0:
            continue
        top = 0
        x = s
        while root[x] < 0 and parent[x] >= 0:
            if top == n:
                raise ValueError("parent graph contains a cycle")
            stack[top] = x
            top += 1
            x = parent[x]
        r = root[x] if root[x] >= 0 else x
        root[x] = r
        for k in range(top):
            root[stack[k]] = r
    return root
