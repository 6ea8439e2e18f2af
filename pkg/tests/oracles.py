"""Slow, literal reference implementations used as independent oracles.

Everything here is written directly from the definitions with plain Python
loops; nothing is shared with the package beyond input conventions.
"""

import math

import numpy as np


def kw_of(ks):
    return int(math.ceil(3 * ks))


def density(img, ks, ratio=1.0):
    img = np.asarray(img, dtype=float) * ratio
    H, W, _ = img.shape
    kw = kw_of(ks)
    out = np.zeros((H, W))
    for i in range(H):
        for j in range(W):
            s = 0.0
            for u in range(H):
                for v in range(W):
                    if max(abs(u - i), abs(v - j)) > kw:
                        continue
                    d = (i - u) ** 2 + (j - v) ** 2 + float(np.sum((img[i, j] - img[u, v]) ** 2))
                    s += math.exp(-d / (2 * ks * ks))
            out[i, j] = s
    return out


def delta(H, W, i, j, ks, power=1):
    kw = kw_of(ks)
    return sum(math.exp(-power * ((i - u) ** 2 + (j - v) ** 2) / (2 * ks * ks))
               for u in range(H) for v in range(W)
               if max(abs(u - i), abs(v - j)) <= kw)


def in_E(i, j, u, v, kw, dm):
    return max(abs(u - i), abs(v - j)) <= kw and math.hypot(u - i, v - j) <= dm


def graph_original(img, A, ks, dm, ratio=1.0, squared=False, cut_after=False):
    """Nearest higher-density pixel in the square window, joint distance."""
    img = np.asarray(img, dtype=float) * ratio
    H, W = A.shape
    kw = kw_of(ks)
    parent = -np.ones(H * W, dtype=int)
    for i in range(H):
        for j in range(W):
            cands = []
            for u in range(H):
                for v in range(W):
                    if max(abs(u - i), abs(v - j)) > kw or A[u, v] <= A[i, j]:
                        continue
                    d2 = (i - u) ** 2 + (j - v) ** 2 + float(np.sum((img[i, j] - img[u, v]) ** 2))
                    d = d2 if squared else math.sqrt(d2)
                    cands.append((d2, u * W + v, d))
            if not cut_after:
                cands = [c for c in cands if c[2] <= dm]
            if not cands:
                continue
            best = min(cands)
            if cut_after and best[2] > dm:
                continue
            parent[i * W + j] = best[1]
    return parent


def graph_simplified(A, kw, dm):
    H, W = A.shape
    parent = -np.ones(H * W, dtype=int)
    for i in range(H):
        for j in range(W):
            cands = [((u - i) ** 2 + (v - j) ** 2, u * W + v)
                     for u in range(H) for v in range(W)
                     if (u, v) != (i, j) and in_E(i, j, u, v, kw, dm) and A[u, v] > A[i, j]]
            if cands:
                parent[i * W + j] = min(cands)[1]
    return parent


def local_maxima(A, kw, dm):
    H, W = A.shape
    out = []
    for i in range(H):
        for j in range(W):
            if all(A[u, v] < A[i, j]
                   for u in range(H) for v in range(W)
                   if (u, v) != (i, j) and in_E(i, j, u, v, kw, dm)):
                out.append((i, j))
    return out


def components(parent):
    """Union-find over child-parent edges; returns component count and root-of map."""
    n = len(parent)
    rep = list(range(n))

    def find(x):
        while rep[x] != x:
            rep[x] = rep[rep[x]]
            x = rep[x]
        return x

    for x, p in enumerate(parent):
        if p >= 0:
            a, b = find(x), find(int(p))
            if a != b:
                rep[a] = b
    roots = [find(x) for x in range(n)]
    return len(set(roots)), roots


def lattice_count(kw, dm, i=None, j=None, H=None, W=None):
    n = 0
    for a in range(-kw, kw + 1):
        for b in range(-kw, kw + 1):
            if a * a + b * b > dm * dm:
                continue
            if i is not None and not (0 <= i + a < H and 0 <= j + b < W):
                continue
            n += 1
    return n
