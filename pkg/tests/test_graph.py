import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from quickshift_scale.density import Hyperparams, density_P
from quickshift_scale.graph import (NeighborhoodSpec, ParentGraph, build_graph_original,
                                    build_graph_simplified, connected_components,
                                    count_local_maxima, count_superpixels, edge_lengths,
                                    local_maxima, lookout_offsets, neighborhood_E, shape_case)
from quickshift_scale.pixels import Region


def _img(seed, H, W, scale=2.0):
    return np.random.default_rng(seed).normal(size=(H, W, 3)) * scale


@pytest.mark.parametrize("kw,dm,case", [(15, 10, "disk"), (15, 15, "disk"), (15, 18, "rounded-square"),
                                        (15, 15 * math.sqrt(2), "rounded-square"),
                                        (15, 22, "square"), (15, math.inf, "square")])
def test_shape_case(kw, dm, case):
    assert shape_case(kw, dm) == case
    assert NeighborhoodSpec(kw, dm).shape == case


def test_lookout_offsets_sorted_and_complete():
    du, dv = lookout_offsets(3, 2.0)
    assert len(du) == 12
    d2 = du ** 2 + dv ** 2
    assert np.all(np.diff(d2) >= 0)
    assert (0, 0) not in set(zip(du.tolist(), dv.tolist()))
    assert not du.flags.writeable


def test_neighborhood_E_clipped():
    E = neighborhood_E(0, 0, (10, 10), 3, 2.0)
    assert sorted(E) == sorted([(0, 0), (0, 1), (0, 2), (1, 0), (2, 0), (1, 1)])


@pytest.mark.parametrize("ks,dm,squared,cut_after,ratio", [
    (1.0, 3.0, False, False, 1.0),
    (1.0, 3.0, True, False, 1.0),
    (1.0, 3.0, False, True, 1.0),
    (1.3, 2.5, True, True, 0.5),
    (1.0, math.inf, False, False, 1.0),
])
def test_original_graph_matches_oracle(ks, dm, squared, cut_after, ratio):
    for seed in range(3):
        img = _img(seed, 9, 10, 1.0)
        hp = Hyperparams(k_s=ks, d_m=dm, ratio=ratio, sigma0=1e-5, seed=seed)
        P = density_P(img, hp)
        g = build_graph_original(img, P, hp, squared_dm=squared, cut_after_argmin=cut_after)
        ref = oracles.graph_original(img, P, ks, dm, ratio, squared, cut_after)
        assert np.array_equal(g.parent, ref)


def test_original_graph_tie_break_smallest_index():
    # constant image: every higher pixel at equal joint distance competes on index
    img = np.zeros((3, 3, 3))
    A = np.array([[5.0, 0.0, 5.0], [0.0, 1.0, 0.0], [5.0, 0.0, 5.0]])
    hp = Hyperparams(k_s=1.0, d_m=math.inf, sigma0=0.0)
    g = build_graph_original(img, A, hp)
    assert g.parent_of(1, 1) == (0, 0)


def test_original_graph_checks_shape():
    hp = Hyperparams(k_s=1.0)
    with pytest.raises(ValueError):
        build_graph_original(np.zeros((3, 3, 3)), np.zeros((3, 4)), hp)


@pytest.mark.parametrize("kw,dm", [(2, 1.0), (2, 2.5), (3, 3.5), (2, math.inf)])
def test_simplified_graph_matches_oracle(kw, dm):
    for seed in range(4):
        A = np.random.default_rng(seed).random((8, 11))
        g = build_graph_simplified(A, kw, dm)
        assert np.array_equal(g.parent, oracles.graph_simplified(A, kw, dm))


@pytest.mark.parametrize("kw,dm", [(2, 1.0), (2, 2.5), (3, math.inf)])
def test_local_maxima_matches_oracle(kw, dm):
    A = np.random.default_rng(11).random((12, 9))
    n, pts = local_maxima(A, kw, dm)
    assert sorted(pts) == oracles.local_maxima(A, kw, dm)
    sub = Region(2, 3, 6, 4)
    inside = [p for p in pts if 2 <= p[0] < 8 and 3 <= p[1] < 7]
    assert count_local_maxima(A, kw, dm, sub) == len(inside)


def test_local_maxima_ties_are_not_maxima():
    A = np.zeros((4, 4))
    assert count_local_maxima(A, 1, math.inf) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 14), st.integers(1, 14), st.integers(1, 4),
       st.one_of(st.floats(0.5, 6.0), st.just(math.inf)), st.integers(0, 10**6))
def test_components_equal_local_maxima(H, W, kw, dm, seed):
    """Every component of the simplified graph holds exactly one local maximum (its root)."""
    A = np.random.default_rng(seed).random((H, W))
    g = build_graph_simplified(A, kw, dm)
    labels = connected_components(g)
    n, pts = local_maxima(A, kw, dm)
    assert labels.num_labels == n
    assert sorted(divmod(int(r), W) for r in g.roots) == sorted(pts)
    # every component contains exactly one local maximum
    assert sorted(labels.labels[p] for p in pts) == list(range(n))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 10**6))
def test_components_match_union_find(H, W, seed):
    A = np.random.default_rng(seed).random((H, W))
    g = build_graph_simplified(A, 2, 2.2)
    labels = connected_components(g)
    n, roots = oracles.components(g.parent)
    assert labels.num_labels == n
    # same partition: labels equal iff union-find roots equal
    lab = labels.labels.ravel()
    pairs = {(int(a), int(b)) for a, b in zip(lab, roots)}
    assert len(pairs) == n
    # labels are ranked by row-major root position
    first_root = [int(np.flatnonzero(g.parent < 0)[k]) for k in range(n)]
    assert [int(lab[r]) for r in first_root] == list(range(n))


def test_cycle_detection():
    g = ParentGraph(np.array([1, 0], dtype=np.int64), 1, 2)
    with pytest.raises(ValueError):
        connected_components(g)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(2, 12), st.floats(0.4, 2.0), st.integers(0, 10**6))
def test_ratio_zero_variants_coincide(H, W, ks, seed):
    """Without colour, d_m = inf: the original and simplified graphs are the same."""
    img = _img(seed, H, W)
    hp = Hyperparams(k_s=ks, d_m=math.inf, ratio=0.0, sigma0=1e-5, seed=seed)
    P = density_P(img, hp)
    a = build_graph_original(img, P, hp)
    b = build_graph_simplified(P, hp.k_w, math.inf)
    assert np.array_equal(a.parent, b.parent)


def test_matches_skimage_quickshift():
    """Same densities and noise as scikit-image: label maps agree exactly."""
    seg = pytest.importorskip("skimage.segmentation")
    for seed, (ks, dm) in enumerate([(2.0, 6.0), (1.5, 20.0), (3.0, 4.0)]):
        img = np.random.default_rng(seed).random((24, 30, 3)) * 10
        hp = Hyperparams(k_s=ks, d_m=dm, sigma0=0.0)
        P = density_P(img, hp) + np.random.default_rng(42).normal(scale=1e-5, size=img.shape[:2])
        g = build_graph_original(img, P, hp, cut_after_argmin=True)
        ours = connected_components(g).labels
        ref = seg.quickshift(img, ratio=1.0, kernel_size=ks, max_dist=dm,
                             convert2lab=False, rng=42)
        assert np.array_equal(ours, ref)


def test_count_superpixels_and_edges(tmp_path):
    A = np.random.default_rng(0).random((10, 10))
    g = build_graph_simplified(A, 2, 2.0)
    labels = connected_components(g)
    assert count_superpixels(labels) == labels.num_labels
    region = Region(3, 3, 4, 4)
    assert count_superpixels(labels, region) == len(np.unique(labels.labels[3:7, 3:7]))
    assert np.all(edge_lengths(g) <= 2.0)
    g.save_csv(tmp_path / "e.csv")
    rows = (tmp_path / "e.csv").read_text().splitlines()
    assert rows[0] == "i,j,pu,pv" and len(rows) == 101
    e = g.edges()
    root = int(g.roots[0])
    assert e[root].tolist() == [root // 10, root % 10, -1, -1]
