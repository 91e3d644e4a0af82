import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biotexture.ecosystem import SpeciesHistogram, build_histogram
from biotexture.taxonomy import (
    build_tree,
    distance_matrix,
    extensive_quadratic_entropy,
    intensive_quadratic_entropy,
    matrix_to_csv,
    nn_distance,
    sum_phylogenetic_distances,
    taxonomic_distinctness,
    taxonomic_diversity,
    taxonomic_indices,
    total_taxonomic_distinctness,
)

from conftest import STRIP_LEVELS, gray_images, histograms


def naive_tree_distances(hist):
    """Oracle: recursive split with exact rational means, then path lengths
    from explicit root-to-leaf paths."""
    pairs = hist.entries
    paths = {}

    def grow(group, path):
        if len(group) == 1:
            paths[group[0][0]] = path
            return
        mean = Fraction(sum(l * c for l, c in group), sum(c for _, c in group))
        left = [p for p in group if p[0] < mean]
        right = [p for p in group if p[0] >= mean]
        grow(left, path + "L")
        grow(right, path + "R")

    grow(pairs, "")
    levels = [l for l, _ in pairs]
    d = np.zeros((len(levels), len(levels)), dtype=np.int64)
    for i, a in enumerate(levels):
        for j, b in enumerate(levels):
            pa, pb = paths[a], paths[b]
            common = len(list(itertools.takewhile(lambda t: t[0] == t[1], zip(pa, pb))))
            d[i, j] = len(pa) + len(pb) - 2 * common
    return d


def brute_delta(img, dist, levels):
    """Average tree distance over all unordered pixel pairs."""
    idx = {l: i for i, l in enumerate(levels)}
    flat = [idx[v] for v in img.ravel().tolist()]
    total = 0
    for p in range(len(flat)):
        for q in range(p + 1, len(flat)):
            total += dist[flat[p], flat[q]]
    n = len(flat)
    return total / (n * (n - 1) / 2)


def brute_species_pairs(hist, dist):
    x = hist.counts.tolist()
    s = len(x)
    num = den = 0
    for i in range(s):
        for j in range(i + 1, s):
            num += dist[i, j] * x[i] * x[j]
            den += x[i] * x[j]
    return num, den


# -- tree ----------------------------------------------------------------

def test_strip_tree_topology(strip_hist):
    tree = build_tree(strip_hist)
    assert tree.partitions() == [
        ((6, 75), (117, 141, 230)),
        ((6,), (75,)),
        ((117, 141), (230,)),
        ((117,), (141,)),
    ]
    assert tree.root.threshold == pytest.approx(113.8)
    assert tree.root.right.threshold == pytest.approx(162.666666, rel=1e-6)


def test_toy_tree(toy_hist):
    tree = build_tree(toy_hist)
    assert tree.root.threshold == 135.625
    assert tree.root.left.threshold == 64
    assert tree.partitions()[0] == ((0, 128), (255,))
    assert tree.root.right.is_leaf and tree.root.right.level == 255


def test_weighted_mean_threshold():
    # pixel mean 2500/22 = 113.6 gives {0, 100} | {120}; the unweighted
    # species mean 73.3 would have given {0} | {100, 120}
    hist = SpeciesHistogram.from_pairs([(0, 1), (100, 1), (120, 20)])
    tree = build_tree(hist)
    assert tree.root.threshold == pytest.approx((0 + 100 + 2400) / 22)
    assert tree.partitions()[0] == ((0, 100), (120,))


def test_single_species_tree():
    tree = build_tree(SpeciesHistogram.from_pairs([(9, 4)]))
    assert tree.internal_count == 0
    assert tree.root.is_leaf
    assert distance_matrix(tree).tolist() == [[0]]


def test_tie_goes_right():
    # mean of 0 and 200 with equal counts is 100; level 100 sits exactly on it
    hist = SpeciesHistogram.from_pairs([(0, 1), (100, 1), (200, 1)])
    tree = build_tree(hist)
    assert tree.partitions()[0] == ((0,), (100, 200))


def test_distance_examples(toy_hist, strip_hist):
    d = distance_matrix(build_tree(toy_hist))
    assert d.tolist() == [[0, 2, 3], [2, 0, 3], [3, 3, 0]]
    d = distance_matrix(build_tree(strip_hist))
    at = {l: i for i, l in enumerate(STRIP_LEVELS)}
    assert d[at[6], at[75]] == 2
    assert d[at[117], at[141]] == 2
    assert d[at[117], at[230]] == 3
    assert d[at[6], at[230]] == 4
    assert d[at[6], at[117]] == 5


def test_tree_text_and_csv(toy_hist):
    tree = build_tree(toy_hist)
    assert tree.to_text() == "split < 135.625\n  split < 64\n    leaf 0\n    leaf 128\n  leaf 255\n"
    csv = matrix_to_csv(tree, distance_matrix(tree))
    assert csv.splitlines() == ["level,0,128,255", "0,0,2,3", "128,2,0,3", "255,3,3,0"]


@given(histograms())
def test_tree_invariants(hist):
    tree = build_tree(hist)
    assert sorted(tree.leaf_levels()) == hist.levels.tolist()
    assert tree.internal_count == hist.richness - 1
    for node, _ in tree.nodes():
        if not node.is_leaf:
            assert all(l < node.threshold for l in tree.levels[node.left.lo : node.left.hi])
            assert all(l >= node.threshold for l in tree.levels[node.right.lo : node.right.hi])


@given(histograms())
@settings(max_examples=150)
def test_distance_matrix_matches_naive_oracle(hist):
    assert np.array_equal(distance_matrix(build_tree(hist)), naive_tree_distances(hist))


@given(histograms(max_species=12))
@settings(max_examples=80)
def test_distance_matrix_is_tree_metric(hist):
    d = distance_matrix(build_tree(hist))
    s = d.shape[0]
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    off = d[~np.eye(s, dtype=bool)]
    assert np.all(off >= 2)
    for i, j, k, l in itertools.combinations(range(s), 4):
        sums = sorted([d[i, j] + d[k, l], d[i, k] + d[j, l], d[i, l] + d[j, k]])
        assert sums[1] == sums[2]


# -- indices -------------------------------------------------------------

def test_toy_indices(toy_hist):
    d = distance_matrix(build_tree(toy_hist))
    assert taxonomic_diversity(toy_hist, d) == pytest.approx(230 / 120, rel=1e-15)
    assert taxonomic_distinctness(toy_hist, d) == pytest.approx(230 / 85, rel=1e-15)
    assert sum_phylogenetic_distances(toy_hist, d) == pytest.approx(3 * 230 / 85, rel=1e-15)
    assert nn_distance(d) == pytest.approx(7 / 3, rel=1e-15)
    assert extensive_quadratic_entropy(d) == 16
    assert intensive_quadratic_entropy(d) == pytest.approx(16 / 9, rel=1e-15)
    assert total_taxonomic_distinctness(d) == 8


def test_two_species():
    hist = SpeciesHistogram.from_pairs([(10, 1), (90, 1)])
    d = distance_matrix(build_tree(hist))
    assert d.tolist() == [[0, 2], [2, 0]]
    assert taxonomic_diversity(hist, d) == 2
    assert taxonomic_distinctness(hist, d) == 2
    assert sum_phylogenetic_distances(hist, d) == 2
    assert nn_distance(d) == 2
    assert extensive_quadratic_entropy(d) == 4
    assert intensive_quadratic_entropy(d) == 1
    assert total_taxonomic_distinctness(d) == 4
    skewed = SpeciesHistogram.from_pairs([(10, 7), (90, 3)])
    assert taxonomic_distinctness(skewed, d) == 2
    assert sum_phylogenetic_distances(skewed, d) == 2


def test_single_species_indices():
    hist = SpeciesHistogram.from_pairs([(40, 9)])
    idx = taxonomic_indices(hist)
    assert idx.values() == (0.0,) * 7
    assert "single_species" in idx.flags


def test_strip_nn_distance(strip_hist):
    assert nn_distance(distance_matrix(build_tree(strip_hist))) == pytest.approx(2.2)


def test_uniform_counts_spd_is_pair_count_times_mean_distance():
    hist = SpeciesHistogram.from_pairs([(v, 3) for v in (3, 50, 90, 160, 161, 250)])
    d = distance_matrix(build_tree(hist))
    s = 6
    pair_d = [d[i, j] for i in range(s) for j in range(i + 1, s)]
    assert sum_phylogenetic_distances(hist, d) == pytest.approx(len(pair_d) * np.mean(pair_d), rel=1e-12)


@given(gray_images(max_side=6, max_levels=6))
@settings(max_examples=60, deadline=None)
def test_pixel_pair_oracle(img):
    hist = build_histogram(img)
    if hist.total < 2:
        return
    d = distance_matrix(build_tree(hist))
    idx = taxonomic_indices(hist, d)
    assert idx.delta == pytest.approx(brute_delta(img, d, hist.levels.tolist()), rel=1e-9, abs=0)
    num, den = brute_species_pairs(hist, d)
    if den:
        assert idx.delta_star == pytest.approx(num / den, rel=1e-9)
        s = hist.richness
        assert idx.s_pd == pytest.approx(s * (s - 1) / 2 * num / den, rel=1e-9)


@given(histograms())
def test_matrix_sum_identities(hist):
    d = distance_matrix(build_tree(hist))
    idx = taxonomic_indices(hist, d)
    s = hist.richness
    total = sum(int(d[i, j]) for i in range(s) for j in range(s) if i != j)
    assert idx.e_eq == total
    assert idx.e_iq == total / s**2
    if s >= 2:
        assert idx.d_tt == pytest.approx(sum(d[i].sum() / (s - 1) for i in range(s)), rel=1e-15)
        assert idx.d_tt * (s - 1) == pytest.approx(idx.e_eq, rel=1e-15)


@given(histograms(), st.integers(2, 4))
def test_count_scaling_preserves_proportional_indices(hist, factor):
    scaled = SpeciesHistogram(hist.levels, hist.counts * factor)
    a, b = taxonomic_indices(hist), taxonomic_indices(scaled)
    assert (a.delta_star, a.s_pd, a.d_nn, a.e_eq, a.e_iq, a.d_tt) == (
        b.delta_star, b.s_pd, b.d_nn, b.e_eq, b.e_iq, b.d_tt
    )


def test_large_counts_use_exact_fallback():
    hist = SpeciesHistogram.from_pairs([(0, 3 * 10**8), (100, 2 * 10**8), (255, 10**8)])
    d = distance_matrix(build_tree(hist))
    num, den = brute_species_pairs(hist, d)
    assert taxonomic_distinctness(hist, d) == num / den
