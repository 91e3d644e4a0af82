"""Gray-level phylogeny and the taxonomic indices built on it.

The tree splits the current set of species at the pixel-weighted mean gray
level (levels below go left, levels at or above go right) until every leaf
holds one species.  Species distances are leaf-to-leaf edge counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .ecosystem import SpeciesHistogram


@dataclass(frozen=True)
class TreeNode:
    """Leaf when ``level`` is set, otherwise an internal split at ``threshold``."""

    lo: int  # first species index covered (species sorted by level)
    hi: int  # one past the last
    level: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass(frozen=True)
class PhyloTree:
    root: TreeNode
    levels: tuple[int, ...]

    def nodes(self) -> Iterator[tuple[TreeNode, int]]:
        """Pre-order walk yielding (node, depth)."""
        stack = [(self.root, 0)]
        while stack:
            node, depth = stack.pop()
            yield node, depth
            if not node.is_leaf:
                stack.append((node.right, depth + 1))
                stack.append((node.left, depth + 1))

    @property
    def internal_count(self) -> int:
        return sum(1 for node, _ in self.nodes() if not node.is_leaf)

    def leaf_levels(self) -> list[int]:
        return [node.level for node, _ in self.nodes() if node.is_leaf]

    def partitions(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """(left levels, right levels) of every internal node, pre-order."""
        out = []
        for node, _ in self.nodes():
            if not node.is_leaf:
                out.append(
                    (
                        self.levels[node.left.lo : node.left.hi],
                        self.levels[node.right.lo : node.right.hi],
                    )
                )
        return out

    def to_text(self) -> str:
        lines = []
        for node, depth in self.nodes():
            pad = "  " * depth
            if node.is_leaf:
                lines.append(f"{pad}leaf {node.level}")
            else:
                lines.append(f"{pad}split < {node.threshold:.6g}")
        return "\n".join(lines) + "\n"


def build_tree(hist: SpeciesHistogram) -> PhyloTree:
    levels = hist.levels
    counts = hist.counts
    # Prefix sums make each node's weighted mean O(1) with exact integers.
    cum_n = np.concatenate(([0], np.cumsum(counts)))
    cum_w = np.concatenate(([0], np.cumsum(levels * counts)))

    def grow(lo: int, hi: int) -> TreeNode:
        if hi - lo == 1:
            return TreeNode(lo, hi, level=int(levels[lo]))
        n = int(cum_n[hi] - cum_n[lo])
        w = int(cum_w[hi] - cum_w[lo])
        # level < w / n  <=>  level * n < w
        split = lo + int(np.searchsorted(levels[lo:hi] * n, w, side="left"))
        return TreeNode(lo, hi, threshold=w / n, left=grow(lo, split), right=grow(split, hi))

    return PhyloTree(grow(0, levels.size), tuple(int(v) for v in levels))


def distance_matrix(tree: PhyloTree) -> np.ndarray:
    """S x S matrix of edge counts between leaves (int64)."""
    s = len(tree.levels)
    depth = np.zeros(s, dtype=np.int64)
    for node, d in tree.nodes():
        if node.is_leaf:
            depth[node.lo] = d
    dist = np.zeros((s, s), dtype=np.int64)
    for node, d in tree.nodes():
        if node.is_leaf:
            continue
        a, b = node.left, node.right
        block = depth[a.lo : a.hi, None] + depth[None, b.lo : b.hi] - 2 * d
        dist[a.lo : a.hi, b.lo : b.hi] = block
        dist[b.lo : b.hi, a.lo : a.hi] = block.T
    return dist


def _pair_sums(hist: SpeciesHistogram, dist: np.ndarray) -> tuple[int, int]:
    """(sum_{i<j} d_ij x_i x_j, sum_{i<j} x_i x_j) as exact integers."""
    x = hist.counts
    if x.size < 2:
        return 0, 0
    n = int(x.sum())
    cross = (n * n - int(np.dot(x, x))) // 2
    if n * n * int(dist.max()) < 2**62:
        weighted = int(x @ (dist @ x)) // 2
    else:
        xs = [int(v) for v in x]
        weighted = sum(int(dist[i, j]) * xs[i] * xs[j] for i in range(len(xs)) for j in range(i + 1, len(xs)))
    return weighted, cross


def taxonomic_diversity(hist: SpeciesHistogram, dist: np.ndarray) -> float:
    n = hist.total
    weighted, _ = _pair_sums(hist, dist)
    return weighted / (n * (n - 1) // 2) if n >= 2 else 0.0


def taxonomic_distinctness(hist: SpeciesHistogram, dist: np.ndarray) -> float:
    weighted, cross = _pair_sums(hist, dist)
    return weighted / cross if cross else 0.0


def sum_phylogenetic_distances(hist: SpeciesHistogram, dist: np.ndarray) -> float:
    s = hist.richness
    weighted, cross = _pair_sums(hist, dist)
    return (s * (s - 1) // 2) * (weighted / cross) if cross else 0.0


def nn_distance(dist: np.ndarray) -> float:
    s = dist.shape[0]
    if s < 2:
        return 0.0
    off = dist + np.diag(np.full(s, np.iinfo(np.int64).max // 4))
    return float(off.min(axis=1).sum() / s)


def extensive_quadratic_entropy(dist: np.ndarray) -> float:
    return float(dist.sum())


def intensive_quadratic_entropy(dist: np.ndarray) -> float:
    s = dist.shape[0]
    return int(dist.sum()) / (s * s)


def total_taxonomic_distinctness(dist: np.ndarray) -> float:
    s = dist.shape[0]
    return int(dist.sum()) / (s - 1) if s >= 2 else 0.0


@dataclass(frozen=True)
class TaxonomicIndices:
    delta: float
    delta_star: float
    s_pd: float
    d_nn: float
    e_eq: float
    e_iq: float
    d_tt: float
    flags: tuple[str, ...] = ()

    def values(self) -> tuple[float, ...]:
        return (self.delta, self.delta_star, self.s_pd, self.d_nn, self.e_eq, self.e_iq, self.d_tt)


TAXONOMIC_NAMES = ("delta", "delta_star", "s_pd", "d_nn", "e_eq", "e_iq", "d_tt")


def taxonomic_indices(hist: SpeciesHistogram, dist: Optional[np.ndarray] = None) -> TaxonomicIndices:
    if dist is None:
        dist = distance_matrix(build_tree(hist))
    s = hist.richness
    weighted, cross = _pair_sums(hist, dist)
    n = hist.total
    total = int(dist.sum())
    return TaxonomicIndices(
        delta=weighted / (n * (n - 1) // 2) if n >= 2 else 0.0,
        delta_star=weighted / cross if cross else 0.0,
        s_pd=(s * (s - 1) // 2) * (weighted / cross) if cross else 0.0,
        d_nn=nn_distance(dist),
        e_eq=float(total),
        e_iq=total / (s * s),
        d_tt=total / (s - 1) if s >= 2 else 0.0,
        flags=("single_species",) if s == 1 else (),
    )


def matrix_to_csv(tree: PhyloTree, dist: np.ndarray) -> str:
    header = "level," + ",".join(str(v) for v in tree.levels)
    rows = [f"{lvl}," + ",".join(str(int(v)) for v in row) for lvl, row in zip(tree.levels, dist)]
    return "\n".join([header, *rows]) + "\n"
