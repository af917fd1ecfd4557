"""CART regression tree with variance impurity and impurity-decrease importances."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, TextIO, Union

import numpy as np

from .dataset import FeatureMatrix

# Gains closer than this fraction of the node impurity are ties. Float noise
# from summing mirrored partitions is ~1e-15 relative; real gain differences
# on this data are many orders larger.
GAIN_TIE_RTOL = 1e-10

FeatureSampler = Callable[[int], Sequence[int]]


@dataclass(frozen=True)
class TreeHyperparams:
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_gain: float = 0.0

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError(f"max_depth must be >= 0 or None, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ValueError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if not self.min_gain >= 0:
            raise ValueError(f"min_gain must be >= 0, got {self.min_gain}")


@dataclass(frozen=True)
class SplitCandidate:
    feature_index: int
    threshold: float
    gain: float
    left_count: int
    right_count: int


@dataclass(frozen=True)
class Leaf:
    prediction: float
    n: int


@dataclass(frozen=True)
class Internal:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"
    gain: float
    n: int


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class RegressionTree:
    root: TreeNode
    feature_names: tuple[str, ...]
    hyperparams: TreeHyperparams = field(default_factory=TreeHyperparams)


def impurity(targets) -> float:
    """Population variance: mean squared deviation from the mean."""
    y = np.asarray(targets, dtype=float)
    if y.size == 0:
        raise ValueError("impurity of an empty target vector is undefined")
    d = y - y.mean()
    return float(np.mean(d * d))


def information_gain(parent, left, right) -> float:
    """Parent impurity minus the size-weighted child impurities."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    parent = np.asarray(parent, dtype=float)
    if left.size == 0 or right.size == 0:
        raise ValueError("both children must be non-empty")
    if left.size + right.size != parent.size:
        raise ValueError(
            f"child sizes {left.size} + {right.size} do not add up to parent size {parent.size}"
        )
    n = parent.size
    return impurity(parent) - (left.size / n) * impurity(left) - (right.size / n) * impurity(right)


def best_split(rows, targets, candidate_features: Optional[Sequence[int]] = None,
               min_gain: float = 0.0) -> Optional[SplitCandidate]:
    """Highest-gain (feature, midpoint threshold) pair, or None.

    Rows with value <= threshold go left. Ties go to the lowest feature index,
    then the smallest threshold.
    """
    X = np.asarray(rows, dtype=float)
    y = np.asarray(targets, dtype=float)
    m = y.size
    if m < 2:
        raise ValueError(f"best_split needs at least 2 samples, got {m}")
    features = np.arange(X.shape[1]) if candidate_features is None \
        else np.array(sorted(candidate_features), dtype=np.intp)
    if features.size == 0:
        return None

    yc = y - y.sum() / m
    total = yc.sum()
    parent = float(np.dot(yc, yc)) / m
    tol = GAIN_TIE_RTOL * parent

    # columns are candidate features, rows are sorted positions within each column
    Xf = X[:, features]
    order = np.argsort(Xf, axis=0, kind="stable")
    xs = Xf[order, np.arange(features.size)]
    valid = xs[1:] != xs[:-1]
    if not valid.any():
        return None
    s_left = np.cumsum(yc[order], axis=0)[:-1]
    n_left = np.arange(1, m)[:, None]
    n_right = m - n_left
    s_right = total - s_left
    # weighted variance reduction, written on centered targets
    gains = (s_left**2 / n_left + s_right**2 / n_right - total**2 / m) / m
    gains = np.where(valid, gains, -np.inf)
    top = float(gains.max())
    if top <= min_gain + tol:
        return None
    # feature-major scan: lowest feature first, then the smallest threshold
    near = (gains >= top - tol).T.ravel()
    j, k = divmod(int(np.argmax(near)), m - 1)
    return SplitCandidate(int(features[j]), float((xs[k, j] + xs[k + 1, j]) / 2),
                          float(gains[k, j]), k + 1, m - k - 1)


def fit_tree(matrix: FeatureMatrix, row_indices: Sequence[int],
             hyperparams: TreeHyperparams = TreeHyperparams(),
             feature_sampler: Optional[FeatureSampler] = None,
             targets=None) -> RegressionTree:
    """Grow a tree by recursive partitioning of the given rows.

    `row_indices` may contain repeats (bootstrap samples). `feature_sampler`
    maps the feature count to the candidate features for one node; None means
    all features. `targets` overrides the matrix targets (residual fitting).
    """
    idx = np.asarray(row_indices, dtype=np.intp)
    if idx.size == 0:
        raise ValueError("cannot fit a tree on an empty row set")
    X = matrix.rows[idx]
    y = (matrix.targets if targets is None else np.asarray(targets, dtype=float))[idx]
    p = matrix.p

    def grow(X: np.ndarray, y: np.ndarray, depth: int) -> TreeNode:
        m = y.size
        if (hyperparams.max_depth is not None and depth >= hyperparams.max_depth) \
                or m < hyperparams.min_samples_split or (y == y[0]).all():
            return Leaf(float(y.sum() / m), m)
        candidates = None if feature_sampler is None else feature_sampler(p)
        split = best_split(X, y, candidates, hyperparams.min_gain)
        if split is None:
            return Leaf(float(y.sum() / m), m)
        go_left = X[:, split.feature_index] <= split.threshold
        left = grow(X[go_left], y[go_left], depth + 1)
        right = grow(X[~go_left], y[~go_left], depth + 1)
        return Internal(split.feature_index, split.threshold, left, right, split.gain, m)

    return RegressionTree(grow(X, y, 0), tuple(matrix.feature_names), hyperparams)


def predict_tree(tree: RegressionTree, x) -> float:
    if len(x) != len(tree.feature_names):
        raise ValueError(f"expected {len(tree.feature_names)} features, got {len(x)}")
    node = tree.root
    while isinstance(node, Internal):
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node.prediction


def predict_tree_rows(tree: RegressionTree, rows) -> np.ndarray:
    """Vectorized predict_tree over the rows of a 2-D array."""
    X = np.asarray(rows, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(tree.feature_names):
        raise ValueError(f"expected shape (n, {len(tree.feature_names)}), got {X.shape}")
    out = np.empty(X.shape[0])
    stack = [(tree.root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out[idx] = node.prediction
            continue
        go_left = X[idx, node.feature_index] <= node.threshold
        stack.append((node.left, idx[go_left]))
        stack.append((node.right, idx[~go_left]))
    return out


def iter_internal(node: TreeNode):
    stack = [node]
    while stack:
        node = stack.pop()
        if isinstance(node, Internal):
            yield node
            stack.extend((node.right, node.left))


def tree_importances(tree: RegressionTree) -> np.ndarray:
    """Sample-weighted gain per feature, normalized to sum to 1 (or all zero)."""
    imp = np.zeros(len(tree.feature_names))
    root_n = tree.root.n
    for node in iter_internal(tree.root):
        imp[node.feature_index] += node.n / root_n * node.gain
    total = imp.sum()
    return imp / total if total > 0 else imp


def depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(depth(node.left), depth(node.right))


def count_leaves(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    return count_leaves(node.left) + count_leaves(node.right)


def render_tree_text(tree: RegressionTree, sink: TextIO, indent: str = "  ") -> None:
    """Write one line per node; children sit one indent level below their parent."""

    def walk(node: TreeNode, level: int) -> None:
        pad = indent * level
        if isinstance(node, Leaf):
            sink.write(f"{pad}-> {node.prediction:.3f} MPa (n={node.n})\n")
            return
        name = tree.feature_names[node.feature_index]
        sink.write(f"{pad}if {name} <= {node.threshold:g} (gain={node.gain:.6g}, n={node.n})\n")
        walk(node.left, level + 1)
        walk(node.right, level + 1)

    walk(tree.root, 0)
