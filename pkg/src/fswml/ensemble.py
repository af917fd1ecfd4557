"""Bagged random forests and squared-loss gradient boosting built on cart."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .cart import (
    RegressionTree,
    TreeHyperparams,
    fit_tree,
    predict_tree,
    predict_tree_rows,
    tree_importances,
)
from .dataset import FeatureMatrix
from .rng import Xoshiro256, seed_chain


@dataclass(frozen=True)
class BootstrapSample:
    indices: tuple[int, ...]
    seed: int


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[RegressionTree, ...]
    tree_seeds: tuple[int, ...]
    max_features: int
    n_trees: int
    master_seed: int
    feature_names: tuple[str, ...]
    hyperparams: TreeHyperparams = TreeHyperparams()
    bootstrap: bool = True


@dataclass(frozen=True)
class GbmModel:
    initial: float
    stages: tuple[RegressionTree, ...]
    learning_rate: float
    n_stages: int
    feature_names: tuple[str, ...]
    hyperparams: TreeHyperparams = TreeHyperparams(max_depth=3)


def bootstrap_sample(population: Sequence[int], rng: Xoshiro256, seed: int = 0) -> BootstrapSample:
    """len(population) draws with replacement, in draw order."""
    n = len(population)
    return BootstrapSample(tuple(population[rng.below(n)] for _ in range(n)), seed)


def _fit_one(matrix: FeatureMatrix, train: Sequence[int], hyperparams: TreeHyperparams,
             max_features: int, seed: int, bootstrap: bool) -> RegressionTree:
    rng = Xoshiro256(seed)
    rows = bootstrap_sample(train, rng, seed).indices if bootstrap else train
    sampler = None
    if max_features < matrix.p:
        sampler = lambda p: rng.sample(p, max_features)  # noqa: E731
    return fit_tree(matrix, rows, hyperparams, sampler)


def fit_forest(matrix: FeatureMatrix, train_indices: Sequence[int], n_trees: int = 100,
               hyperparams: TreeHyperparams = TreeHyperparams(),
               max_features: Optional[int] = None, master_seed: int = 0,
               bootstrap: bool = True) -> ForestModel:
    """Fit `n_trees` trees, tree i on a bootstrap drawn from its own seed.

    Tree seeds come from a splitmix64 chain over `master_seed`; each tree's
    xoshiro stream first draws its bootstrap sample, then (only when
    max_features < p) one feature subset per node in depth-first order.
    `bootstrap=False` trains every tree on the train rows as given.
    """
    train = tuple(int(i) for i in train_indices)
    if not train:
        raise ValueError("cannot fit a forest on an empty training set")
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1, got {n_trees}")
    max_features = matrix.p if max_features is None else max_features
    if not 1 <= max_features <= matrix.p:
        raise ValueError(f"max_features must lie in [1, {matrix.p}], got {max_features}")
    seeds = tuple(seed_chain(master_seed, n_trees))
    trees = tuple(_fit_one(matrix, train, hyperparams, max_features, s, bootstrap) for s in seeds)
    return ForestModel(trees, seeds, max_features, n_trees, master_seed,
                       tuple(matrix.feature_names), hyperparams, bootstrap)


def predict_forest(model: ForestModel, x) -> float:
    # sequential accumulation keeps this bit-identical to predict_forest_rows
    total = 0.0
    for tree in model.trees:
        total += predict_tree(tree, x)
    return total / len(model.trees)


def predict_forest_rows(model: ForestModel, rows) -> np.ndarray:
    total = np.zeros(np.asarray(rows).shape[0])
    for tree in model.trees:
        total += predict_tree_rows(tree, rows)
    return total / len(model.trees)


def fit_gbm(matrix: FeatureMatrix, train_indices: Sequence[int], n_stages: int = 100,
            learning_rate: float = 0.1,
            stage_hyperparams: TreeHyperparams = TreeHyperparams(max_depth=3)) -> GbmModel:
    """Stagewise boosting: each stage fits the current residuals y - F."""
    train = np.asarray(train_indices, dtype=np.intp)
    if train.size == 0:
        raise ValueError("cannot fit boosting on an empty training set")
    if n_stages < 0:
        raise ValueError(f"n_stages must be >= 0, got {n_stages}")
    if not 0 < learning_rate <= 1:
        raise ValueError(f"learning_rate must lie in (0, 1], got {learning_rate}")
    y = matrix.targets
    initial = float(np.mean(y[train]))
    F = np.full(matrix.n, initial)
    residuals = np.zeros(matrix.n)
    stages = []
    for _ in range(n_stages):
        residuals[train] = y[train] - F[train]
        tree = fit_tree(matrix, train, stage_hyperparams, targets=residuals)
        stages.append(tree)
        F[train] += learning_rate * predict_tree_rows(tree, matrix.rows[train])
    return GbmModel(initial, tuple(stages), learning_rate, n_stages,
                    tuple(matrix.feature_names), stage_hyperparams)


def predict_gbm(model: GbmModel, x) -> float:
    if len(x) != len(model.feature_names):
        raise ValueError(f"expected {len(model.feature_names)} features, got {len(x)}")
    total = 0.0
    for stage in model.stages:
        total += predict_tree(stage, x)
    return model.initial + model.learning_rate * total


def predict_gbm_rows(model: GbmModel, rows) -> np.ndarray:
    X = np.asarray(rows, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(model.feature_names):
        raise ValueError(f"expected shape (n, {len(model.feature_names)}), got {X.shape}")
    total = np.zeros(X.shape[0])
    for stage in model.stages:
        total += predict_tree_rows(stage, X)
    return model.initial + model.learning_rate * total


def _mean_importance(trees: Sequence[RegressionTree], p: int) -> np.ndarray:
    if not trees:
        return np.zeros(p)
    imp = np.mean([tree_importances(t) for t in trees], axis=0)
    total = imp.sum()
    return imp / total if total > 0 else imp


def forest_importances(model: ForestModel) -> np.ndarray:
    return _mean_importance(model.trees, len(model.feature_names))


def gbm_importances(model: GbmModel) -> np.ndarray:
    return _mean_importance(model.stages, len(model.feature_names))
