"""Uniform fit/predict/importance entry points over the three model kinds."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

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
from .ensemble import (
    ForestModel,
    GbmModel,
    fit_forest,
    fit_gbm,
    forest_importances,
    gbm_importances,
    predict_forest,
    predict_forest_rows,
    predict_gbm,
    predict_gbm_rows,
)

MODEL_KINDS = ("tree", "forest", "gbm")

Model = Union[RegressionTree, ForestModel, GbmModel]


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters for all kinds; each kind reads only its own fields.

    `max_depth` applies to the tree and forest; boosting stages use
    `stage_max_depth`. `max_features=None` means all features.
    """

    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_gain: float = 0.0
    n_trees: int = 100
    max_features: Optional[int] = None
    n_stages: int = 100
    learning_rate: float = 0.1
    stage_max_depth: Optional[int] = 3

    def tree_hyperparams(self) -> TreeHyperparams:
        return TreeHyperparams(self.max_depth, self.min_samples_split, self.min_gain)

    def stage_hyperparams(self) -> TreeHyperparams:
        return TreeHyperparams(self.stage_max_depth, self.min_samples_split, self.min_gain)


def model_kind(model: Model) -> str:
    if isinstance(model, RegressionTree):
        return "tree"
    if isinstance(model, ForestModel):
        return "forest"
    if isinstance(model, GbmModel):
        return "gbm"
    raise TypeError(f"not a fitted model: {type(model).__name__}")


def fit_model(kind: str, matrix: FeatureMatrix, train_indices: Sequence[int],
              config: ModelConfig = ModelConfig(), seed: int = 0) -> Model:
    if kind == "tree":
        return fit_tree(matrix, train_indices, config.tree_hyperparams())
    if kind == "forest":
        return fit_forest(matrix, train_indices, config.n_trees, config.tree_hyperparams(),
                          config.max_features, seed)
    if kind == "gbm":
        return fit_gbm(matrix, train_indices, config.n_stages, config.learning_rate,
                       config.stage_hyperparams())
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def predict(model: Model, x) -> float:
    kind = model_kind(model)
    if kind == "tree":
        return predict_tree(model, x)
    if kind == "forest":
        return predict_forest(model, x)
    return predict_gbm(model, x)


def predict_rows(model: Model, rows) -> np.ndarray:
    kind = model_kind(model)
    if kind == "tree":
        return predict_tree_rows(model, rows)
    if kind == "forest":
        return predict_forest_rows(model, rows)
    return predict_gbm_rows(model, rows)


def feature_names(model: Model) -> tuple[str, ...]:
    return tuple(model.feature_names)


def importances(model: Model) -> np.ndarray:
    kind = model_kind(model)
    if kind == "tree":
        return tree_importances(model)
    if kind == "forest":
        return forest_importances(model)
    return gbm_importances(model)
