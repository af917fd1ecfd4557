"""Regression metrics, train/evaluate loops, summary statistics and importance ranking."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import NUMERIC_FEATURES, TOOL_MATERIALS, Dataset, FeatureMatrix, SplitPair, train_test_split
from .models import ModelConfig, fit_model, importances, predict_rows


def _pair(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.shape} vs {yhat.shape}")
    if y.size == 0:
        raise ValueError("metrics need at least one observation")
    return y, yhat


def mse(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.mean((y - yhat) ** 2))


def mae(y, yhat) -> float:
    y, yhat = _pair(y, yhat)
    return float(np.mean(np.abs(y - yhat)))


def r_squared(y, yhat) -> float:
    """1 - SS_res / SS_tot, with SS_tot taken about the mean of `y` itself."""
    y, yhat = _pair(y, yhat)
    if y.size < 2:
        raise ValueError("R^2 needs at least two observations")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0:
        raise ValueError("R^2 is undefined for constant targets (SS_tot = 0)")
    return 1.0 - float(np.sum((y - yhat) ** 2)) / ss_tot


@dataclass(frozen=True)
class MetricsReport:
    mse: float
    mae: float
    r2: float
    n_test: int
    model_kind: str
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(model_kind: str, matrix: FeatureMatrix, split: SplitPair,
             config: ModelConfig = ModelConfig()) -> MetricsReport:
    """Train on the split's train rows and score on its test rows.

    The split seed doubles as the forest master seed.
    """
    model = fit_model(model_kind, matrix, split.train_indices, config, seed=split.seed)
    test = np.asarray(split.test_indices, dtype=np.intp)
    y = matrix.targets[test]
    yhat = predict_rows(model, matrix.rows[test])
    return MetricsReport(mse(y, yhat), mae(y, yhat), r_squared(y, yhat), int(test.size),
                         model_kind, split.seed)


PERCENTILES = (5, 25, 50, 75, 95)


@dataclass(frozen=True)
class SweepReport:
    model_kind: str
    seeds: tuple[int, ...]
    reports: tuple[MetricsReport, ...]

    def values(self, metric: str) -> np.ndarray:
        return np.array([getattr(r, metric) for r in self.reports])

    def percentile(self, metric: str, q: float) -> float:
        return float(np.percentile(self.values(metric), q))

    def median(self, metric: str) -> float:
        return float(np.median(self.values(metric)))

    def summary(self) -> dict:
        out = {}
        for metric in ("mse", "mae", "r2"):
            v = self.values(metric)
            out[metric] = {
                "mean": float(v.mean()),
                "min": float(v.min()),
                "max": float(v.max()),
                **{f"p{q}": float(np.percentile(v, q)) for q in PERCENTILES},
            }
        return out


def sweep(model_kind: str, matrix: FeatureMatrix, n_seeds: int, test_ratio: float = 0.2,
          config: ModelConfig = ModelConfig(), first_seed: int = 0) -> SweepReport:
    """Evaluate over seeds first_seed .. first_seed + n_seeds - 1."""
    if n_seeds < 1:
        raise ValueError(f"n_seeds must be >= 1, got {n_seeds}")
    seeds = tuple(range(first_seed, first_seed + n_seeds))
    reports = tuple(
        evaluate(model_kind, matrix, train_test_split(matrix, test_ratio, s), config) for s in seeds
    )
    return SweepReport(model_kind, seeds, reports)


@dataclass(frozen=True)
class ColumnStats:
    name: str
    min: float
    max: float
    mean: float
    std: float


@dataclass(frozen=True)
class SummaryStats:
    columns: tuple[ColumnStats, ...]
    correlations: dict
    tool_counts: dict
    n: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "columns": [asdict(c) for c in self.columns],
            "correlation_with_uts": dict(self.correlations),
            "tool_counts": dict(self.tool_counts),
        }


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    da, db = a - a.mean(), b - b.mean()
    denom = np.sqrt(np.sum(da * da) * np.sum(db * db))
    if denom == 0:
        return 0.0
    return float(np.clip(np.sum(da * db) / denom, -1.0, 1.0))


def summarize(dataset: Dataset) -> SummaryStats:
    """Per-column min/max/mean/sample std and Pearson correlation with UTS.

    A constant column reports correlation 0.
    """
    if len(dataset) == 0:
        raise ValueError("cannot summarize an empty dataset")
    cols = {name: np.array([getattr(r, name) for r in dataset.records], dtype=float)
            for name in NUMERIC_FEATURES + ("uts",)}
    stats = []
    for name, v in cols.items():
        std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
        # clip guards min <= mean <= max against last-bit rounding
        mean = float(np.clip(np.mean(v), v.min(), v.max()))
        stats.append(ColumnStats(name, float(v.min()), float(v.max()), mean, std))
    corr = {name: _pearson(cols[name], cols["uts"]) for name in NUMERIC_FEATURES}
    counts = {t: sum(r.tool_material == t for r in dataset.records) for t in TOOL_MATERIALS}
    return SummaryStats(tuple(stats), corr, counts, len(dataset))


@dataclass(frozen=True)
class ImportanceReport:
    entries: tuple[tuple[str, float], ...]
    model_kind: str

    def to_dict(self) -> dict:
        return {"model_kind": self.model_kind,
                "importances": [{"feature": f, "importance": v} for f, v in self.entries]}


def rank_features(importances: Sequence[float], names: Sequence[str],
                  model_kind: str = "forest") -> ImportanceReport:
    """Sort descending, ties by original index; `tool=*` one-hot columns merge into `tool_material`."""
    if len(importances) != len(names):
        raise ValueError(f"{len(importances)} importances for {len(names)} feature names")
    merged: list[list] = []
    tool_slot: Optional[int] = None
    for name, value in zip(names, importances):
        if name.startswith("tool="):
            if tool_slot is None:
                tool_slot = len(merged)
                merged.append(["tool_material", 0.0])
            merged[tool_slot][1] += float(value)
        else:
            merged.append([name, float(value)])
    order = sorted(range(len(merged)), key=lambda i: (-merged[i][1], i))
    return ImportanceReport(tuple((merged[i][0], merged[i][1]) for i in order), model_kind)


def importance_over_seeds(model_kind: str, matrix: FeatureMatrix, seeds: Sequence[int],
                          config: ModelConfig = ModelConfig()) -> ImportanceReport:
    """Per-feature median of ranked importances from models fit on every row.

    Tool columns are merged per seed before taking medians; the medians are
    renormalized to sum to 1.
    """
    if not seeds:
        raise ValueError("need at least one seed")
    everything = range(matrix.n)
    per_seed = []
    for s in seeds:
        model = fit_model(model_kind, matrix, everything, config, seed=s)
        per_seed.append(dict(rank_features(importances(model), matrix.feature_names).entries))
    names = list(per_seed[0])
    # keep column order for the tie-break, not the seed-0 ranking
    names.sort(key=lambda n: _column_position(n, matrix.feature_names))
    med = np.array([np.median([d[n] for d in per_seed]) for n in names])
    if med.sum() > 0:
        med = med / med.sum()
    return rank_features(med, names, model_kind)


def _column_position(name: str, feature_names: Sequence[str]) -> int:
    if name == "tool_material":
        return next(i for i, f in enumerate(feature_names) if f.startswith("tool="))
    return list(feature_names).index(name)
