import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fswml.dataset import Dataset, ProcessRecord, TOOL_MATERIALS, train_test_split
from fswml.evaluation import (
    evaluate,
    importance_over_seeds,
    mae,
    mse,
    r_squared,
    rank_features,
    summarize,
    sweep,
)
from fswml.models import ModelConfig

vectors = st.integers(1, 20).flatmap(lambda n: st.tuples(
    st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n),
    st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n),
))


def test_mse_examples():
    assert mse([1, 2, 3], [1, 2, 3]) == 0.0
    # (0-5)^2 and (10-5)^2 averaged
    assert mse([0, 10], [5, 5]) == 25.0


def test_mae_examples():
    assert mae([4, 4], [4, 4]) == 0.0
    assert mae([0, 10], [5, 5]) == 5.0


def test_r2_examples():
    assert r_squared([0, 10], [0, 10]) == 1.0
    assert r_squared([0, 10], [5, 5]) == 0.0
    # SS_res = 200, SS_tot = 50
    assert r_squared([0, 10], [10, 0]) == pytest.approx(-3.0, abs=1e-12)


def test_metric_errors():
    with pytest.raises(ValueError):
        mse([1, 2], [1])
    with pytest.raises(ValueError):
        mae([], [])
    with pytest.raises(ValueError):
        r_squared([3, 3, 3], [1, 2, 3])
    with pytest.raises(ValueError):
        r_squared([3], [3])


@settings(max_examples=100, deadline=None)
@given(vectors, st.randoms(use_true_random=False))
def test_metric_identities(pair, rnd):
    y, yhat = pair
    assert mae(y, yhat) ** 2 <= mse(y, yhat) * (1 + 1e-12) + 1e-12
    perm = list(range(len(y)))
    rnd.shuffle(perm)
    assert mse([y[i] for i in perm], [yhat[i] for i in perm]) == pytest.approx(mse(y, yhat), rel=1e-12, abs=1e-12)
    if len(set(y)) > 1 and np.var(y) > 1e-6:
        assert r_squared(y, y) == 1.0
        assert r_squared(y, [float(np.mean(y))] * len(y)) == pytest.approx(0.0, abs=1e-9)


def test_evaluate_deterministic(matrix):
    split = train_test_split(matrix, 0.2, 5)
    for kind in ("tree", "forest", "gbm"):
        cfg = ModelConfig(n_trees=10, n_stages=10)
        a = evaluate(kind, matrix, split, cfg)
        b = evaluate(kind, matrix, split, cfg)
        assert a == b
        assert a.n_test == 10 and a.model_kind == kind and a.seed == 5
        assert a.mse >= 0 and a.mae >= 0 and a.r2 <= 1 and a.mae ** 2 <= a.mse


def test_evaluate_unknown_kind(matrix):
    with pytest.raises(ValueError):
        evaluate("svm", matrix, train_test_split(matrix, 0.2, 0))


def test_sweep_seeds_and_summary(matrix):
    report = sweep("tree", matrix, 5, first_seed=10)
    assert report.seeds == (10, 11, 12, 13, 14)
    assert [r.seed for r in report.reports] == list(report.seeds)
    s = report.summary()
    assert s["r2"]["p5"] <= s["r2"]["p50"] <= s["r2"]["p95"]
    assert s["mse"]["p50"] == report.median("mse")


def test_summarize_embedded(dataset):
    stats = summarize(dataset)
    cols = {c.name: c for c in stats.columns}
    assert cols["uts"].min == 231 and cols["uts"].max == 292
    assert {r.rotational_speed for r in dataset.records} == {900, 1200, 1500}
    assert stats.correlations["rotational_speed"] > 0
    assert stats.tool_counts == {"H13": 17, "C40": 17, "HSS": 18}
    assert stats.n == 52


@settings(max_examples=40, deadline=None)
@given(st.lists(st.builds(ProcessRecord, st.sampled_from(TOOL_MATERIALS),
                          st.floats(0.1, 2000), st.floats(0.1, 100),
                          st.floats(0.1, 10), st.floats(1, 400)), min_size=1, max_size=15))
def test_summarize_invariants(records):
    stats = summarize(Dataset(tuple(records), "h"))
    for c in stats.columns:
        assert c.min <= c.mean <= c.max
    assert all(-1 <= v <= 1 for v in stats.correlations.values())


def test_rank_sorted_input():
    report = rank_features([0.7, 0.2, 0.1], ["a", "b", "c"])
    assert report.entries == (("a", 0.7), ("b", 0.2), ("c", 0.1))


def test_rank_merges_tool_columns():
    names = ["rotational_speed", "welding_speed", "axial_force", "tool=H13", "tool=C40", "tool=HSS"]
    report = rank_features([0.5, 0.2, 0.1, 0.05, 0.1, 0.05], names)
    assert [n for n, _ in report.entries] == ["rotational_speed", "welding_speed", "tool_material", "axial_force"]
    assert dict(report.entries)["tool_material"] == pytest.approx(0.2)


def test_rank_tie_break_by_index():
    report = rank_features([0.0, 0.0, 0.0], ["a", "b", "c"])
    assert report.entries == (("a", 0.0), ("b", 0.0), ("c", 0.0))
    report = rank_features([0.25, 0.5, 0.25], ["a", "b", "c"])
    assert [n for n, _ in report.entries] == ["b", "a", "c"]


def test_rank_mismatch():
    with pytest.raises(ValueError):
        rank_features([0.1], ["a", "b"])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=8))
def test_rank_is_permutation(values):
    names = [f"f{i}" for i in range(len(values))]
    report = rank_features(values, names)
    assert sorted(report.entries) == sorted(zip(names, values))
    assert sum(v for _, v in report.entries) == pytest.approx(sum(values))
    vals = [v for _, v in report.entries]
    assert vals == sorted(vals, reverse=True)


def test_importance_over_seeds_ranking(matrix_tool):
    report = importance_over_seeds("forest", matrix_tool, range(3), ModelConfig(n_trees=20))
    names = [n for n, _ in report.entries]
    assert names[0] == "rotational_speed"
    assert set(names) == {"rotational_speed", "welding_speed", "axial_force", "tool_material"}
    assert sum(v for _, v in report.entries) == pytest.approx(1.0)
