import io
import json
import subprocess
import sys

import pytest

from fswml.cli import main, parse_args, run_pipeline
from fswml.dataset import EMBEDDED_CSV
from fswml.serialize import load_model


def run(argv):
    cfg = parse_args(argv)
    buf = io.StringIO()
    status = run_pipeline(cfg, buf)
    return status, buf.getvalue()


def test_parse_train_forest():
    cfg = parse_args(["train", "--model", "forest", "--seed", "42"])
    assert (cfg.command, cfg.model_kind, cfg.seed, cfg.test_ratio) == ("train", "forest", 42, 0.2)
    assert cfg.model.n_trees == 100 and cfg.model.max_depth is None


def test_parse_max_depth_variants():
    assert parse_args(["evaluate", "--max-depth", "4"]).model.max_depth == 4
    assert parse_args(["evaluate", "--max-depth", "none"]).model.max_depth is None
    gbm = parse_args(["evaluate", "--model", "gbm", "--max-depth", "2"]).model
    assert gbm.stage_max_depth == 2
    assert parse_args(["evaluate", "--model", "gbm"]).model.stage_max_depth == 3


def test_parse_defaults_per_command():
    assert parse_args(["recommend"]).model_kind == "forest"
    assert parse_args(["sweep"]).n_seeds == 200


@pytest.mark.parametrize("argv", [
    ["evaluate", "--test-ratio", "1.5"],
    ["frobnicate"],
    ["evaluate", "--bogus"],
    ["evaluate", "--seed", "-1"],
    ["evaluate", "--learning-rate", "0"],
])
def test_usage_errors_exit_2(argv):
    assert main(argv) == 2


def test_no_arguments_exit_2(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_data_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text(EMBEDDED_CSV.replace("H13,900,25,2,251", "X99,900,25,2,251"))
    assert main(["evaluate", "--dataset", str(bad)]) == 1
    assert "X99" in capsys.readouterr().err


def test_missing_file_exit_1():
    assert main(["ingest", "--dataset", "/nonexistent/file.csv"]) == 1


def test_ingest_writes_csv(tmp_path):
    out = tmp_path / "copy.csv"
    status, text = run(["ingest", "--out", str(out)])
    assert status == 0 and "52 records" in text
    assert out.read_text() == EMBEDDED_CSV


def test_audit_embedded(tmp_path):
    status, text = run(["audit", "--json"])
    doc = json.loads(text)
    assert status == 0
    assert doc["result"]["missing"]["missing_cells"] == 0
    assert doc["result"]["summary"]["n"] == 52


def test_audit_reports_blank_cell(tmp_path):
    path = tmp_path / "gap.csv"
    path.write_text(EMBEDDED_CSV.replace("C40,1200,35,3,258", "C40,1200,35,3,"))
    status, text = run(["audit", "--dataset", str(path), "--json"])
    doc = json.loads(text)
    assert status == 1
    assert doc["result"]["missing"]["locations"] == [{"row": 30, "column": "uts_mpa"}]


def test_evaluate_json():
    status, text = run(["evaluate", "--model", "tree", "--seed", "3", "--json"])
    doc = json.loads(text)
    assert status == 0 and doc["format_version"] == 1
    assert set(doc["result"]) == {"mse", "mae", "r2", "n_test", "model_kind", "seed"}
    assert doc["result"]["n_test"] == 10


def test_train_then_render_and_recommend(tmp_path):
    model_path = tmp_path / "tree.json"
    status, _ = run(["train", "--model", "tree", "--seed", "1", "--out", str(model_path)])
    assert status == 0
    model = load_model(model_path)
    doc = json.loads(model_path.read_text())
    assert doc["fingerprint"]["seed"] == 1 and len(doc["fingerprint"]["train_indices"]) == 42
    status, text = run(["render", "--load", str(model_path)])
    assert status == 0 and text.startswith("if rotational_speed <=")
    status, text = run(["recommend", "--load", str(model_path), "--json"])
    rec = json.loads(text)["result"]
    assert status == 0 and rec["setting"]["rotational_speed"] == 1500.0
    assert model.feature_names[0] == "rotational_speed"


def test_render_ensemble_member():
    status, text = run(["render", "--model", "gbm", "--stages", "3", "--tree-index", "2"])
    assert status == 0 and "MPa" in text
    assert main(["render", "--model", "gbm", "--stages", "3", "--tree-index", "5"]) == 1


def test_importance_svg(tmp_path):
    svg = tmp_path / "imp.svg"
    status, text = run(["importance", "--include-tool", "--trees", "10", "--svg", str(svg)])
    assert status == 0 and text.splitlines()[2].split()[1] == "rotational_speed"
    body = svg.read_text()
    assert body.startswith("<svg") and body.count("<rect") == 4


def test_recommend_dense():
    status, text = run(["recommend", "--trees", "10", "--dense", "4", "--top", "2", "--json"])
    rec = json.loads(text)["result"]
    assert status == 0 and len(rec["runner_ups"]) == 2


def test_sweep_small():
    status, text = run(["sweep", "--model", "tree", "--seeds", "4", "--json"])
    doc = json.loads(text)["result"]
    assert doc["seeds"] == [0, 1, 2, 3] and len(doc["runs"]) == 4
    assert set(doc["summary"]) == {"mse", "mae", "r2"}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fswml", "evaluate", "--seed", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "tree" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "fswml"], capture_output=True, text=True)
    assert proc.returncode == 2
