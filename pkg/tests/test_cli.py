import json
from pathlib import Path

import pytest

from fllab.cli import build_parser, main


def run_cli(*argv):
    return main(list(argv))


def test_help_lists_catalog_with_tags():
    text = build_parser().format_help()
    assert "dyck1" in text and "tomita5" in text and "reset_dyck1" in text
    assert "non-star-free" in text and "counter" in text and "dot-depth" in text


def test_generate_and_exit_codes(tmp_path):
    out = tmp_path / "ds"
    assert run_cli("generate", "tomita2", "--seed", "7", "--out", str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["splits"]["train"]["count"] == 25  # all (10)^n with len in [2,50]
    assert run_cli("generate", "nosuchlang") == 2


def test_generate_respects_overrides(tmp_path):
    out = tmp_path / "ds"
    assert run_cli("generate", "dyck1", "--profile", "desk", "--train-size", "30",
                   "--bin-size", "8", "--seed", "1", "--out", str(out)) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["splits"]["train"]["count"] == 30
    assert manifest["splits"]["bin2"]["count"] == 8


def test_generate_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli("generate", "parity", "--profile", "desk", "--train-size", "20",
            "--bin-size", "5", "--seed", "3", "--out", str(a))
    run_cli("generate", "parity", "--profile", "desk", "--train-size", "20",
            "--bin-size", "5", "--seed", "3", "--out", str(b))
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["splits"]["train"]["sha256"] == mb["splits"]["train"]["sha256"]


def test_train_grid_viz_report_pipeline(tmp_path, capsys):
    data = tmp_path / "data"
    run_cli("generate", "tomita1", "--seed", "2", "--out", str(data))

    out = tmp_path / "single"
    code = run_cli("train", "tomita1", "--data", str(data), "--kind", "lstm",
                   "--d-model", "8", "--epochs", "8", "--seed", "4", "--out", str(out))
    assert code == 0
    run = json.loads((out / "run.json").read_text())
    assert run["language"] == "tomita1"
    assert (out / "checkpoint.npz").exists()

    grid_out = tmp_path / "grid"
    code = run_cli("grid", "tomita1", "--data", str(data), "--kind", "lstm",
                   "--budget", "2", "--epochs", "3", "--seed", "5", "--out", str(grid_out))
    assert code == 0
    index = json.loads((grid_out / "index.json").read_text())
    assert len(index["runs"]) == 2

    viz_out = tmp_path / "viz"
    code = run_cli("viz", str(out / "checkpoint.npz"), "tomita1",
                   "--words", "5", "--window", "2", "20", "--out", str(viz_out))
    assert code == 0
    assert (viz_out / "manifest.json").exists()

    tables = tmp_path / "tables"
    code = run_cli("report", "--results", str(tmp_path), "--out", str(tables))
    assert code == 0
    assert (tables / "table_regular_languages.csv").exists()


def test_train_missing_dataset_exits_2(tmp_path):
    assert run_cli("train", "dyck1", "--data", str(tmp_path / "nope")) == 2


def test_viz_vocab_mismatch_exits_2(tmp_path):
    data = tmp_path / "data"
    run_cli("generate", "tomita1", "--seed", "2", "--out", str(data))
    out = tmp_path / "single"
    run_cli("train", "tomita1", "--data", str(data), "--kind", "lstm",
            "--d-model", "4", "--epochs", "2", "--seed", "4", "--out", str(out))
    assert run_cli("viz", str(out / "checkpoint.npz"), "dyck1") == 2
    assert run_cli("viz", str(tmp_path / "missing.npz"), "dyck1") == 2


def test_config_file_defaults_and_unknown_keys(tmp_path):
    data = tmp_path / "data"
    run_cli("generate", "tomita1", "--seed", "2", "--out", str(data))
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"kind": "lstm", "d_model": 4, "epochs": 2,
                               "data": str(data), "out": str(tmp_path / "r")}))
    assert run_cli("train", "tomita1", "--config", str(cfg)) == 0
    saved = json.loads((tmp_path / "r" / "run.json").read_text())
    assert saved["config"]["kind"] == "lstm"
    # explicit flag beats the config file
    assert run_cli("train", "tomita1", "--config", str(cfg), "--epochs", "1",
                   "--out", str(tmp_path / "r2")) == 0
    saved2 = json.loads((tmp_path / "r2" / "run.json").read_text())
    assert saved2["epochs_run"] <= 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"no_such_key": 1}))
    assert run_cli("train", "tomita1", "--config", str(bad)) == 2


def test_verify_small_passes():
    assert main(["verify", "--max-len", "4", "--samples", "50", "--models", "2"]) == 0


def test_verify_detects_corruption():
    assert main(["verify", "--max-len", "4", "--samples", "50", "--models", "2",
                 "--corrupt-embed-sign"]) == 1
