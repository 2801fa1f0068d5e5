import json

import numpy as np
import pytest

from qgafkit.cli import main
from qgafkit.imaging import read_archive


@pytest.fixture
def prices(tmp_path):
    assert main(["synth", str(tmp_path / "p.csv"), "-n", "400", "--seed", "1"]) == 0
    return tmp_path / "p.csv"


def test_ingest(three_row_csv, tmp_path, capsys):
    assert main(["ingest", "--data", str(three_row_csv), "--out", str(tmp_path / "o")]) == 0
    assert len((tmp_path / "o" / "prices" / "returns.csv").read_text().splitlines()) == 3
    assert "2 returns" in capsys.readouterr().out


def test_unreadable_path_exit_2(tmp_path, capsys):
    assert main(["ingest", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_parse_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,close\n2020-13-40,1\n")
    assert main(["ingest", "--data", str(bad), "--out", str(tmp_path)]) == 2
    assert "bad.csv:2" in capsys.readouterr().err


def test_bad_config_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"window": {"stride": 0}}))
    assert main(["report", "--check-config", str(cfg)]) == 2
    assert "stride" in capsys.readouterr().err
    cfg.write_text("{not json")
    assert main(["encode", "--config", str(cfg)]) == 2
    assert main(["encode", "--config", str(tmp_path / "missing.json")]) == 2


def test_check_config_ok(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 3}))
    assert main(["report", "--check-config", str(cfg)]) == 0
    assert main(["report", "--schema"]) == 0
    assert '"$schema"' in capsys.readouterr().out


def test_no_source_exit_2(tmp_path):
    assert main(["encode", "--out", str(tmp_path)]) == 2


def test_empty_archive_dir_exit_2(tmp_path):
    (tmp_path / "a").mkdir()
    assert main(["train", "--archives", str(tmp_path / "a"), "--epochs", "1"]) == 2


def test_unexpected_failure_exit_1(monkeypatch, tmp_path):
    from qgafkit import pipeline

    def boom(*a, **k):
        raise RuntimeError("kaboom")
    monkeypatch.setattr(pipeline, "ingest", boom)
    assert main(["ingest", "--data", str(tmp_path / "x.csv"), "--out", str(tmp_path)]) == 1


def test_encode_exact_flag(prices, tmp_path):
    out = tmp_path / "o"
    assert main(["encode", "--data", str(prices), "--out", str(out), "--encoder", "qgasf", "--exact"]) == 0
    manifest = json.loads((out / "p" / "qgasf" / "archives" / "manifest.json").read_text())
    assert manifest["qgaf"]["exact"] is True and manifest["count"] == 38
    returns = np.loadtxt(out / "p" / "returns.csv", delimiter=",", skiprows=1, usecols=1)
    w = returns[100:130]
    fld, _ = read_archive(out / "p" / "qgasf" / "archives" / "win_100.qgaf")
    assert np.max(np.abs(fld.matrix - np.cos(np.add.outer(w, w)))) <= 1e-7


def test_train_then_report_runs(prices, tmp_path, capsys):
    out = tmp_path / "o"
    for enc in ("gasf", "qgasf"):
        assert main(["encode", "--data", str(prices), "--out", str(out), "--encoder", enc]) == 0
        assert main(["train", "--archives", str(out / "p" / enc / "archives"), "--epochs", "2",
                     "--out", str(out)]) == 0
    assert len(list((out / "p" / "gasf" / "train").glob("fold_*.csv"))) == 5
    assert main(["report", "--runs", str(out / "p" / "gasf" / "train"), str(out / "p" / "qgasf" / "train"),
                 "--stock", "P", "--out", str(tmp_path / "cmp")]) == 0
    assert "| GASF |" in capsys.readouterr().out
    assert (tmp_path / "cmp" / "loss_train_P.svg").exists()
    # a run trained with another split seed is refused
    assert main(["train", "--archives", str(out / "p" / "qgasf" / "archives"), "--epochs", "2",
                 "--seed", "5"]) == 0
    assert main(["report", "--runs", str(out / "p" / "gasf" / "train"),
                 str(out / "p" / "qgasf" / "train")]) == 2


def test_compare_cli(prices, tmp_path, capsys):
    assert main(["compare", "--data", str(prices), "--out", str(tmp_path / "o"), "--epochs", "2"]) == 0
    text = capsys.readouterr().out
    assert "Average reduction" in text
    assert (tmp_path / "o" / "comparison" / "table.csv").exists()


def test_synth_creates_missing_directories(tmp_path):
    target = tmp_path / "a" / "b" / "prices.csv"
    assert main(["synth", str(target), "-n", "50"]) == 0
    assert len(target.read_text().splitlines()) == 52
