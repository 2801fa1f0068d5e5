import json

import pytest

from qgafkit.config import check_config, from_dict, load_config, load_schema
from qgafkit.errors import ValidationError


def test_schema_loads():
    assert load_schema()["type"] == "object"


def test_defaults():
    cfg = from_dict({})
    assert cfg.window.window_size == 30 and cfg.window.stride == 10
    assert cfg.encoder.shots == 1024 and cfg.encoder.sign_mode == "analytic"
    assert cfg.train.epochs == 100 and cfg.train.folds == 5
    assert cfg.compare_encoders == ("gasf", "qgasf")


def test_seed_flows_into_training():
    cfg = from_dict({"seed": 9})
    assert (cfg.train.shuffle_seed, cfg.train.init_seed) == (9, 9)
    cfg = from_dict({"seed": 9, "train": {"shuffle_seed": 1}})
    assert (cfg.train.shuffle_seed, cfg.train.init_seed) == (1, 9)


def test_relative_paths_and_names(tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"data": [{"path": "data/AAPL.csv"},
                                                           {"name": "b", "url": "http://x/y.csv"}]}))
    cfg = load_config(tmp_path / "cfg.json")
    assert cfg.sources[0].path == str(tmp_path / "data/AAPL.csv")
    assert cfg.sources[0].name == "AAPL"
    assert cfg.sources[1].name == "b"


@pytest.mark.parametrize("raw", [
    {"unknown": 1},
    {"window": {"stride": 0}},
    {"encoder": {"kind": "mtf"}},
    {"data": {"name": "x"}},
    {"data": {"path": "a", "url": "b"}},
    {"compare": {"encoders": ["gasf"]}},
    {"train": {"loss": "huber"}},
    {"seed": -1},
])
def test_schema_rejections(raw):
    assert check_config(raw)
    with pytest.raises(ValidationError):
        from_dict(raw)


def test_duplicate_source_names():
    with pytest.raises(ValidationError, match="unique"):
        from_dict({"data": [{"path": "a/x.csv"}, {"path": "b/x.csv"}]})


def test_semantic_errors_after_schema():
    with pytest.raises(ValidationError):
        from_dict({"window": {"window_size": 10, "stride": 20}})


def test_hash_ignores_output_and_location():
    a = from_dict({"data": {"name": "s", "path": "/a.csv"}, "out": "x"})
    b = from_dict({"data": {"name": "s", "path": "/b.csv"}, "out": "y"})
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != from_dict({"data": {"name": "s", "path": "/a.csv"}, "seed": 1}).config_hash()
    assert a.config_hash() != a.with_encoder("gasf").config_hash()


def test_ranges_merge_and_loss_case():
    cfg = from_dict({"imaging": {"ranges": {"QGASF": [0.9, 1.0]}}, "train": {"loss": "mae"}})
    assert cfg.imaging.ranges["QGASF"] == (0.9, 1.0)
    assert cfg.imaging.ranges["GASF"] == (-1.0, 1.0)
    assert cfg.train.loss == "MAE"


def test_folds_imply_train_fraction():
    assert from_dict({"train": {"folds": 4}}).train.train_fraction == 0.75


def test_shipped_config_is_valid():
    from pathlib import Path
    raw = json.loads((Path(__file__).parents[1] / "configs" / "desk.json").read_text())
    assert check_config(raw) == []
