# -*- coding: utf-8 -*-
"""
Tests for the key = value configuration layer.
"""

import pytest

from src.config import DEFAULT_CONFIG, PROJECT_ROOT, Config, load_config, parse_config_text
from src.exceptions import ConfigError


def test_defaults():
    cfg = Config()
    assert cfg["hash.levels"] == 8
    assert cfg["train.fine.lambda"] == pytest.approx(0.001)
    assert cfg.as_dict() == DEFAULT_CONFIG


def test_set_coerces_strings():
    cfg = Config()
    cfg.set("hash.levels", "4")
    cfg.set("hash.per_level_scale", "1.5")
    cfg.set("field.use_blink", "off")
    cfg.set("synth.background", "0.5, 0.5, 1.0")
    cfg.set("train.lr.mlp", 1)
    assert cfg["hash.levels"] == 4
    assert cfg["hash.per_level_scale"] == 1.5
    assert cfg["field.use_blink"] is False
    assert cfg["synth.background"] == (0.5, 0.5, 1.0)
    assert isinstance(cfg["train.lr.mlp"], float)


def test_unknown_key():
    with pytest.raises(ConfigError):
        Config({"hash.colours": 3})
    with pytest.raises(ConfigError):
        Config()["nope"]


def test_bad_values():
    cfg = Config()
    with pytest.raises(ConfigError):
        cfg.set("hash.levels", "many")
    with pytest.raises(ConfigError):
        cfg.set("field.use_blink", "maybe")
    with pytest.raises(ConfigError):
        cfg.set("synth.background", "1.0, 1.0")


def test_section():
    synth = Config().section("synth")
    assert synth["frames"] == 60
    assert "seed" in synth
    assert not any("." in k for k in synth)


def test_parse_config_text():
    text = "# 注释\nhash.levels = 4   # 行尾注释\n\n  train.seed=3\n"
    assert parse_config_text(text) == {"hash.levels": "4", "train.seed": "3"}
    with pytest.raises(ConfigError) as exc:
        parse_config_text("hash.levels 4", origin="x.cfg")
    assert "x.cfg:1" in str(exc.value)
    with pytest.raises(ConfigError):
        parse_config_text("hash.colours = 3")


def test_load_config_with_overrides(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("hash.levels = 4\ntrain.seed = 3\n", encoding="utf-8")
    cfg = load_config(path, {"train.seed": 9})
    assert cfg["hash.levels"] == 4
    assert cfg["train.seed"] == 9
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_shipped_config_parses():
    cfg = load_config(PROJECT_ROOT / "configs" / "synthetic.cfg")
    assert cfg["synth.image_size"] == 64
    assert cfg["render.workers"] == 2
