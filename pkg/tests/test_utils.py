# -*- coding: utf-8 -*-
"""
Tests for utils module.
"""

import json

import numpy as np
import pytest

from src.exceptions import DatasetError, ShapeError
from src.utils import (
    bytes_to_human,
    ensure_dir,
    format_number,
    load_json,
    load_png,
    load_raw_float32,
    save_csv,
    save_json,
    save_png,
    save_raw_float32,
    to_uint8,
)


def test_format_number():
    assert format_number(1500) == "1.5K"
    assert format_number(2_000_000) == "2.0M"
    assert format_number(12) == "12"
    assert format_number(0.5, precision=2) == "0.50"
    assert format_number(float("inf")) == "+inf"


def test_bytes_to_human():
    assert bytes_to_human(512) == "512.0B"
    assert bytes_to_human(2048) == "2.0KB"


def test_ensure_dir(tmp_path):
    path = ensure_dir(tmp_path / "a" / "b")
    assert path.is_dir()


def test_json_round_trip(tmp_path):
    path = save_json({"b": np.float32(1.5), "a": np.arange(3), "p": tmp_path}, tmp_path / "x.json")
    data = load_json(path)
    assert data == {"a": [0, 1, 2], "b": 1.5, "p": str(tmp_path)}
    assert list(json.loads(path.read_text(encoding="utf-8"))) == ["a", "b", "p"]
    assert load_json(tmp_path / "missing.json") is None


def test_save_csv_columns(tmp_path):
    path = save_csv([{"b": 2, "a": 1}], tmp_path / "t.csv", columns=["a", "b"])
    assert path.read_text(encoding="utf-8").splitlines() == ["a,b", "1,2"]


def test_to_uint8():
    out = to_uint8(np.array([[[-1.0, 0.5, 2.0]]]))
    assert out.tolist() == [[[0, 128, 255]]]


def test_png_round_trip(tmp_path, rng):
    image = to_uint8(rng.uniform(size=(5, 7, 3)))
    path = save_png(tmp_path / "img.png", image)
    loaded = load_png(path)
    assert loaded.shape == (5, 7, 3)
    np.testing.assert_array_equal(to_uint8(loaded), image)


def test_png_errors(tmp_path):
    with pytest.raises(ShapeError):
        save_png(tmp_path / "x.png", np.zeros((4, 4)))
    with pytest.raises(DatasetError):
        load_png(tmp_path / "missing.png")


def test_raw_dump(tmp_path, rng):
    image = rng.uniform(size=(3, 4, 3)).astype(np.float32)
    path = save_raw_float32(tmp_path / "f.f32", image)
    blob = path.read_bytes()
    assert int.from_bytes(blob[:4], "little") == 4
    assert int.from_bytes(blob[4:8], "little") == 3
    assert len(blob) == 8 + 3 * 4 * 3 * 4
    np.testing.assert_array_equal(load_raw_float32(path), image.astype(np.float64))
