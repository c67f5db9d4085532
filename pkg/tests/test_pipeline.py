# -*- coding: utf-8 -*-
"""
Tests for the render and eval flows.
"""

import json

import numpy as np
import pandas as pd
import pytest

from src.exceptions import DatasetError, ShapeError
from src.pipeline import (
    driving_au,
    frame_cameras,
    read_au,
    read_audio_features,
    render_sequence,
    run_eval,
    run_render,
)
from src.training import (
    TrainConfig,
    load_field_models,
    load_motion_models,
    predicted_conditions,
    train_motion,
    train_stage,
)
from src.utils.image_io import load_png


@pytest.fixture
def trained(tmp_path, tiny_config, dataset):
    """运动模型 + 粗阶段辐射场"""
    tc = TrainConfig.from_config(tiny_config)
    models_dir = tmp_path / "models"
    motion = train_motion(tc, tiny_config, dataset, models_dir)
    motion_models, _ = load_motion_models(motion.checkpoint)
    coarse = train_stage("coarse", tc, tiny_config, dataset, motion_models, models_dir, motion_checkpoint=motion.checkpoint)
    field, _ = load_field_models(coarse.checkpoint)
    return motion_models, field, coarse.checkpoint


# --- 输入文件 ---


def test_read_audio_features(synthetic_root, tmp_path):
    audio = read_audio_features(synthetic_root / "audio_features.csv", width=4)
    assert audio.shape == (8, 4)
    with pytest.raises(ShapeError):
        read_audio_features(synthetic_root / "audio_features.csv", width=5)
    bad = tmp_path / "bad.csv"
    pd.DataFrame({"a": [1.0]}).to_csv(bad, index=False)
    with pytest.raises(DatasetError):
        read_audio_features(bad)


def test_read_au(synthetic_root, tmp_path):
    assert read_au(synthetic_root / "au.csv").shape == (8,)
    bad = tmp_path / "au.csv"
    pd.DataFrame({"frame": [0], "au": [1.0]}).to_csv(bad, index=False)
    with pytest.raises(DatasetError):
        read_au(bad)


def test_driving_au_fallbacks(dataset, synthetic_root, tmp_path):
    np.testing.assert_array_equal(driving_au(5, synthetic_root / "au.csv", None), dataset.au[:5])
    with pytest.raises(ShapeError):
        driving_au(20, synthetic_root / "au.csv", dataset)
    np.testing.assert_array_equal(driving_au(6, None, dataset), dataset.au[:6])
    np.testing.assert_array_equal(driving_au(20, None, dataset), np.zeros(20))
    np.testing.assert_array_equal(driving_au(3, None, None), np.zeros(3))


def test_frame_cameras_cycle(dataset):
    cams = frame_cameras(dataset, 10)
    assert len(cams) == 10
    assert cams[8] is dataset.cameras[0]
    assert cams[9] is dataset.cameras[1]


# --- 渲染 ---


def test_render_sequence_shape_check(trained, tiny_config, dataset):
    motion, field, _ = trained
    conditions = predicted_conditions(motion, dataset.audio, dataset.au)
    with pytest.raises(ShapeError):
        render_sequence(field, conditions, dataset.cameras[:3], tiny_config, 0, dataset.background)


def test_run_render_outputs(trained, tiny_config, dataset, synthetic_root, tmp_path):
    motion, field, _ = trained
    out = tmp_path / "render"
    paths = run_render(tiny_config, 0, dataset, motion, field, synthetic_root / "audio_features.csv", out)

    pngs = sorted(out.glob("frame_*.png"))
    assert [p.name for p in pngs] == [f"frame_{i:04d}.png" for i in range(8)]
    assert load_png(pngs[0]).shape == (16, 16, 3)
    landmarks = pd.read_csv(paths["landmarks"])
    assert landmarks.shape == (8, 204)
    # 写出的是世界坐标
    expected = predicted_conditions(motion, dataset.audio, dataset.au).landmarks
    expected = dataset.normalization.invert(expected.reshape(-1, 3)).reshape(8, -1)
    np.testing.assert_allclose(landmarks.to_numpy(), expected, rtol=1e-6, atol=1e-7)
    blink = pd.read_csv(paths["blink_track"])
    assert list(blink.columns) == ["frame", "openness"]
    assert blink["openness"].between(0.0, 1.0).all()
    assert not list(out.glob("*.f32"))


def test_run_render_is_reproducible(trained, tiny_config, dataset, synthetic_root, tmp_path):
    motion, field, _ = trained
    tiny_config.set("render.raw_dump", True)
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_render(tiny_config, 5, dataset, motion, field, synthetic_root / "audio_features.csv", a)
    run_render(tiny_config, 5, dataset, motion, field, synthetic_root / "audio_features.csv", b)
    for name in ("frame_0000.f32", "frame_0007.f32", "landmarks_pred.csv", "blink_track.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


# --- 评估 ---


def test_run_eval_on_held_out_frames(trained, tiny_config, dataset, tmp_path):
    motion, field, checkpoint = trained
    report = run_eval(tiny_config, 0, dataset, motion, field, checkpoint, tmp_path / "eval")
    assert report.frames == [3, 7]
    assert report.checkpoint.startswith("field_coarse_000003.ckpt@")
    assert all(np.isfinite(report.psnr))
    assert report.mean_lmd >= 0
    data = json.loads((tmp_path / "eval" / "eval.json").read_text(encoding="utf-8"))
    assert data["frame_count"] == 2
    assert data["metadata"]["seed"] == 0
    assert (tmp_path / "eval" / "eval.csv").exists()


def test_run_eval_with_render_dir(trained, tiny_config, dataset, synthetic_root, tmp_path):
    motion, field, checkpoint = trained
    report = run_eval(
        tiny_config,
        0,
        dataset,
        motion,
        field,
        checkpoint,
        tmp_path / "eval",
        renders=synthetic_root / "frames",
        frames=[0, 1, 2],
    )
    # 真值帧与自己比较
    assert report.psnr == [float("inf")] * 3
    assert report.to_dict()["mean_psnr"] == "+inf"


def test_run_eval_missing_render(trained, tiny_config, dataset, tmp_path):
    motion, field, checkpoint = trained
    (tmp_path / "empty").mkdir()
    with pytest.raises(DatasetError):
        run_eval(tiny_config, 0, dataset, motion, field, checkpoint, tmp_path / "eval", renders=tmp_path / "empty")
