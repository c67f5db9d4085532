# -*- coding: utf-8 -*-
"""
共享 fixtures
"""

import numpy as np
import pytest

from src.config import Config
from src.data.synthetic import SyntheticSceneSpec, generate_synthetic
from src.nn.params import ParamStore


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def store64():
    """梯度校验用的 float64 参数仓库"""
    return ParamStore(seed=7, dtype=np.float64)


@pytest.fixture
def tiny_config():
    """小尺寸模型和训练配置，几秒内能跑完"""
    cfg = Config()
    for key, value in {
        "hash.levels": 2,
        "hash.features": 2,
        "hash.table_size_log2": 8,
        "hash.base_resolution": 4,
        "hash.per_level_scale": 2.0,
        "motion.audio_width": 4,
        "motion.window": 3,
        "motion.embed_width": 8,
        "motion.head_hidden": 8,
        "motion.latent_width": 3,
        "motion.vae_hidden": 8,
        "blink.hidden": 8,
        "blink.au_window": 3,
        "blink.history": 2,
        "field.landmark_code_width": 8,
        "field.audio_code_width": 8,
        "field.hidden": 8,
        "field.geo_width": 4,
        "render.train_samples": 8,
        "render.samples": 8,
        "render.chunk_rays": 64,
        "train.coarse.iters": 3,
        "train.fine.iters": 2,
        "train.rays_per_batch": 32,
        "train.fine.patch_size": 8,
        "train.mouth.dilation": 2,
        "train.motion.iters": 3,
        "train.motion.batch_frames": 4,
        "train.checkpoint_interval": 2,
        "train.log_interval": 1,
        "data.holdout_every": 4,
        "synth.frames": 8,
        "synth.image_size": 16,
        "synth.blink_count": 1,
        "viz.enabled": False,
    }.items():
        cfg.set(key, value)
    return cfg


@pytest.fixture
def synthetic_root(tmp_path, tiny_config):
    """8 帧 16×16 的合成数据集"""
    spec = SyntheticSceneSpec.from_config(tiny_config)
    scene = generate_synthetic(spec, tmp_path / "scene")
    return scene.root


@pytest.fixture
def dataset(synthetic_root):
    from src.data import open_dataset

    return open_dataset(synthetic_root)


@pytest.fixture
def motion_models(tiny_config, dataset):
    from src.training import prepare_motion_models

    return prepare_motion_models(tiny_config, dataset, seed=0)
