# -*- coding: utf-8 -*-
"""
数据集模块包
清单、加载校验、场景归一化与合成数据集生成
"""

from .manifest import DatasetManifest, FrameRecord, SceneNormalization
from .loader import load_dataset, check_alignment
from .normalize import normalize_scene
from .synthetic import SyntheticSceneSpec, SyntheticScene, generate_synthetic, landmark_layout, TRACKS_FILE


def open_dataset(root) -> DatasetManifest:
    """加载、校验并归一化"""
    return normalize_scene(load_dataset(root))


__all__ = [
    "DatasetManifest",
    "FrameRecord",
    "SceneNormalization",
    "load_dataset",
    "check_alignment",
    "normalize_scene",
    "open_dataset",
    "SyntheticSceneSpec",
    "SyntheticScene",
    "generate_synthetic",
    "landmark_layout",
    "TRACKS_FILE",
]
