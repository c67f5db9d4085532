# -*- coding: utf-8 -*-
"""
场景归一化
场景边界中心映射到 (0.5, 0.5, 0.5)，最长边映射到 [0.05, 0.95]，
同一个各向同性仿射作用于关键点和相机平移（旋转保持正交）
"""

import logging

import numpy as np

from src.data.manifest import DatasetManifest, FrameRecord, SceneNormalization
from src.exceptions import DatasetError

logger = logging.getLogger(__name__)


def normalize_scene(manifest: DatasetManifest) -> DatasetManifest:
    """
    Args:
        manifest: load_dataset 返回的清单（世界坐标）

    Returns:
        新清单，normalization 字段记录所用映射
    """
    if manifest.normalization is not None:
        logger.debug("清单已归一化，跳过")
        return manifest
    extent = np.asarray(manifest.bounds_max) - np.asarray(manifest.bounds_min)
    if np.any(extent <= 0):
        raise DatasetError("场景边界在某个轴上没有跨度", f"extent={extent.tolist()}")
    norm = SceneNormalization.from_bounds(manifest.bounds_min, manifest.bounds_max)
    frames = [
        FrameRecord(
            index=f.index,
            image_path=f.image_path,
            camera=f.camera.with_translation(norm.apply(f.camera.translation)),
            landmarks=norm.apply(f.landmarks),
            audio=f.audio,
            au=f.au,
        )
        for f in manifest.frames
    ]
    logger.info(f"场景归一化: center={norm.center}, scale={norm.scale:.6f}")
    return manifest.with_frames(frames, norm)
