# -*- coding: utf-8 -*-
"""
嘴部区域与随机 patch 采样
"""

import logging
from typing import Optional, Tuple, Union

import numpy as np

from src.constants import MOUTH_INDICES
from src.exceptions import ConfigError
from src.render.camera import Camera

logger = logging.getLogger(__name__)

# (x0, y0, x1, y1)，右/下边界不含
Region = Tuple[int, int, int, int]


def mouth_region(landmarks: np.ndarray, cam: Camera, dilation: int = 8, min_size: int = 0) -> Region:
    """
    嘴部关键点 48-67 投影后的包围盒，外扩 dilation 像素并裁剪到图像内

    Args:
        landmarks: (68, 3) 场景坐标
        cam: 相机
        dilation: 外扩像素
        min_size: 区域最小边长（不足时以中心扩展，并保持在图像内）
    """
    uv = cam.project(np.asarray(landmarks)[list(MOUTH_INDICES)])
    x0 = int(np.floor(uv[:, 0].min())) - dilation
    y0 = int(np.floor(uv[:, 1].min())) - dilation
    x1 = int(np.ceil(uv[:, 0].max())) + dilation
    y1 = int(np.ceil(uv[:, 1].max())) + dilation
    x0, x1 = _fit_span(x0, x1, min_size, cam.width)
    y0, y1 = _fit_span(y0, y1, min_size, cam.height)
    return x0, y0, x1, y1


def _fit_span(lo: int, hi: int, min_size: int, limit: int) -> Tuple[int, int]:
    size = max(hi - lo, min_size)
    size = min(size, limit)
    center = (lo + hi) // 2
    lo = center - size // 2
    lo = min(max(lo, 0), limit - size)
    return lo, lo + size


def sample_patch(
    image_size: Tuple[int, int],
    region: Region,
    patch_size: int,
    seed: Union[int, np.random.Generator, None] = None,
) -> np.ndarray:
    """
    在区域内均匀随机取一个 patch_size×patch_size 方块

    Args:
        image_size: (W, H)
        region: (x0, y0, x1, y1)
        patch_size: 边长
        seed: 种子或 Generator

    Returns:
        (P², 2) 像素坐标 (px, py)，行优先
    """
    width, height = image_size
    x0, y0, x1, y1 = region
    x0, y0 = max(x0, 0), max(y0, 0)
    x1, y1 = min(x1, width), min(y1, height)
    if x1 - x0 < patch_size or y1 - y0 < patch_size:
        raise ConfigError(
            "嘴部区域小于 patch 大小",
            f"区域 {x1 - x0}x{y1 - y0}，patch {patch_size}",
        )
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    px0 = int(rng.integers(x0, x1 - patch_size + 1))
    py0 = int(rng.integers(y0, y1 - patch_size + 1))
    py, px = np.mgrid[py0:py0 + patch_size, px0:px0 + patch_size]
    return np.stack([px.ravel(), py.ravel()], axis=1)


def crop(image: np.ndarray, region: Region) -> np.ndarray:
    x0, y0, x1, y1 = region
    return image[y0:y1, x0:x1]


def center_patch(region: Region, patch_size: int, image_size: Optional[Tuple[int, int]] = None) -> Region:
    """区域中心的 patch（评估时用，保证可复现）"""
    x0, y0, x1, y1 = region
    limit_w, limit_h = image_size if image_size else (x1, y1)
    px0, px1 = _fit_span(x0, x1, patch_size, limit_w)
    py0, py1 = _fit_span(y0, y1, patch_size, limit_h)
    cx, cy = (px0 + px1) // 2, (py0 + py1) // 2
    sx = min(max(cx - patch_size // 2, 0), max(limit_w - patch_size, 0))
    sy = min(max(cy - patch_size // 2, 0), max(limit_h - patch_size, 0))
    return sx, sy, sx + patch_size, sy + patch_size
