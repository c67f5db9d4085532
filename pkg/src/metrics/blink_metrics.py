# -*- coding: utf-8 -*-
"""
眨眼带追踪指标
渲染图中眼部区域的平均亮度与睁眼轨迹的相关系数
"""

import logging
from typing import Sequence

import numpy as np

from src.constants import LEFT_EYE_INDICES, RIGHT_EYE_INDICES
from src.exceptions import ShapeError

logger = logging.getLogger(__name__)


def eye_band_brightness(image: np.ndarray, cam, landmarks: np.ndarray, dilation: int = 2) -> float:
    """两只眼睛投影包围盒（外扩 dilation 像素）内的平均亮度"""
    height, width = image.shape[:2]
    gray = np.asarray(image, dtype=np.float64).mean(axis=2)
    values = []
    for indices in (LEFT_EYE_INDICES, RIGHT_EYE_INDICES):
        uv = cam.project(np.asarray(landmarks)[list(indices)])
        x0 = max(int(np.floor(uv[:, 0].min())) - dilation, 0)
        x1 = min(int(np.ceil(uv[:, 0].max())) + dilation, width)
        y0 = max(int(np.floor(uv[:, 1].min())) - dilation, 0)
        y1 = min(int(np.ceil(uv[:, 1].max())) + dilation, height)
        if x1 > x0 and y1 > y0:
            values.append(gray[y0:y1, x0:x1].ravel())
    if not values:
        return float("nan")
    return float(np.concatenate(values).mean())


def blink_band_brightness(images: np.ndarray, cameras: Sequence, landmarks: np.ndarray, dilation: int = 2) -> np.ndarray:
    if not len(images) == len(cameras) == len(landmarks):
        raise ShapeError("图像、相机、关键点的帧数不一致", f"{len(images)}, {len(cameras)}, {len(landmarks)}")
    return np.array([eye_band_brightness(img, cam, lm, dilation) for img, cam, lm in zip(images, cameras, landmarks)])


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson 相关；任一序列为常数时返回 nan"""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError("相关系数输入长度不一致", f"{a.shape} vs {b.shape}")
    ok = np.isfinite(a) & np.isfinite(b)
    a, b = a[ok], b[ok]
    if a.size < 2 or np.std(a) == 0 or np.std(b) == 0:
        return float("nan")
    return float(np.corrcoef(a, b)[0, 1])


def blink_band_correlation(images, cameras, landmarks, openness, dilation: int = 2) -> float:
    """
    Args:
        images: (F, H, W, 3) 渲染图
        cameras: 每帧相机
        landmarks: (F, 68, 3) 定位眼部区域的关键点
        openness: (F,) 睁眼轨迹

    Returns:
        Pearson 相关系数；睁眼轨迹为常数时为 nan
    """
    band = blink_band_brightness(images, cameras, landmarks, dilation)
    corr = pearson(band, openness)
    logger.debug(f"眨眼带相关系数: {corr}")
    return corr
