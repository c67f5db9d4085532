# -*- coding: utf-8 -*-
"""
逐帧音频特征与时间平滑
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from src.exceptions import DomainError, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class AudioFeatureFrame:
    """一帧视频对应的声学特征向量 A"""

    features: np.ndarray
    frame: int = 0

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 1 or feats.size == 0:
            raise ShapeError("音频特征必须是非空一维向量", str(feats.shape))
        if not np.all(np.isfinite(feats)):
            raise DomainError("音频特征含有非有限值", f"frame {self.frame}")
        if self.frame < 0:
            raise DomainError("帧序号必须非负", str(self.frame))
        self.features = feats

    @property
    def width(self) -> int:
        return int(self.features.shape[0])


def triangular_kernel(half_width: int) -> np.ndarray:
    """偏移 -h..h 的三角权重 h+1-|k|（未归一化）"""
    if half_width < 0:
        raise DomainError("half_width 必须非负", str(half_width))
    offsets = np.arange(-half_width, half_width + 1)
    return (half_width + 1 - np.abs(offsets)).astype(np.float64)


def smooth_features(features: np.ndarray, half_width: int) -> np.ndarray:
    """
    对 (F, D) 特征矩阵做三角加权滑动平均
    窗口在序列两端截断，剩余权重重新归一化
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeError("特征矩阵必须是 (F, D)", str(features.shape))
    n = features.shape[0]
    if n == 0:
        raise DomainError("音频特征序列为空")
    kernel = triangular_kernel(half_width)
    out = np.zeros_like(features)
    norm = np.zeros((n, 1))
    for k, weight in zip(range(-half_width, half_width + 1), kernel):
        lo, hi = max(0, -k), min(n, n - k)
        if lo >= hi:
            continue
        out[lo:hi] += weight * features[lo + k:hi + k]
        norm[lo:hi] += weight
    return out / norm


def temporal_filter(frames: Sequence[AudioFeatureFrame], half_width: int) -> List[AudioFeatureFrame]:
    """
    平滑声学特征序列，输出长度与输入相同

    Args:
        frames: 按时间排列的特征帧
        half_width: 三角窗半宽（0 为恒等）
    """
    frames = list(frames)
    if not frames:
        raise DomainError("音频特征序列为空")
    widths = {f.width for f in frames}
    if len(widths) != 1:
        raise ShapeError("序列内特征宽度不一致", str(sorted(widths)))
    smoothed = smooth_features(np.stack([f.features for f in frames]), half_width)
    return [AudioFeatureFrame(row, f.frame) for row, f in zip(smoothed, frames)]


def window_indices(centers: np.ndarray, window: int, length: int) -> np.ndarray:
    """以 centers 为中心的窗口下标 (N, W)，越界处夹到序列两端"""
    if window <= 0 or window % 2 == 0:
        raise DomainError("窗口大小必须是正奇数", str(window))
    half = window // 2
    offsets = np.arange(-half, half + 1)
    idx = np.asarray(centers, dtype=np.int64)[:, None] + offsets[None, :]
    return np.clip(idx, 0, length - 1)


def build_windows(features: np.ndarray, window: int, centers: np.ndarray = None) -> np.ndarray:
    """
    为每个中心帧切出 W 帧窗口

    Returns:
        (N, W, D)
    """
    features = np.asarray(features)
    length = features.shape[0]
    if centers is None:
        centers = np.arange(length)
    return features[window_indices(centers, window, length)]
