# -*- coding: utf-8 -*-
"""
关键点距离 LMD
"""

from typing import List, Optional, Sequence

import numpy as np

from src.exceptions import ShapeError

POINTS_PER_FRAME = 68


def _as_frames(seq) -> np.ndarray:
    if isinstance(seq, np.ndarray):
        arr = np.asarray(seq, dtype=np.float64)
    else:
        arr = np.asarray([getattr(item, "points", item) for item in seq], dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] % POINTS_PER_FRAME == 0:
        arr = arr.reshape(arr.shape[0], POINTS_PER_FRAME, -1)
    if arr.ndim != 3 or arr.shape[1] != POINTS_PER_FRAME:
        raise ShapeError("LMD 输入必须是 (F, 68, k)", str(arr.shape))
    return arr


def lmd_per_frame(pred, gt) -> np.ndarray:
    """每帧的平均欧氏点距 (F,)"""
    p = _as_frames(pred)
    g = _as_frames(gt)
    if p.shape != g.shape:
        raise ShapeError("LMD 预测与真值序列不对齐", f"{p.shape} vs {g.shape}")
    if p.shape[0] == 0:
        raise ShapeError("LMD 序列为空")
    return np.sqrt(np.sum((p - g) ** 2, axis=2)).mean(axis=1)


def lmd(pred, gt) -> float:
    """所有帧、所有关键点的平均欧氏距离"""
    return float(lmd_per_frame(pred, gt).mean())


def project_sequence(landmarks: np.ndarray, cameras: Sequence) -> np.ndarray:
    """逐帧投影到像素坐标 (F, 68, 2)，用于像素单位的 LMD"""
    landmarks = _as_frames(landmarks)
    if len(cameras) != landmarks.shape[0]:
        raise ShapeError("相机数与关键点帧数不一致", f"{len(cameras)} vs {landmarks.shape[0]}")
    return np.stack([cam.project(lm) for cam, lm in zip(cameras, landmarks)])
