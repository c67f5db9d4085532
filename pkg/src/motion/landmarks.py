# -*- coding: utf-8 -*-
"""
68点三维人脸关键点与位置损失
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.constants import LANDMARK_COUNT
from src.exceptions import DomainError, ShapeError


@dataclass
class LandmarkSet:
    """一帧的68个三维关键点（场景归一化坐标）"""

    points: np.ndarray
    frame: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape == (LANDMARK_COUNT * 3,):
            pts = pts.reshape(LANDMARK_COUNT, 3)
        if pts.shape != (LANDMARK_COUNT, 3):
            raise ShapeError("关键点必须是 68×3", str(pts.shape))
        if not np.all(np.isfinite(pts)):
            raise DomainError("关键点含有非有限值", f"frame {self.frame}")
        if self.frame < 0:
            raise DomainError("帧序号必须非负", str(self.frame))
        self.points = pts

    def flatten(self) -> np.ndarray:
        """x0,y0,z0,...,x67,y67,z67"""
        return self.points.reshape(-1)

    @classmethod
    def from_row(cls, row: np.ndarray, frame: int = 0) -> "LandmarkSet":
        return cls(np.asarray(row, dtype=np.float64).reshape(LANDMARK_COUNT, 3), frame)


LandmarkSequence = Union[Sequence[LandmarkSet], np.ndarray]


def stack_landmarks(seq: LandmarkSequence) -> Tuple[np.ndarray, list]:
    """
    把关键点序列整理成 (F, 68, 3) 数组

    Returns:
        (数组, 帧序号列表)；传入数组时帧序号为 0..F-1
    """
    if isinstance(seq, np.ndarray):
        arr = seq.reshape(seq.shape[0], LANDMARK_COUNT, 3) if seq.ndim == 2 else seq
        if arr.ndim != 3 or arr.shape[1:] != (LANDMARK_COUNT, 3):
            raise ShapeError("关键点数组必须是 (F, 68, 3)", str(seq.shape))
        return arr.astype(np.float64, copy=False), list(range(arr.shape[0]))
    seq = list(seq)
    if not seq:
        return np.zeros((0, LANDMARK_COUNT, 3)), []
    return np.stack([s.points for s in seq]), [s.frame for s in seq]


def _aligned(pred: LandmarkSequence, target: LandmarkSequence) -> Tuple[np.ndarray, np.ndarray]:
    p, pf = stack_landmarks(pred)
    t, tf = stack_landmarks(target)
    if p.shape[0] != t.shape[0]:
        raise ShapeError("预测与目标的帧数不一致", f"{p.shape[0]} vs {t.shape[0]}")
    if pf != tf:
        raise ShapeError("预测与目标的帧序号不一致")
    if p.shape[0] == 0:
        raise ShapeError("关键点序列为空")
    return p, t


def positional_loss(pred: LandmarkSequence, target: LandmarkSequence) -> float:
    """
    L_p = (1 / (M·F)) Σ_m Σ_f ‖p̂ − p‖₁，M=68

    Args:
        pred: 预测关键点序列（LandmarkSet 列表或 (F,68,3) 数组）
        target: 目标关键点序列

    Returns:
        非负标量
    """
    p, t = _aligned(pred, target)
    return float(np.abs(p - t).sum() / (LANDMARK_COUNT * p.shape[0]))


def positional_loss_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    """L_p 对预测的次梯度 sign(p̂ − p) / (M·F)，形状同 pred"""
    p, t = _aligned(pred, target)
    g = np.sign(p - t) / (LANDMARK_COUNT * p.shape[0])
    return g.reshape(np.shape(pred))
