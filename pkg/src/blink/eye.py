# -*- coding: utf-8 -*-
"""
眼部几何：眼部关键点提取、眼睛纵横比（EAR）、睁眼程度
"""

import logging
from dataclasses import dataclass

import numpy as np

from src.constants import AU_MAX, AU_MIN, LANDMARK_COUNT, LEFT_EYE_INDICES, RIGHT_EYE_INDICES
from src.exceptions import DegenerateEyeError, DomainError, ShapeError

logger = logging.getLogger(__name__)

# 眼角距离低于此值视为退化
DEGENERATE_EPS = 1e-9


@dataclass
class BlinkState:
    """一帧的 AU45 强度和睁眼程度（1 为完全睁开）"""

    au_intensity: float
    eye_openness: float = 1.0
    frame: int = 0

    def __post_init__(self):
        if not np.isfinite(self.au_intensity) or not AU_MIN <= self.au_intensity <= AU_MAX:
            raise DomainError("AU 强度超出 [0,5]", f"frame {self.frame}: {self.au_intensity}")
        if not np.isfinite(self.eye_openness) or not 0.0 <= self.eye_openness <= 1.0:
            raise DomainError("睁眼程度超出 [0,1]", f"frame {self.frame}: {self.eye_openness}")


@dataclass
class EyeLandmarks:
    """左右眼各6个点，顺序 p1..p6"""

    left: np.ndarray
    right: np.ndarray
    frame: int = 0

    def __post_init__(self):
        for side in ("left", "right"):
            pts = np.asarray(getattr(self, side), dtype=np.float64)
            if pts.ndim != 2 or pts.shape[0] != 6:
                raise ShapeError(f"{side} 眼必须恰好6个点", str(pts.shape))
            setattr(self, side, pts)


def extract_eye_landmarks(lm) -> EyeLandmarks:
    """
    取出 68 点标注中的眼部点：左眼 36-41，右眼 42-47

    Args:
        lm: LandmarkSet 或 (68, k) 数组
    """
    points = getattr(lm, "points", lm)
    points = np.asarray(points)
    if points.shape[0] != LANDMARK_COUNT:
        raise ShapeError("需要68个关键点", str(points.shape))
    frame = getattr(lm, "frame", 0)
    return EyeLandmarks(
        points[list(LEFT_EYE_INDICES)].copy(),
        points[list(RIGHT_EYE_INDICES)].copy(),
        frame,
    )


def eye_aspect_ratio(eye: np.ndarray) -> float:
    """
    EAR = (‖p2−p6‖ + ‖p3−p5‖) / (2‖p1−p4‖)

    Args:
        eye: (6, 2) 或 (6, 3)
    """
    eye = np.asarray(eye, dtype=np.float64)
    if eye.ndim != 2 or eye.shape[0] != 6:
        raise ShapeError("单只眼必须恰好6个点", str(eye.shape))
    p1, p2, p3, p4, p5, p6 = eye
    horizontal = np.linalg.norm(p1 - p4)
    if horizontal < DEGENERATE_EPS:
        raise DegenerateEyeError("眼角两点重合", f"|p1-p4|={horizontal:.3e}")
    return float((np.linalg.norm(p2 - p6) + np.linalg.norm(p3 - p5)) / (2.0 * horizontal))


def batch_eye_aspect_ratio(eyes: np.ndarray) -> np.ndarray:
    """(N, 6, k) -> (N,)"""
    eyes = np.asarray(eyes, dtype=np.float64)
    horizontal = np.linalg.norm(eyes[:, 0] - eyes[:, 3], axis=-1)
    if np.any(horizontal < DEGENERATE_EPS):
        bad = int(np.argmax(horizontal < DEGENERATE_EPS))
        raise DegenerateEyeError("眼角两点重合", f"第 {bad} 帧")
    vertical = np.linalg.norm(eyes[:, 1] - eyes[:, 5], axis=-1) + np.linalg.norm(eyes[:, 2] - eyes[:, 4], axis=-1)
    return vertical / (2.0 * horizontal)


def mean_eye_aspect_ratio(landmarks: np.ndarray) -> np.ndarray:
    """(F, 68, k) -> 每帧左右眼 EAR 的平均 (F,)"""
    landmarks = np.asarray(landmarks, dtype=np.float64)
    left = batch_eye_aspect_ratio(landmarks[:, list(LEFT_EYE_INDICES)])
    right = batch_eye_aspect_ratio(landmarks[:, list(RIGHT_EYE_INDICES)])
    return 0.5 * (left + right)


def ear_open_reference(ears: np.ndarray, percentile: float = 95.0) -> float:
    """数据集的睁眼基准 EAR_open（默认95分位）"""
    ears = np.asarray(ears, dtype=np.float64)
    if ears.size == 0:
        raise DomainError("没有可用的 EAR 样本")
    ref = float(np.percentile(ears, percentile))
    if ref <= 0:
        raise DomainError("EAR_open 必须为正", str(ref))
    return ref


def eye_openness(ear, ear_open: float) -> np.ndarray:
    """clamp(EAR / EAR_open, 0, 1)"""
    return np.clip(np.asarray(ear, dtype=np.float64) / ear_open, 0.0, 1.0)


def _rescale_eye(eye: np.ndarray, factor: float) -> np.ndarray:
    out = eye.copy()
    # 上下眼睑成对 (p2,p6) (p3,p5) 围绕各自中点缩放，眼角不动
    for upper, lower in ((1, 5), (2, 4)):
        mid = 0.5 * (eye[upper] + eye[lower])
        out[upper] = mid + factor * (eye[upper] - mid)
        out[lower] = mid + factor * (eye[lower] - mid)
    return out


def apply_eye_openness(points: np.ndarray, openness: float, ear_open: float) -> np.ndarray:
    """
    调整眼睑关键点，使每只眼的 EAR 等于 openness·EAR_open

    Args:
        points: (68, k) 关键点
        openness: 目标睁眼程度 [0,1]
        ear_open: 睁眼基准 EAR

    Returns:
        新的关键点数组（非眼部点不变）
    """
    if not 0.0 <= openness <= 1.0:
        raise DomainError("睁眼程度超出 [0,1]", str(openness))
    out = np.array(points, dtype=np.float64, copy=True)
    target = openness * ear_open
    for indices in (LEFT_EYE_INDICES, RIGHT_EYE_INDICES):
        idx = list(indices)
        current = eye_aspect_ratio(out[idx])
        if current < DEGENERATE_EPS:
            logger.debug("眼睛已完全闭合，无法按比例张开，保持原样")
            continue
        out[idx] = _rescale_eye(out[idx], target / current)
    return out
