# -*- coding: utf-8 -*-
"""
逐帧条件输入
训练时用真值关键点（teacher forcing），推理时用 DLT 预测的关键点；
音频潜变量和眨眼嵌入都来自冻结的运动模型
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.constants import LANDMARK_COUNT
from src.data.manifest import DatasetManifest
from src.exceptions import ShapeError
from src.motion.audio import smooth_features
from src.training.models import MotionModels

logger = logging.getLogger(__name__)


@dataclass
class FrameConditions:
    landmarks: np.ndarray
    latents: np.ndarray
    embeddings: np.ndarray
    openness: Optional[np.ndarray] = None

    def __post_init__(self):
        self.landmarks = np.asarray(self.landmarks, dtype=np.float64).reshape(-1, LANDMARK_COUNT, 3)
        counts = {self.landmarks.shape[0], self.latents.shape[0], self.embeddings.shape[0]}
        if len(counts) != 1:
            raise ShapeError(
                "逐帧条件的帧数不一致",
                f"landmarks={self.landmarks.shape[0]}, latents={self.latents.shape[0]}, "
                f"embeddings={self.embeddings.shape[0]}",
            )

    def __len__(self) -> int:
        return int(self.landmarks.shape[0])

    def take(self, frames) -> "FrameConditions":
        frames = np.asarray(frames, dtype=np.int64)
        return FrameConditions(
            self.landmarks[frames],
            self.latents[frames],
            self.embeddings[frames],
            None if self.openness is None else self.openness[frames],
        )


def teacher_forced_conditions(motion: MotionModels, dataset: DatasetManifest) -> FrameConditions:
    """真值关键点 + 运动模型给出的 μ 和眨眼嵌入"""
    audio = dataset.audio
    latents = motion.latents(smooth_features(audio, motion.half_width))
    embeddings = motion.embeddings(audio, dataset.au)
    return FrameConditions(dataset.landmarks, latents, embeddings)


def predicted_conditions(motion: MotionModels, audio: np.ndarray, au: np.ndarray, eye_control: bool = True) -> FrameConditions:
    """推理：DLT 关键点、眼动轨迹（可选按睁眼程度调整眼睑关键点）"""
    out = motion.run(audio, au)
    landmarks = out["landmarks"]
    if eye_control:
        landmarks = motion.control_eyes(landmarks, out["openness"])
    logger.debug(f"预测条件: {landmarks.shape[0]} 帧，eye_control={eye_control}")
    return FrameConditions(landmarks, out["latents"], out["embeddings"], out["openness"])
