# -*- coding: utf-8 -*-
"""
数据集清单
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.constants import (
    AU_FILE,
    AUDIO_FILE,
    CAMERAS_FILE,
    FRAMES_DIR,
    LANDMARK_COUNT,
    LANDMARKS_FILE,
    NORMALIZED_HIGH,
    NORMALIZED_LOW,
)
from src.render.camera import Camera
from src.utils.image_io import load_png


@dataclass(frozen=True)
class SceneNormalization:
    """各向同性仿射 p' = 0.5 + scale·(p − center)"""

    center: Tuple[float, float, float]
    scale: float

    @classmethod
    def from_bounds(cls, bounds_min: np.ndarray, bounds_max: np.ndarray) -> "SceneNormalization":
        lo = np.asarray(bounds_min, dtype=np.float64)
        hi = np.asarray(bounds_max, dtype=np.float64)
        center = 0.5 * (lo + hi)
        scale = (NORMALIZED_HIGH - NORMALIZED_LOW) / float(np.max(hi - lo))
        return cls(tuple(float(c) for c in center), float(scale))

    def apply(self, points: np.ndarray) -> np.ndarray:
        return 0.5 + self.scale * (np.asarray(points, dtype=np.float64) - np.asarray(self.center))

    def invert(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.center) + (np.asarray(points, dtype=np.float64) - 0.5) / self.scale

    def to_dict(self) -> Dict[str, Any]:
        return {"center": list(self.center), "scale": self.scale}


@dataclass
class FrameRecord:
    """单帧的图像路径、相机、关键点、音频特征和 AU 强度"""

    index: int
    image_path: Path
    camera: Camera
    landmarks: np.ndarray
    audio: np.ndarray
    au: float


@dataclass
class DatasetManifest:
    root: Path
    frame_count: int
    fps: float
    background: Tuple[float, float, float]
    bounds_min: np.ndarray
    bounds_max: np.ndarray
    image_size: Tuple[int, int]
    frames: List[FrameRecord] = field(default_factory=list)
    files: Dict[str, str] = field(default_factory=dict)
    normalization: Optional[SceneNormalization] = None

    @property
    def landmarks(self) -> np.ndarray:
        """(F, 68, 3)"""
        if not self.frames:
            return np.zeros((0, LANDMARK_COUNT, 3))
        return np.stack([f.landmarks for f in self.frames])

    @property
    def audio(self) -> np.ndarray:
        """(F, D_a)"""
        return np.stack([f.audio for f in self.frames])

    @property
    def au(self) -> np.ndarray:
        return np.array([f.au for f in self.frames], dtype=np.float64)

    @property
    def cameras(self) -> List[Camera]:
        return [f.camera for f in self.frames]

    @property
    def audio_width(self) -> int:
        return int(self.frames[0].audio.shape[0]) if self.frames else 0

    def file_path(self, key: str) -> Path:
        defaults = {
            "cameras": CAMERAS_FILE,
            "landmarks": LANDMARKS_FILE,
            "audio": AUDIO_FILE,
            "au": AU_FILE,
            "frames": FRAMES_DIR,
        }
        return self.root / self.files.get(key, defaults[key])

    def load_images(self, indices: Optional[List[int]] = None) -> np.ndarray:
        """读取帧图像 (N, H, W, 3) float [0,1]"""
        picked = range(self.frame_count) if indices is None else indices
        return np.stack([load_png(self.frames[i].image_path) for i in picked])

    def split(self, holdout_every: int) -> Tuple[List[int], List[int]]:
        """
        每 k 帧留出一帧（下标 k-1, 2k-1, ...）

        Returns:
            (训练帧, 留出帧)；k=0 或帧数不足时全部用于训练，评估也用全部帧
        """
        all_frames = list(range(self.frame_count))
        if holdout_every <= 1:
            return all_frames, all_frames
        held = [i for i in all_frames if (i + 1) % holdout_every == 0]
        train = [i for i in all_frames if (i + 1) % holdout_every != 0]
        if not held or not train:
            return all_frames, all_frames
        return train, held

    def with_frames(self, frames: List[FrameRecord], normalization: SceneNormalization) -> "DatasetManifest":
        return replace(self, frames=frames, normalization=normalization)
