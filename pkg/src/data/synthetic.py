# -*- coding: utf-8 -*-
"""
合成数据集生成器

解析光线追踪一个球形"头部"（与辐射场渲染器不共享任何代码）：
    - 嘴部是球面上的深色椭圆，半高 h(a) = h0 + amplitude·a 随驱动标量 a 变化
    - 两只眼睛是球面上的条带，亮度随睁眼程度在眼睑色和眼白色之间插值
关键点直接由同一组几何参数给出，与图像在构造上一致。
"""

import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
import pandas as pd

from src.constants import (
    AU_COLUMN,
    AU_FILE,
    AU_MAX,
    AUDIO_FILE,
    BROW_INDICES,
    CAMERAS_FILE,
    FRAME_NAME_PATTERN,
    FRAMES_DIR,
    INNER_LIP_INDICES,
    JAW_INDICES,
    LANDMARK_COUNT,
    LANDMARKS_FILE,
    LEFT_EYE_INDICES,
    MANIFEST_FILE,
    NOSE_INDICES,
    OUTER_LIP_INDICES,
    RIGHT_EYE_INDICES,
    audio_columns,
    landmark_columns,
)
from src.exceptions import ConfigError
from src.utils.image_io import save_png
from src.utils.persistence import save_csv, save_json

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRACKS_FILE = "synthetic_tracks.csv"

# 面部几何（相对球心，单位为球半径）
MOUTH_CENTER_Y = -0.35
MOUTH_HALF_WIDTH = 0.28
MOUTH_BASE_HALF_HEIGHT = 0.03
EYE_CENTERS = ((-0.35, 0.35), (0.35, 0.35))
EYE_HALF_WIDTH = 0.12
EYE_HALF_HEIGHT = 0.05
BLINK_HALF_DURATION = 3

SKIN = np.array([0.86, 0.66, 0.56])
LIP = np.array([0.45, 0.08, 0.12])
SCLERA = np.array([0.97, 0.97, 0.95])
LID = SKIN * 0.55
LIGHT = np.array([0.3, 0.4, 1.0]) / np.linalg.norm([0.3, 0.4, 1.0])

CAMERA_DISTANCE = 3.0
BOUNDS_HALF_EXTENT = 1.2


@dataclass(frozen=True)
class SyntheticSceneSpec:
    seed: int = 0
    frame_count: int = 60
    image_size: int = 64
    mouth_amplitude: float = 0.08
    blink_count: int = 4
    fps: float = 25.0
    background: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    sphere_radius: float = 1.0
    sphere_center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    orbit_degrees: float = 0.0
    audio_width: int = 29

    def __post_init__(self):
        if self.frame_count <= 0 or self.image_size <= 0:
            raise ConfigError("合成数据集的帧数和图像尺寸必须为正", f"{self.frame_count}, {self.image_size}")
        if self.mouth_amplitude < 0 or self.blink_count < 0:
            raise ConfigError("嘴部幅度和眨眼次数必须非负")
        if self.audio_width < 1:
            raise ConfigError("音频特征宽度至少为1")

    @classmethod
    def from_config(cls, cfg) -> "SyntheticSceneSpec":
        s = cfg.section("synth")
        return cls(
            seed=s["seed"],
            frame_count=s["frames"],
            image_size=s["image_size"],
            mouth_amplitude=s["mouth_amplitude"],
            blink_count=s["blink_count"],
            fps=float(s["fps"]),
            background=tuple(s["background"]),
            orbit_degrees=s["orbit_degrees"],
            audio_width=cfg["motion.audio_width"],
        )

    def mouth_half_height(self, a: float) -> float:
        return MOUTH_BASE_HALF_HEIGHT + self.mouth_amplitude * a


@dataclass
class SyntheticScene:
    root: Path
    driving: np.ndarray
    openness: np.ndarray


# =============================================================================
# 轨迹
# =============================================================================


def driving_track(spec: SyntheticSceneSpec, rng: np.random.Generator) -> np.ndarray:
    """[0,1] 内平滑变化的驱动标量"""
    t = np.arange(spec.frame_count) / max(spec.frame_count, 1)
    phases = rng.uniform(0, 2 * np.pi, size=2)
    return 0.5 + 0.25 * np.sin(2 * np.pi * 3 * t + phases[0]) + 0.25 * np.sin(2 * np.pi * 7 * t + phases[1])


def blink_track(spec: SyntheticSceneSpec, rng: np.random.Generator) -> np.ndarray:
    """睁眼程度：每次眨眼在中心帧完全闭合，前后各 3 帧线性张开"""
    openness = np.ones(spec.frame_count)
    if spec.blink_count == 0:
        return openness
    frames = np.arange(spec.frame_count)
    bounds = np.linspace(0, spec.frame_count, spec.blink_count + 1).astype(int)
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi - lo <= 2 * BLINK_HALF_DURATION:
            center = (lo + hi) // 2
        else:
            center = int(rng.integers(lo + BLINK_HALF_DURATION, hi - BLINK_HALF_DURATION))
        profile = np.minimum(1.0, np.abs(frames - center) / BLINK_HALF_DURATION)
        openness = np.minimum(openness, profile)
    return openness


def audio_track(spec: SyntheticSceneSpec, driving: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """f0 = a，其余列为 a 的随机线性组合加小噪声"""
    feats = np.empty((spec.frame_count, spec.audio_width))
    feats[:, 0] = driving
    if spec.audio_width > 1:
        weights = rng.uniform(-1.0, 1.0, size=spec.audio_width - 1)
        noise = rng.normal(0.0, 0.05, size=(spec.frame_count, spec.audio_width - 1))
        feats[:, 1:] = driving[:, None] * weights[None, :] + noise
    return feats


# =============================================================================
# 几何
# =============================================================================


def _on_sphere(spec: SyntheticSceneSpec, xy: np.ndarray) -> np.ndarray:
    r = spec.sphere_radius
    x = xy[:, 0] * r
    y = xy[:, 1] * r
    z = np.sqrt(np.maximum(r * r - x * x - y * y, 0.0))
    return np.stack([x, y, z], axis=1) + np.asarray(spec.sphere_center)


def landmark_layout(spec: SyntheticSceneSpec, a: float, openness: float) -> np.ndarray:
    """(68, 3) 世界坐标关键点"""
    xy = np.zeros((LANDMARK_COUNT, 2))
    theta = math.pi + 0.25 + np.arange(len(JAW_INDICES)) * (math.pi - 0.5) / 16
    xy[list(JAW_INDICES)] = np.stack([0.72 * np.cos(theta), -0.05 + 0.7 * np.sin(theta)], axis=1)
    brow_x = np.concatenate([np.linspace(-0.6, -0.15, 5), np.linspace(0.15, 0.6, 5)])
    xy[list(BROW_INDICES)] = np.stack([brow_x, np.full(10, 0.55)], axis=1)
    nose_x = np.concatenate([np.zeros(4), np.linspace(-0.12, 0.12, 5)])
    nose_y = np.concatenate([np.linspace(0.3, 0.0, 4), np.full(5, -0.08)])
    xy[list(NOSE_INDICES)] = np.stack([nose_x, nose_y], axis=1)

    eh = EYE_HALF_HEIGHT * openness
    ew = EYE_HALF_WIDTH
    for indices, (ex, ey) in zip((LEFT_EYE_INDICES, RIGHT_EYE_INDICES), EYE_CENTERS):
        xy[list(indices)] = [
            (ex - ew, ey),
            (ex - ew / 3, ey + eh),
            (ex + ew / 3, ey + eh),
            (ex + ew, ey),
            (ex + ew / 3, ey - eh),
            (ex - ew / 3, ey - eh),
        ]

    my, mw = MOUTH_CENTER_Y, MOUTH_HALF_WIDTH
    h = spec.mouth_half_height(a)
    thirds = np.array([-2, -1, 0, 1, 2]) / 3.0
    xy[list(OUTER_LIP_INDICES)] = np.vstack([
        [(-mw, my)],
        np.stack([thirds * mw, np.full(5, my + h)], axis=1),
        [(mw, my)],
        np.stack([-thirds * mw, np.full(5, my - h)], axis=1),
    ])
    inner = np.array([-1, 0, 1]) / 3.0 * mw
    xy[list(INNER_LIP_INDICES)] = np.vstack([
        [(-0.75 * mw, my)],
        np.stack([inner, np.full(3, my + 0.5 * h)], axis=1),
        [(0.75 * mw, my)],
        np.stack([-inner, np.full(3, my - 0.5 * h)], axis=1),
    ])
    return _on_sphere(spec, xy)


def _rotation_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def camera_for_frame(spec: SyntheticSceneSpec, frame: int) -> Dict[str, object]:
    """cameras.json 中的一项（相机绕 y 轴小幅摆动）"""
    angle = math.radians(spec.orbit_degrees) * math.sin(2 * math.pi * frame / spec.frame_count)
    rotation = _rotation_y(angle)
    translation = np.asarray(spec.sphere_center) + rotation @ np.array([0.0, 0.0, CAMERA_DISTANCE])
    size = float(spec.image_size)
    return {
        "fx": size,
        "fy": size,
        "cx": size / 2,
        "cy": size / 2,
        "rotation": [float(v) for v in rotation.reshape(-1)],
        "translation": [float(v) for v in translation],
    }


def trace_frame(spec: SyntheticSceneSpec, camera: Dict[str, object], a: float, openness: float) -> np.ndarray:
    """解析求交渲染一帧 (H, W, 3)"""
    size = spec.image_size
    rotation = np.asarray(camera["rotation"]).reshape(3, 3)
    origin = np.asarray(camera["translation"])
    py, px = np.mgrid[0:size, 0:size].astype(np.float64)
    local = np.stack(
        [(px + 0.5 - camera["cx"]) / camera["fx"], -(py + 0.5 - camera["cy"]) / camera["fy"], -np.ones_like(px)],
        axis=-1,
    ).reshape(-1, 3)
    dirs = local @ rotation.T
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)

    center = np.asarray(spec.sphere_center)
    r = spec.sphere_radius
    oc = origin - center
    b = dirs @ oc
    disc = b * b - (oc @ oc - r * r)
    hit = disc > 0
    t = -b - np.sqrt(np.where(hit, disc, 0.0))
    hit &= t > 0

    image = np.broadcast_to(np.asarray(spec.background, dtype=np.float64), (size * size, 3)).copy()
    p = origin + t[hit, None] * dirs[hit]
    rel = (p - center) / r
    shade = 0.35 + 0.65 * np.clip(rel @ LIGHT, 0.0, None)
    color = np.broadcast_to(SKIN, rel.shape).copy()
    front = rel[:, 2] > 0

    eye_color = LID + (SCLERA - LID) * openness
    for ex, ey in EYE_CENTERS:
        in_eye = front & (np.abs(rel[:, 0] - ex) <= EYE_HALF_WIDTH) & (np.abs(rel[:, 1] - ey) <= EYE_HALF_HEIGHT)
        color[in_eye] = eye_color

    h = spec.mouth_half_height(a)
    in_mouth = front & ((rel[:, 0] / MOUTH_HALF_WIDTH) ** 2 + ((rel[:, 1] - MOUTH_CENTER_Y) / h) ** 2 <= 1.0)
    color[in_mouth] = LIP

    image[hit] = np.clip(color * shade[:, None], 0.0, 1.0)
    return image.reshape(size, size, 3)


# =============================================================================
# 生成
# =============================================================================


def generate_synthetic(spec: SyntheticSceneSpec, out: PathLike) -> SyntheticScene:
    """
    生成合成数据集并写入 manifest.json、frames/、cameras.json、
    landmarks.csv、audio_features.csv、au.csv

    Args:
        spec: 场景参数
        out: 输出目录

    Returns:
        SyntheticScene（含驱动标量和睁眼程度轨迹）
    """
    root = Path(out)
    (root / FRAMES_DIR).mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    driving = driving_track(spec, rng)
    openness = blink_track(spec, rng)
    audio = audio_track(spec, driving, rng)

    cameras = []
    landmarks = np.empty((spec.frame_count, LANDMARK_COUNT * 3))
    for i in range(spec.frame_count):
        cam = camera_for_frame(spec, i)
        cameras.append(cam)
        landmarks[i] = landmark_layout(spec, float(driving[i]), float(openness[i])).reshape(-1)
        image = trace_frame(spec, cam, float(driving[i]), float(openness[i]))
        save_png(root / FRAMES_DIR / FRAME_NAME_PATTERN.format(i), image)

    center = np.asarray(spec.sphere_center)
    half = BOUNDS_HALF_EXTENT * spec.sphere_radius
    save_json(
        {
            "frame_count": spec.frame_count,
            "fps": spec.fps,
            "background": list(spec.background),
            "scene_bounds": {"min": (center - half).tolist(), "max": (center + half).tolist()},
            "image_size": [spec.image_size, spec.image_size],
            "files": {
                "cameras": CAMERAS_FILE,
                "landmarks": LANDMARKS_FILE,
                "audio": AUDIO_FILE,
                "au": AU_FILE,
                "frames": FRAMES_DIR,
            },
            "synthetic": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(spec).items()},
        },
        root / MANIFEST_FILE,
    )
    save_json(cameras, root / CAMERAS_FILE)
    save_csv(pd.DataFrame(landmarks, columns=landmark_columns()), root / LANDMARKS_FILE)
    save_csv(pd.DataFrame(audio, columns=audio_columns(spec.audio_width)), root / AUDIO_FILE)
    au = AU_MAX * (1.0 - openness)
    save_csv(pd.DataFrame({"frame": np.arange(spec.frame_count), AU_COLUMN: au}), root / AU_FILE)
    save_csv(
        pd.DataFrame({"frame": np.arange(spec.frame_count), "driving": driving, "openness": openness}),
        root / TRACKS_FILE,
    )
    logger.info(f"合成数据集已生成: {root} ({spec.frame_count} 帧, {spec.image_size}x{spec.image_size})")
    return SyntheticScene(root, driving, openness)
