# -*- coding: utf-8 -*-
"""
模型装配
运动模型（VAE + DLT + 眨眼网络）和辐射场模型（三平面编码 + 条件编码 + 解码器）
各自使用独立的 ParamStore 和检查点
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.blink.eye import apply_eye_openness
from src.blink.networks import BlinkMapper, EyeStatePredictor, au_windows, rollout_eye_states
from src.config import Config
from src.constants import LANDMARK_COUNT
from src.encoders.hash_grid import HashGridConfig, TriplaneEncoder
from src.exceptions import CheckpointError
from src.field.condition import ConditionEncoder
from src.field.radiance_field import RadianceField
from src.motion.audio import smooth_features, window_indices
from src.motion.dlt import DltModel
from src.motion.vae import AudioVae
from src.nn.checkpoint import load_checkpoint, restore_into
from src.nn.params import ParamStore

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MOTION_KEYS = (
    "motion.filter_half_width",
    "motion.window",
    "motion.embed_width",
    "motion.head_hidden",
    "motion.latent_width",
    "motion.vae_hidden",
    "motion.kl_weight",
    "motion.use_vae_latent",
    "blink.embedding_width",
    "blink.history",
    "blink.au_window",
    "blink.hidden",
)

FIELD_KEYS = (
    "hash.levels",
    "hash.features",
    "hash.table_size_log2",
    "hash.base_resolution",
    "hash.per_level_scale",
    "hash.init_scale",
    "field.landmark_code_width",
    "field.audio_code_width",
    "field.hidden",
    "field.geo_width",
    "field.density_activation",
    "field.use_audio_residual",
    "field.use_blink",
)


def _settings(cfg: Config, keys) -> Dict[str, Any]:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in ((k, cfg[k]) for k in keys)}


def _config_from(settings: Dict[str, Any]) -> Config:
    cfg = Config()
    for key, value in settings.items():
        cfg.set(key, tuple(value) if isinstance(value, list) else value)
    return cfg


# =============================================================================
# 运动模型
# =============================================================================


@dataclass
class MotionModels:
    store: ParamStore
    vae: AudioVae
    dlt: DltModel
    mapper: BlinkMapper
    predictor: EyeStatePredictor
    settings: Dict[str, Any]
    mean_landmarks: np.ndarray
    ear_open: float

    @property
    def use_vae_latent(self) -> bool:
        return bool(self.settings["motion.use_vae_latent"])

    @property
    def half_width(self) -> int:
        return int(self.settings["motion.filter_half_width"])

    @property
    def window(self) -> int:
        return int(self.settings["motion.window"])

    def metadata(self) -> Dict[str, Any]:
        return {
            "settings": dict(self.settings),
            "audio_width": self.vae.input_width,
            "mean_landmarks": [float(v) for v in self.mean_landmarks.reshape(-1)],
            "ear_open": float(self.ear_open),
        }

    def latents(self, smoothed: np.ndarray) -> np.ndarray:
        """每帧的 VAE 后验均值 μ (F, D_z)"""
        return self.vae.encode(smoothed, eps=np.zeros((smoothed.shape[0], self.vae.latent_width))).mean

    def dlt_inputs(self, smoothed: np.ndarray, latents: np.ndarray) -> np.ndarray:
        return latents if self.use_vae_latent else smoothed

    def embeddings(self, audio: np.ndarray, au: np.ndarray) -> np.ndarray:
        """每帧眨眼嵌入 (F, D_b)"""
        return self.mapper.forward(au_windows(au, self.mapper.au_window), audio, retain=False)

    def run(self, audio: np.ndarray, au: np.ndarray) -> Dict[str, np.ndarray]:
        """
        推理：音频特征 + AU -> 平滑特征、潜变量、眨眼嵌入、关键点、睁眼轨迹

        Args:
            audio: (F, D_a) 原始逐帧特征
            au: (F,) AU45 强度
        """
        smoothed = smooth_features(audio, self.half_width)
        latents = self.latents(smoothed)
        emb = self.embeddings(audio, au)
        inputs = self.dlt_inputs(smoothed, latents)
        windows = inputs[window_indices(np.arange(inputs.shape[0]), self.window, inputs.shape[0])]
        landmarks = self.dlt.forward(windows, emb, retain=False).reshape(-1, LANDMARK_COUNT, 3)
        openness = rollout_eye_states(self.predictor, emb)
        return {
            "smoothed": smoothed,
            "latents": latents,
            "embeddings": emb,
            "landmarks": landmarks,
            "openness": openness,
        }

    def control_eyes(self, landmarks: np.ndarray, openness: np.ndarray) -> np.ndarray:
        """按预测的睁眼程度调整每帧的眼部关键点"""
        return np.stack([apply_eye_openness(lm, float(o), self.ear_open) for lm, o in zip(landmarks, openness)])


def build_motion_models(
    cfg: Config,
    audio_width: int,
    mean_landmarks: np.ndarray,
    ear_open: float,
    seed: int = 0,
    dtype=np.float32,
) -> MotionModels:
    settings = _settings(cfg, MOTION_KEYS)
    store = ParamStore(seed=seed, dtype=dtype)
    latent_width = cfg["motion.latent_width"]
    blink_width = cfg["blink.embedding_width"]
    vae = AudioVae(store, audio_width, latent_width, cfg["motion.vae_hidden"], cfg["motion.kl_weight"])
    dlt_input = latent_width if cfg["motion.use_vae_latent"] else audio_width
    dlt = DltModel(
        store,
        dlt_input,
        window=cfg["motion.window"],
        embed_width=cfg["motion.embed_width"],
        head_hidden=cfg["motion.head_hidden"],
        blink_width=blink_width,
        mean_landmarks=mean_landmarks,
    )
    mapper = BlinkMapper(store, cfg["blink.au_window"], cfg["blink.hidden"], blink_width)
    predictor = EyeStatePredictor(store, cfg["blink.history"], blink_width, cfg["blink.hidden"])
    logger.debug(f"运动模型参数量: {store.num_parameters()}")
    return MotionModels(store, vae, dlt, mapper, predictor, settings, np.asarray(mean_landmarks, dtype=np.float64), float(ear_open))


def load_motion_models(path: PathLike) -> Tuple[MotionModels, Dict[str, Any]]:
    """从运动检查点重建模型"""
    params, meta = load_checkpoint(path)
    if meta.get("stage") != "motion":
        raise CheckpointError("不是运动检查点", f"{path}: stage={meta.get('stage')}")
    cfg = _config_from(meta["settings"])
    models = build_motion_models(
        cfg,
        int(meta["audio_width"]),
        np.asarray(meta["mean_landmarks"]).reshape(LANDMARK_COUNT, 3),
        float(meta["ear_open"]),
    )
    restore_into(models.store, params)
    return models, meta


# =============================================================================
# 辐射场模型
# =============================================================================


@dataclass
class FieldModels:
    store: ParamStore
    encoder: TriplaneEncoder
    condition: ConditionEncoder
    field: RadianceField
    settings: Dict[str, Any]

    def metadata(self) -> Dict[str, Any]:
        return {
            "settings": dict(self.settings),
            "latent_width": self.condition.latent_width,
            "blink_width": self.condition.blink_width,
        }


def build_field_models(
    cfg: Config,
    latent_width: int,
    blink_width: int,
    seed: int = 0,
    dtype=np.float32,
) -> FieldModels:
    settings = _settings(cfg, FIELD_KEYS)
    store = ParamStore(seed=seed, dtype=dtype)
    encoder = TriplaneEncoder(store, HashGridConfig.from_config(cfg), cfg["hash.init_scale"])
    condition = ConditionEncoder(
        store,
        latent_width,
        blink_width,
        cfg["field.landmark_code_width"],
        cfg["field.audio_code_width"],
        use_audio_residual=cfg["field.use_audio_residual"],
        use_blink=cfg["field.use_blink"],
    )
    field = RadianceField(
        store,
        encoder,
        condition.output_width,
        hidden=cfg["field.hidden"],
        geo_width=cfg["field.geo_width"],
        density_activation=cfg["field.density_activation"],
    )
    logger.debug(f"辐射场参数量: {store.num_parameters()}")
    return FieldModels(store, encoder, condition, field, settings)


def load_field_models(path: PathLike) -> Tuple[FieldModels, Dict[str, Any]]:
    """从粗/细阶段检查点重建辐射场"""
    params, meta = load_checkpoint(path)
    if meta.get("stage") not in ("coarse", "fine"):
        raise CheckpointError("不是辐射场检查点", f"{path}: stage={meta.get('stage')}")
    cfg = _config_from(meta["settings"])
    models = build_field_models(cfg, int(meta["latent_width"]), int(meta["blink_width"]))
    restore_into(models.store, params)
    return models, meta


def latest_checkpoint(directory: PathLike, stage: str) -> Optional[Path]:
    """目录中某阶段迭代序号最大的检查点"""
    candidates = sorted(Path(directory).glob(f"{stage}_*.ckpt"))
    return candidates[-1] if candidates else None
