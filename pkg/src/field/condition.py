# -*- coding: utf-8 -*-
"""
条件向量编码
关键点编码 + 音频残差（逐元素相加），再拼接眨眼嵌入
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from src.constants import LANDMARK_COUNT
from src.exceptions import ConfigError, DomainError, ShapeError, StateError
from src.nn.mlp import Mlp
from src.nn.params import ParamStore

logger = logging.getLogger(__name__)


@dataclass
class ConditionVector:
    """landmark_code (32) / audio_residual (32) / blink_embedding (D_b)"""

    landmark_code: np.ndarray
    audio_residual: np.ndarray
    blink_embedding: np.ndarray

    def __post_init__(self):
        for name in ("landmark_code", "audio_residual", "blink_embedding"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise DomainError("条件向量含有非有限值", name)

    @property
    def fused(self) -> np.ndarray:
        """(landmark_code + audio_residual) ‖ blink_embedding"""
        return np.concatenate([self.landmark_code + self.audio_residual, self.blink_embedding], axis=-1)


class ConditionEncoder:
    """
    `cond.lm`:    204 -> 64 -> code_width
    `cond.audio`: D_z -> 32 -> code_width
    """

    def __init__(
        self,
        store: ParamStore,
        latent_width: int,
        blink_width: int = 4,
        code_width: int = 32,
        audio_code_width: int = 32,
        use_audio_residual: bool = True,
        use_blink: bool = True,
    ):
        if audio_code_width != code_width:
            raise ConfigError(
                "音频残差宽度必须等于关键点编码宽度",
                f"field.audio_code_width={audio_code_width}, field.landmark_code_width={code_width}",
            )
        self.store = store
        self.latent_width = latent_width
        self.blink_width = blink_width
        self.code_width = code_width
        self.use_audio_residual = use_audio_residual
        self.use_blink = use_blink
        self.landmark_net = Mlp(store, "cond.lm", [LANDMARK_COUNT * 3, 64, code_width])
        self.audio_net = Mlp(store, "cond.audio", [latent_width, 32, code_width])
        self._squeeze: Optional[bool] = None

    @property
    def output_width(self) -> int:
        return self.code_width + self.blink_width

    def _inputs(self, landmarks, latent, blink):
        lm = np.asarray(getattr(landmarks, "points", landmarks), dtype=np.float64)
        z = np.asarray(getattr(latent, "mean", latent), dtype=np.float64)
        b = np.asarray(getattr(blink, "vector", blink), dtype=np.float64)
        squeeze = z.ndim == 1
        lm = lm.reshape(1, -1) if squeeze else lm.reshape(lm.shape[0], -1)
        z = z[None] if squeeze else z
        b = b[None] if b.ndim == 1 else b
        if lm.shape[1] != LANDMARK_COUNT * 3:
            raise ShapeError("关键点输入宽度必须为 204", str(lm.shape))
        if z.shape[1] != self.latent_width:
            raise ShapeError("音频潜变量宽度不匹配", f"期望 {self.latent_width}，得到 {z.shape[1]}")
        if b.shape[1] != self.blink_width:
            raise ShapeError("眨眼嵌入宽度不匹配", f"期望 {self.blink_width}，得到 {b.shape[1]}")
        if not lm.shape[0] == z.shape[0] == b.shape[0]:
            raise ShapeError("条件输入的批大小不一致", f"{lm.shape[0]}, {z.shape[0]}, {b.shape[0]}")
        return lm, z, b, squeeze

    def encode(self, landmarks, latent, blink, retain: bool = True) -> ConditionVector:
        """
        Args:
            landmarks: LandmarkSet、(68,3) 或 (N, 204)
            latent: AudioLatent（取 μ）或 (D_z,) / (N, D_z)
            blink: BlinkEmbedding 或 (D_b,) / (N, D_b)

        Returns:
            ConditionVector（消融开关关闭的分支置零）
        """
        lm, z, b, squeeze = self._inputs(landmarks, latent, blink)
        lm_code = self.landmark_net.forward(lm, retain=retain)
        if self.use_audio_residual:
            audio_code = self.audio_net.forward(z, retain=retain)
        else:
            audio_code = np.zeros_like(lm_code)
        blink_code = b.astype(lm_code.dtype) if self.use_blink else np.zeros_like(b, dtype=lm_code.dtype)
        if retain:
            self._squeeze = squeeze
        if squeeze:
            return ConditionVector(lm_code[0], audio_code[0], blink_code[0])
        return ConditionVector(lm_code, audio_code, blink_code)

    def backward(self, g_fused: np.ndarray) -> Dict[str, np.ndarray]:
        """
        Args:
            g_fused: 对 fused 条件的梯度

        Returns:
            {"landmarks": ..., "latent": ..., "blink": ...} 输入梯度
        """
        if self._squeeze is None:
            raise StateError("ConditionEncoder 在 encode 之前调用了 backward")
        g = np.asarray(g_fused, dtype=self.store.dtype)
        g = g[None] if g.ndim == 1 else g
        g_code = g[:, :self.code_width]
        g_blink = g[:, self.code_width:] if self.use_blink else np.zeros_like(g[:, self.code_width:])
        g_lm = self.landmark_net.backward(g_code)
        if self.use_audio_residual:
            g_latent = self.audio_net.backward(g_code)
        else:
            g_latent = np.zeros((g.shape[0], self.latent_width), dtype=self.store.dtype)
        grads = {"landmarks": g_lm, "latent": g_latent, "blink": g_blink}
        if self._squeeze:
            return {k: v[0] for k, v in grads.items()}
        return grads


def encode_condition(encoder: ConditionEncoder, lm, audio_latent, blink) -> ConditionVector:
    return encoder.encode(lm, audio_latent, blink, retain=False)
