# -*- coding: utf-8 -*-
"""
音频特征的变分自编码器
编码器输出 (μ, logσ²)，用重参数化采样 z = μ + exp(½·logσ²)·ε
训练目标 = 重建 MSE + β·KL(q ‖ N(0, I))
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.exceptions import DomainError, ShapeError, StateError
from src.nn.mlp import Mlp
from src.nn.params import ParamStore

logger = logging.getLogger(__name__)


@dataclass
class AudioLatent:
    """潜空间分布参数及一次采样"""

    mean: np.ndarray
    log_var: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        if not (self.mean.shape == self.log_var.shape == self.z.shape):
            raise ShapeError(
                "潜变量各分量宽度不一致",
                f"mean {self.mean.shape}, log_var {self.log_var.shape}, z {self.z.shape}",
            )
        if not np.all(np.isfinite(self.log_var)):
            raise DomainError("log-variance 含有非有限值")

    @property
    def width(self) -> int:
        return int(self.mean.shape[-1])


def kl_divergence(mean: np.ndarray, log_var: np.ndarray) -> float:
    """KL(N(μ, σ²) ‖ N(0, I))，对批维求平均"""
    mean = np.atleast_2d(mean)
    log_var = np.atleast_2d(log_var)
    per_row = -0.5 * np.sum(1.0 + log_var - mean ** 2 - np.exp(log_var), axis=1)
    return float(per_row.mean())


class AudioVae:
    """
    编码器 `{name}.enc`: D_a -> hidden -> 2·D_z
    解码器 `{name}.dec`: D_z -> hidden -> D_a
    """

    def __init__(
        self,
        store: ParamStore,
        input_width: int,
        latent_width: int = 16,
        hidden: int = 32,
        kl_weight: float = 1e-4,
        name: str = "vae",
    ):
        self.store = store
        self.name = name
        self.input_width = input_width
        self.latent_width = latent_width
        self.kl_weight = kl_weight
        self.encoder = Mlp(store, f"{name}.enc", [input_width, hidden, 2 * latent_width])
        self.decoder = Mlp(store, f"{name}.dec", [latent_width, hidden, input_width])
        self._cache: Optional[dict] = None

    def _check(self, x: np.ndarray) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=self.store.dtype)
        squeeze = x.ndim == 1
        x2 = x[None, :] if squeeze else x
        if x2.ndim != 2 or x2.shape[1] != self.input_width:
            raise ShapeError(
                f"{self.name} 输入宽度不匹配",
                f"期望 {self.input_width}，得到 {x.shape}",
            )
        return x2, squeeze

    def encode(
        self,
        x: np.ndarray,
        eps: Optional[np.ndarray] = None,
        rng: Optional[np.random.Generator] = None,
        retain: bool = False,
    ) -> AudioLatent:
        """
        Args:
            x: (D_a,) 或 (N, D_a) 平滑后的特征
            eps: 指定的标准正态噪声；为 None 时从 rng 抽取
            rng: 噪声随机数生成器（缺省为种子0）
            retain: 保留中间结果供 backward

        Returns:
            AudioLatent（单帧输入时各分量为一维）
        """
        x2, squeeze = self._check(x)
        out = self.encoder.forward(x2, retain=retain)
        mean = out[:, :self.latent_width]
        log_var = out[:, self.latent_width:]
        if eps is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            eps = rng.standard_normal(mean.shape)
        eps = np.asarray(eps, dtype=self.store.dtype).reshape(mean.shape)
        std = np.exp(0.5 * log_var)
        z = mean + std * eps
        if retain:
            self._cache = {"x": x2, "mean": mean, "log_var": log_var, "eps": eps, "std": std}
        if squeeze:
            return AudioLatent(mean[0], log_var[0], z[0])
        return AudioLatent(mean, log_var, z)

    def decode(self, z: np.ndarray, retain: bool = False) -> np.ndarray:
        z = np.asarray(z, dtype=self.store.dtype)
        squeeze = z.ndim == 1
        z2 = z[None, :] if squeeze else z
        if z2.ndim != 2 or z2.shape[1] != self.latent_width:
            raise ShapeError(f"{self.name} 潜变量宽度不匹配", f"期望 {self.latent_width}，得到 {z.shape}")
        recon = self.decoder.forward(z2, retain=retain)
        return recon[0] if squeeze else recon

    def objective(
        self,
        x: np.ndarray,
        eps: Optional[np.ndarray] = None,
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[float, float, float, AudioLatent]:
        """
        前向计算训练目标并保留中间结果

        Returns:
            (总目标, 重建 MSE, KL, 潜变量)
        """
        x2, _ = self._check(x)
        latent = self.encode(x2, eps=eps, rng=rng, retain=True)
        recon = self.decode(latent.z, retain=True)
        mse = float(np.mean((recon - x2) ** 2))
        kl = kl_divergence(latent.mean, latent.log_var)
        self._cache["recon"] = recon
        return mse + self.kl_weight * kl, mse, kl, latent

    def backward(self, scale: float = 1.0, mean_grad: Optional[np.ndarray] = None) -> np.ndarray:
        """
        训练目标的反向传播

        Args:
            scale: 目标在总损失中的权重
            mean_grad: 下游（如 DLT）对 μ 的额外梯度 (N, D_z)

        Returns:
            对输入特征的梯度
        """
        if self._cache is None or "recon" not in self._cache:
            raise StateError(f"{self.name} 在 objective 之前调用了 backward")
        c = self._cache
        n, d = c["x"].shape
        g_recon = scale * 2.0 * (c["recon"] - c["x"]) / (n * d)
        g_z = self.decoder.backward(g_recon)
        beta = scale * self.kl_weight / n
        g_mean = g_z + beta * c["mean"]
        g_log_var = g_z * 0.5 * c["std"] * c["eps"] + beta * 0.5 * (np.exp(c["log_var"]) - 1.0)
        if mean_grad is not None:
            mean_grad = np.asarray(mean_grad, dtype=self.store.dtype)
            if mean_grad.shape != g_mean.shape:
                raise ShapeError(f"{self.name} μ 的梯度形状不匹配", f"期望 {g_mean.shape}，得到 {mean_grad.shape}")
            g_mean = g_mean + mean_grad
        return self.encoder.backward(np.concatenate([g_mean, g_log_var], axis=1))


def vae_encode(vae: AudioVae, features: np.ndarray, eps: Optional[np.ndarray] = None, rng=None) -> AudioLatent:
    return vae.encode(features, eps=eps, rng=rng)


def vae_decode(vae: AudioVae, z: np.ndarray) -> np.ndarray:
    return vae.decode(z)
