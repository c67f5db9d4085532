# -*- coding: utf-8 -*-
"""
音频 -> 运动模块包
声学特征平滑、VAE 潜空间、动态关键点 Transformer 与位置损失
"""

from .landmarks import LandmarkSet, stack_landmarks, positional_loss, positional_loss_grad
from .audio import AudioFeatureFrame, temporal_filter, smooth_features, build_windows, window_indices
from .vae import AudioLatent, AudioVae, kl_divergence, vae_encode, vae_decode
from .dlt import DltModel, dlt_predict

__all__ = [
    "LandmarkSet",
    "stack_landmarks",
    "positional_loss",
    "positional_loss_grad",
    "AudioFeatureFrame",
    "temporal_filter",
    "smooth_features",
    "build_windows",
    "window_indices",
    "AudioLatent",
    "AudioVae",
    "kl_divergence",
    "vae_encode",
    "vae_decode",
    "DltModel",
    "dlt_predict",
]
