# -*- coding: utf-8 -*-
"""
训练配置
"""

from dataclasses import dataclass, fields
from typing import Dict

from src.exceptions import ConfigError

# TrainConfig 字段 -> 配置文件中的点号键
FIELD_KEYS: Dict[str, str] = {
    "seed": "train.seed",
    "coarse_iters": "train.coarse.iters",
    "fine_iters": "train.fine.iters",
    "rays_per_batch": "train.rays_per_batch",
    "patch_size": "train.fine.patch_size",
    "fine_lambda": "train.fine.lambda",
    "lr_tables": "train.lr.tables",
    "lr_mlp": "train.lr.mlp",
    "lr_motion": "train.lr.motion",
    "warmup_iters": "train.warmup_iters",
    "beta1": "train.adam.beta1",
    "beta2": "train.adam.beta2",
    "adam_eps": "train.adam.eps",
    "mouth_dilation": "train.mouth.dilation",
    "checkpoint_interval": "train.checkpoint_interval",
    "log_interval": "train.log_interval",
    "motion_iters": "train.motion.iters",
    "motion_batch_frames": "train.motion.batch_frames",
    "blink_weight": "train.motion.blink_weight",
    "train_samples": "render.train_samples",
    "holdout_every": "data.holdout_every",
}


@dataclass(frozen=True)
class TrainConfig:
    """两阶段训练与运动训练的超参数"""

    seed: int = 0
    coarse_iters: int = 20000
    fine_iters: int = 5000
    rays_per_batch: int = 4096
    patch_size: int = 32
    fine_lambda: float = 0.001
    lr_tables: float = 1e-2
    lr_mlp: float = 1e-3
    lr_motion: float = 1e-3
    warmup_iters: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    mouth_dilation: int = 8
    checkpoint_interval: int = 1000
    log_interval: int = 100
    motion_iters: int = 2000
    motion_batch_frames: int = 16
    blink_weight: float = 1.0
    train_samples: int = 64
    holdout_every: int = 8

    def __post_init__(self):
        if self.fine_lambda < 0:
            raise ConfigError("train.fine.lambda 必须非负", str(self.fine_lambda))
        for name in ("coarse_iters", "fine_iters", "motion_iters", "warmup_iters"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{FIELD_KEYS[name]} 必须非负", str(getattr(self, name)))
        for name in ("rays_per_batch", "patch_size", "checkpoint_interval", "log_interval", "motion_batch_frames"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{FIELD_KEYS[name]} 必须为正", str(getattr(self, name)))
        if self.train_samples < 2:
            raise ConfigError("render.train_samples 至少为2", str(self.train_samples))
        if self.holdout_every < 0:
            raise ConfigError("data.holdout_every 必须非负", str(self.holdout_every))

    @classmethod
    def from_config(cls, cfg) -> "TrainConfig":
        return cls(**{f.name: cfg[FIELD_KEYS[f.name]] for f in fields(cls)})

    def field_lr(self) -> Dict[str, float]:
        """辐射场参数组：哈希表 / MLP"""
        return {"plane_": self.lr_tables, "field.": self.lr_mlp, "cond.": self.lr_mlp}

    def check_patch(self, width: int, height: int) -> None:
        if self.patch_size > min(width, height):
            raise ConfigError(
                "train.fine.patch_size 超过图像尺寸",
                f"patch {self.patch_size}，图像 {width}x{height}",
            )
