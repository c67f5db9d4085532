# -*- coding: utf-8 -*-
"""
训练模块包
损失、感知距离、嘴部 patch、运动训练与辐射场两阶段训练
"""

from .train_config import TrainConfig
from .perceptual import PerceptualMetric
from .losses import coarse_loss, coarse_loss_grad, fine_loss, fine_loss_and_grad
from .patches import mouth_region, sample_patch, crop, center_patch
from .curve import LossCurve
from .models import (
    MotionModels,
    FieldModels,
    build_motion_models,
    build_field_models,
    load_motion_models,
    load_field_models,
    latest_checkpoint,
)
from .conditioning import FrameConditions, teacher_forced_conditions, predicted_conditions
from .motion_trainer import TrainResult, train_motion, prepare_motion_models
from .field_trainer import STAGES, train_stage, field_checkpoint_name

__all__ = [
    "TrainConfig",
    "PerceptualMetric",
    "coarse_loss",
    "coarse_loss_grad",
    "fine_loss",
    "fine_loss_and_grad",
    "mouth_region",
    "sample_patch",
    "crop",
    "center_patch",
    "LossCurve",
    "MotionModels",
    "FieldModels",
    "build_motion_models",
    "build_field_models",
    "load_motion_models",
    "load_field_models",
    "latest_checkpoint",
    "FrameConditions",
    "teacher_forced_conditions",
    "predicted_conditions",
    "TrainResult",
    "train_motion",
    "prepare_motion_models",
    "STAGES",
    "train_stage",
    "field_checkpoint_name",
]
