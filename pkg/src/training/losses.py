# -*- coding: utf-8 -*-
"""
光度损失
粗阶段：采样像素集合上的平方误差和
细阶段：嘴部 patch 的平方误差和 + λ·感知距离
"""

from typing import Tuple

import numpy as np

from src.exceptions import DomainError, ShapeError
from src.training.perceptual import PerceptualMetric


def _pair(pred: np.ndarray, gt: np.ndarray, what: str) -> Tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeError(f"{what} 预测与真值形状不一致", f"{pred.shape} vs {gt.shape}")
    return pred, gt


def coarse_loss(pred_pixels: np.ndarray, gt_pixels: np.ndarray) -> float:
    """Σ_i ‖C(i) − Ĉ(i)‖²"""
    pred, gt = _pair(pred_pixels, gt_pixels, "coarse_loss")
    return float(np.sum((pred - gt) ** 2))


def coarse_loss_grad(pred_pixels: np.ndarray, gt_pixels: np.ndarray) -> np.ndarray:
    pred, gt = _pair(pred_pixels, gt_pixels, "coarse_loss")
    return 2.0 * (pred - gt)


def fine_loss(
    pred_patch: np.ndarray,
    gt_patch: np.ndarray,
    metric: PerceptualMetric,
    lam: float = 0.001,
) -> Tuple[float, float, float]:
    """
    Returns:
        (总损失, 平方误差和, 感知距离)
    """
    if lam < 0:
        raise DomainError("λ 必须非负", str(lam))
    pred, gt = _pair(pred_patch, gt_patch, "fine_loss")
    mse = float(np.sum((pred - gt) ** 2))
    perceptual = metric.distance(pred, gt)
    return mse + lam * perceptual, mse, perceptual


def fine_loss_and_grad(
    pred_patch: np.ndarray,
    gt_patch: np.ndarray,
    metric: PerceptualMetric,
    lam: float = 0.001,
) -> Tuple[float, float, float, np.ndarray]:
    """fine_loss 及其对预测 patch 的梯度"""
    if lam < 0:
        raise DomainError("λ 必须非负", str(lam))
    pred, gt = _pair(pred_patch, gt_patch, "fine_loss")
    mse = float(np.sum((pred - gt) ** 2))
    perceptual, g_perc = metric.distance_and_grad(pred, gt)
    grad = 2.0 * (pred - gt) + lam * g_perc
    return mse + lam * perceptual, mse, perceptual, grad
