# -*- coding: utf-8 -*-
"""
图像质量指标
"""

import math
from typing import Union

import numpy as np

from src.constants import PSNR_INF_SENTINEL
from src.exceptions import DomainError, ShapeError


def psnr(pred: np.ndarray, gt: np.ndarray) -> float:
    """
    10·log10(1 / MSE)，所有通道一起平均

    Args:
        pred: 预测图像，取值 [0,1]
        gt: 真值图像，同形状

    Returns:
        dB；两幅图完全相同时为 +inf
    """
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeError("PSNR 输入尺寸不一致", f"{pred.shape} vs {gt.shape}")
    if pred.size == 0:
        raise ShapeError("PSNR 输入为空")
    for name, img in (("pred", pred), ("gt", gt)):
        if np.any(img < 0.0) or np.any(img > 1.0):
            raise DomainError(f"PSNR 的 {name} 取值必须在 [0,1] 内")
    mse = float(np.mean((pred - gt) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def format_psnr(value: float) -> Union[float, str]:
    """报告用：+inf 写成哨兵字符串"""
    return PSNR_INF_SENTINEL if math.isinf(value) and value > 0 else float(value)


def mean_psnr(values) -> float:
    """逐帧 PSNR 的平均；任一帧为 +inf 时只在全部为 +inf 时返回 +inf"""
    values = np.asarray(list(values), dtype=np.float64)
    if values.size == 0:
        return float("nan")
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return math.inf
    return float(finite.mean())
