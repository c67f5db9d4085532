# -*- coding: utf-8 -*-
"""
有限差分梯度校验工具
"""

from typing import Callable, Optional

import numpy as np


def relative_error(analytic: float, numeric: float, floor: float = 1e-4) -> float:
    """|a - n| / max(|a|, |n|, floor)，floor 防止接近零的梯度放大误差"""
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def central_difference(loss_fn: Callable[[], float], array: np.ndarray, index: tuple, eps: float = 1e-3) -> float:
    """
    对 array[index] 做中心差分，array 原地扰动后恢复

    Args:
        loss_fn: 无参数，按当前数组值返回标量损失
        array: 被扰动的数组
        index: 元素下标
        eps: 步长
    """
    original = array[index].copy()
    array[index] = original + eps
    plus = float(loss_fn())
    array[index] = original - eps
    minus = float(loss_fn())
    array[index] = original
    return (plus - minus) / (2.0 * eps)


def max_gradient_error(
    loss_fn: Callable[[], float],
    array: np.ndarray,
    analytic: np.ndarray,
    points: int = 50,
    rng: Optional[np.random.Generator] = None,
    eps: float = 1e-3,
    floor: float = 1e-4,
    indices: Optional[list] = None,
) -> float:
    """
    随机抽取若干元素，返回解析梯度与数值梯度的最大相对误差

    Args:
        loss_fn: 标量损失
        array: 参数或输入数组
        analytic: 与 array 同形状的解析梯度
        points: 抽样个数
        rng: 随机数生成器
        eps: 差分步长
        floor: 相对误差分母下限
        indices: 指定要检查的下标（给定时忽略 points/rng）
    """
    if analytic.shape != array.shape:
        raise ValueError(f"梯度形状 {analytic.shape} 与数组 {array.shape} 不一致")
    if indices is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        flat = rng.choice(array.size, size=min(points, array.size), replace=False)
        indices = [np.unravel_index(int(i), array.shape) for i in flat]
    worst = 0.0
    for index in indices:
        numeric = central_difference(loss_fn, array, index, eps)
        worst = max(worst, relative_error(float(analytic[index]), numeric, floor))
    return worst
