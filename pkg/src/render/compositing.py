# -*- coding: utf-8 -*-
"""
体渲染求积
α_i = 1 - exp(-σ_i δ_i)，T_i = exp(-Σ_{j<i} σ_j δ_j)，w_i = T_i α_i
C = Σ w_i c_i + T_final · background
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.exceptions import NumericError, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class RaySamples:
    """t (N,n)、δ (N,n)、σ (N,n)、c (N,n,3)"""

    t: np.ndarray
    deltas: np.ndarray
    sigma: np.ndarray
    color: np.ndarray


@dataclass
class CompositeResult:
    rgb: np.ndarray
    opacity: np.ndarray
    transmittance: np.ndarray
    weights: np.ndarray


def _first_bad(mask: np.ndarray) -> tuple:
    idx = np.argwhere(mask)[0]
    return tuple(int(i) for i in idx[:2])


def composite(samples: RaySamples, background=(1.0, 1.0, 1.0)) -> CompositeResult:
    """
    Args:
        samples: 单条光线 (n,) / (n,3) 或批量 (N,n) / (N,n,3)
        background: 背景 RGB

    Returns:
        CompositeResult：rgb (N,3)、opacity (N,)、transmittance (N, n+1)
        （最后一列为 T_final）、weights (N,n)；单条光线时去掉批维
    """
    sigma = np.asarray(samples.sigma, dtype=np.float64)
    color = np.asarray(samples.color, dtype=np.float64)
    deltas = np.asarray(samples.deltas, dtype=np.float64)
    squeeze = sigma.ndim == 1
    if squeeze:
        sigma, color, deltas = sigma[None], color[None], deltas[None]
    if color.shape != sigma.shape + (3,) or deltas.shape != sigma.shape:
        raise ShapeError("采样数组形状不一致", f"σ {sigma.shape}, c {color.shape}, δ {deltas.shape}")
    if not np.all(np.isfinite(sigma)):
        loc = _first_bad(~np.isfinite(sigma))
        raise NumericError("密度非有限", f"光线 {loc[0]} 采样 {loc[1]}", location=loc)
    if not np.all(np.isfinite(color)):
        loc = _first_bad(~np.isfinite(color))
        raise NumericError("颜色非有限", f"光线 {loc[0]} 采样 {loc[1]}", location=loc)

    optical = sigma * deltas
    accumulated = np.concatenate([np.zeros((sigma.shape[0], 1)), np.cumsum(optical, axis=1)], axis=1)
    trans = np.exp(-accumulated)
    alpha = -np.expm1(-optical)
    weights = trans[:, :-1] * alpha
    bg = np.asarray(background, dtype=np.float64)
    rgb = np.einsum("nk,nkc->nc", weights, color) + trans[:, -1:] * bg
    opacity = weights.sum(axis=1)
    result = CompositeResult(rgb, opacity, trans, weights)
    if squeeze:
        return CompositeResult(rgb[0], opacity[0], trans[0], weights[0])
    return result


def composite_backward(
    samples: RaySamples,
    result: CompositeResult,
    g_rgb: np.ndarray,
    background=(1.0, 1.0, 1.0),
    g_opacity: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    像素颜色（及不透明度）梯度回传到每个采样的 σ 和 c

    ∂C/∂σ_k = δ_k (T_{k+1} c_k − S_k)，S_k = Σ_{i>k} w_i c_i + T_final·bg
    ∂C/∂c_k = w_k

    Returns:
        (g_sigma (N,n), g_color (N,n,3))
    """
    sigma = np.atleast_2d(np.asarray(samples.sigma, dtype=np.float64))
    color = np.asarray(samples.color, dtype=np.float64)
    color = color[None] if color.ndim == 2 else color
    deltas = np.atleast_2d(np.asarray(samples.deltas, dtype=np.float64))
    trans = np.atleast_2d(result.transmittance)
    weights = np.atleast_2d(result.weights)
    g_rgb = np.atleast_2d(np.asarray(g_rgb, dtype=np.float64))
    bg = np.asarray(background, dtype=np.float64)

    wc = weights[..., None] * color
    total = wc.sum(axis=1) + trans[:, -1:] * bg
    suffix = total[:, None, :] - np.cumsum(wc, axis=1)
    d_pixel = trans[:, 1:, None] * color - suffix
    g_sigma = deltas * np.einsum("nkc,nc->nk", d_pixel, g_rgb)
    if g_opacity is not None:
        g_op = np.atleast_1d(np.asarray(g_opacity, dtype=np.float64))
        g_sigma += deltas * trans[:, -1:] * g_op[:, None]
    g_color = weights[..., None] * g_rgb[:, None, :]
    return g_sigma, g_color
