# -*- coding: utf-8 -*-
"""
分层采样
把 [t_near, t_far] 等分为 n 个区间，每个区间取一个点（抖动时均匀随机，否则取中点）
"""

from typing import Optional, Union

import numpy as np

from src.exceptions import DomainError

Seed = Union[int, np.random.Generator, None]


def _rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(0 if seed is None else seed)


def stratified_samples(
    t_near: np.ndarray,
    t_far: np.ndarray,
    n: int,
    jitter: bool = True,
    seed: Seed = None,
) -> np.ndarray:
    """
    Args:
        t_near, t_far: (N,)
        n: 每条光线的采样数（≥ 2）
        jitter: 是否在区间内随机抖动
        seed: 种子或 Generator

    Returns:
        (N, n) 升序的 t
    """
    if n < 2:
        raise DomainError("每条光线至少需要2个采样点", str(n))
    near = np.atleast_1d(np.asarray(t_near, dtype=np.float64))
    far = np.atleast_1d(np.asarray(t_far, dtype=np.float64))
    if np.any(far < near):
        raise DomainError("t_far 小于 t_near")
    if jitter:
        u = _rng(seed).random((near.shape[0], n))
    else:
        u = np.full((near.shape[0], n), 0.5)
    bins = (np.arange(n)[None, :] + u) / n
    return near[:, None] + (far - near)[:, None] * bins


def stratified_sample(ray, n: int, jitter: bool = True, seed: Seed = None) -> np.ndarray:
    """单条光线的分层采样 (n,)"""
    return stratified_samples(np.array([ray.t_near]), np.array([ray.t_far]), n, jitter, seed)[0]


def segment_lengths(t: np.ndarray, t_far: np.ndarray) -> np.ndarray:
    """δ_i = t_{i+1} - t_i，最后一段为 t_far - t_N"""
    t = np.atleast_2d(t)
    far = np.atleast_1d(np.asarray(t_far, dtype=np.float64))
    last = far[:, None] - t[:, -1:]
    return np.concatenate([np.diff(t, axis=1), last], axis=1)
