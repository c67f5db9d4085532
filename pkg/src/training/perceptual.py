# -*- coding: utf-8 -*-
"""
感知距离代理
固定种子、从不训练的三层卷积特征提取器（3 -> 8 -> 16 -> 16，3×3 valid 卷积 + ReLU）。
距离 = 原始像素层的 MSE + 各卷积层通道归一化特征差的加权平均。
"""

import hashlib
import logging
from typing import List, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.exceptions import ShapeError

logger = logging.getLogger(__name__)

NORM_EPS = 1e-8


class PerceptualMetric:
    """冻结的随机卷积感知距离；可替换为其他实现相同接口的后端"""

    def __init__(
        self,
        seed: int = 0,
        channels: Sequence[int] = (8, 16, 16),
        layer_weights: Sequence[float] = (1.0, 1.0, 1.0, 1.0),
    ):
        if len(layer_weights) != len(channels) + 1:
            raise ShapeError("层权重个数必须为卷积层数+1", str(list(layer_weights)))
        rng = np.random.default_rng(seed)
        self.kernels: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        in_ch = 3
        for out_ch in channels:
            std = np.sqrt(2.0 / (in_ch * 9))
            self.kernels.append(rng.normal(0.0, std, size=(out_ch, in_ch, 3, 3)))
            self.biases.append(rng.normal(0.0, 0.01, size=out_ch))
            in_ch = out_ch
        self.layer_weights = tuple(float(w) for w in layer_weights)
        for arr in self.kernels + self.biases:
            arr.setflags(write=False)

    def fingerprint(self) -> str:
        """权重的 SHA-256，用于确认提取器未被修改"""
        h = hashlib.sha256()
        for arr in self.kernels + self.biases:
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()

    @property
    def min_size(self) -> int:
        return 2 * len(self.kernels) + 1

    # ------------------------------------------------------------------

    def _features(self, image: np.ndarray) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        """返回各卷积层的 (pre, post)"""
        pres, posts = [], []
        h = image
        for kernel, bias in zip(self.kernels, self.biases):
            windows = sliding_window_view(h, (3, 3), axis=(0, 1))  # (H-2, W-2, C, 3, 3)
            pre = np.einsum("ijcab,ocab->ijo", windows, kernel) + bias
            post = np.maximum(pre, 0.0)
            pres.append(pre)
            posts.append(post)
            h = post
        return pres, posts

    @staticmethod
    def _normalize(feat: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        norm = np.sqrt(np.sum(feat ** 2, axis=-1, keepdims=True) + NORM_EPS)
        return feat / norm, norm

    def _check(self, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise ShapeError("感知距离的两幅图像形状不一致", f"{a.shape} vs {b.shape}")
        if a.ndim != 3 or a.shape[2] != 3:
            raise ShapeError("感知距离需要 (H, W, 3) 图像", str(a.shape))
        if min(a.shape[0], a.shape[1]) < self.min_size:
            raise ShapeError(f"图像至少需要 {self.min_size}×{self.min_size}", str(a.shape))
        return a, b

    def distance(self, a: np.ndarray, b: np.ndarray) -> float:
        """对称、非负，当且仅当两图相同时为0"""
        return self.distance_and_grad(a, b, with_grad=False)[0]

    def distance_and_grad(self, a: np.ndarray, b: np.ndarray, with_grad: bool = True):
        """
        Returns:
            (距离, 对 a 的梯度或 None)
        """
        a, b = self._check(a, b)
        diff = a - b
        total = self.layer_weights[0] * float(np.mean(diff ** 2))
        pres_a, posts_a = self._features(a)
        _, posts_b = self._features(b)
        layer_grads = []
        for level, (fa, fb) in enumerate(zip(posts_a, posts_b), start=1):
            na, norm_a = self._normalize(fa)
            nb, _ = self._normalize(fb)
            delta = na - nb
            count = fa.shape[0] * fa.shape[1]
            weight = self.layer_weights[level]
            total += weight * float(np.sum(delta ** 2) / count)
            if with_grad:
                g_n = weight * 2.0 * delta / count
                g_f = (g_n - na * np.sum(g_n * na, axis=-1, keepdims=True)) / norm_a
                layer_grads.append(g_f)
        if not with_grad:
            return total, None

        g_img = self.layer_weights[0] * 2.0 * diff / diff.size
        # 从最深层向输入回传，逐层叠加各层距离的梯度
        g = np.zeros_like(posts_a[-1])
        for level in reversed(range(len(self.kernels))):
            g = g + layer_grads[level]
            g_pre = g * (pres_a[level] > 0)
            g = self._conv_input_grad(g_pre, self.kernels[level])
        return total, g_img + g

    @staticmethod
    def _conv_input_grad(g_out: np.ndarray, kernel: np.ndarray) -> np.ndarray:
        """valid 3×3 卷积对输入的梯度（9个偏移累加）"""
        h, w, _ = g_out.shape
        g_in = np.zeros((h + 2, w + 2, kernel.shape[1]))
        for da in range(3):
            for db in range(3):
                g_in[da:da + h, db:db + w] += g_out @ kernel[:, :, da, db]
        return g_in
