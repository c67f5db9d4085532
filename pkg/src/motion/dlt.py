# -*- coding: utf-8 -*-
"""
动态关键点 Transformer（DLT）
W 帧窗口 -> 逐帧线性嵌入 -> 单头缩放点积自注意力（残差） -> 均值池化
-> 拼接眨眼嵌入 -> 两层 MLP 输出 68×3 关键点（中心帧）
"""

import logging
from typing import Optional, Tuple

import numpy as np

from src.constants import LANDMARK_COUNT
from src.exceptions import ShapeError, StateError
from src.motion.landmarks import LandmarkSet
from src.nn.functional import softmax
from src.nn.mlp import Mlp
from src.nn.params import ParamStore

logger = logging.getLogger(__name__)

OUTPUT_WIDTH = LANDMARK_COUNT * 3


class DltModel:
    """
    参数命名：
        {name}.embed.*     逐帧嵌入
        {name}.attn.wq/wk/wv
        {name}.head.*      输出头，最后一层偏置初始化为数据集平均关键点
    """

    def __init__(
        self,
        store: ParamStore,
        input_width: int,
        window: int = 9,
        embed_width: int = 64,
        head_hidden: int = 64,
        blink_width: int = 4,
        mean_landmarks: Optional[np.ndarray] = None,
        name: str = "dlt",
    ):
        if window <= 0 or window % 2 == 0:
            raise ShapeError("DLT 窗口大小必须是正奇数", str(window))
        self.store = store
        self.name = name
        self.input_width = input_width
        self.window = window
        self.embed_width = embed_width
        self.blink_width = blink_width
        self.embed = Mlp(store, f"{name}.embed", [input_width, embed_width])
        for key in ("wq", "wk", "wv"):
            store.add(f"{name}.attn.{key}", (embed_width, embed_width), init="glorot")
        self.head = Mlp(store, f"{name}.head", [embed_width + blink_width, head_hidden, OUTPUT_WIDTH])
        if mean_landmarks is not None:
            store.assign(f"{name}.head.b1", np.asarray(mean_landmarks).reshape(OUTPUT_WIDTH))
        self._cache: Optional[dict] = None

    def _w(self, key: str) -> np.ndarray:
        return self.store[f"{self.name}.attn.{key}"]

    def _check(self, windows: np.ndarray, blink: np.ndarray) -> Tuple[np.ndarray, np.ndarray, bool]:
        windows = np.asarray(windows, dtype=self.store.dtype)
        blink = np.asarray(blink, dtype=self.store.dtype)
        squeeze = windows.ndim == 2
        x = windows[None] if squeeze else windows
        b = blink[None] if blink.ndim == 1 else blink
        if x.ndim != 3 or x.shape[1] != self.window:
            raise ShapeError(f"{self.name} 窗口长度必须为 {self.window}", str(windows.shape))
        if x.shape[2] != self.input_width:
            raise ShapeError(f"{self.name} 输入宽度不匹配", f"期望 {self.input_width}，得到 {x.shape[2]}")
        if b.shape != (x.shape[0], self.blink_width):
            raise ShapeError(
                f"{self.name} 眨眼编码宽度不匹配",
                f"期望 {(x.shape[0], self.blink_width)}，得到 {blink.shape}",
            )
        return x, b, squeeze

    def forward(self, windows: np.ndarray, blink: np.ndarray, retain: bool = True) -> np.ndarray:
        """
        Args:
            windows: (W, D_in) 或 (N, W, D_in)
            blink: (D_b,) 或 (N, D_b)
            retain: 保留中间结果供 backward

        Returns:
            (204,) 或 (N, 204)
        """
        x, b, squeeze = self._check(windows, blink)
        n, w, _ = x.shape
        e = self.embed.forward(x.reshape(n * w, -1), retain=retain).reshape(n, w, self.embed_width)
        q = e @ self._w("wq")
        k = e @ self._w("wk")
        v = e @ self._w("wv")
        scale = 1.0 / np.sqrt(self.embed_width)
        attn = softmax(np.einsum("nie,nje->nij", q, k) * scale, axis=-1)
        o = np.einsum("nij,nje->nie", attn, v)
        pooled = (e + o).mean(axis=1)
        out = self.head.forward(np.concatenate([pooled, b], axis=1), retain=retain)
        if retain:
            self._cache = {"e": e, "q": q, "k": k, "v": v, "attn": attn, "scale": scale, "squeeze": squeeze}
        return out[0] if squeeze else out

    def backward(self, upstream: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Args:
            upstream: (204,) 或 (N, 204)

        Returns:
            (对窗口输入的梯度, 对眨眼编码的梯度)
        """
        if self._cache is None:
            raise StateError(f"{self.name} 在 forward 之前调用了 backward")
        c = self._cache
        g = np.asarray(upstream, dtype=self.store.dtype)
        g = g[None] if g.ndim == 1 else g
        g_cat = self.head.backward(g)
        g_pooled = g_cat[:, :self.embed_width]
        g_blink = g_cat[:, self.embed_width:]

        e, q, k, v, attn, scale = c["e"], c["q"], c["k"], c["v"], c["attn"], c["scale"]
        n, w, _ = e.shape
        g_h = np.repeat(g_pooled[:, None, :] / w, w, axis=1)
        g_e = g_h.copy()
        g_o = g_h
        g_attn = np.einsum("nie,nje->nij", g_o, v)
        g_v = np.einsum("nij,nie->nje", attn, g_o)
        g_s = attn * (g_attn - np.sum(g_attn * attn, axis=-1, keepdims=True)) * scale
        g_q = np.einsum("nij,nje->nie", g_s, k)
        g_k = np.einsum("nij,nie->nje", g_s, q)

        self.store.accumulate(f"{self.name}.attn.wq", np.einsum("nwe,nwf->ef", e, g_q))
        self.store.accumulate(f"{self.name}.attn.wk", np.einsum("nwe,nwf->ef", e, g_k))
        self.store.accumulate(f"{self.name}.attn.wv", np.einsum("nwe,nwf->ef", e, g_v))
        g_e += g_q @ self._w("wq").T + g_k @ self._w("wk").T + g_v @ self._w("wv").T

        g_x = self.embed.backward(g_e.reshape(n * w, self.embed_width)).reshape(n, w, self.input_width)
        if c["squeeze"]:
            return g_x[0], g_blink[0]
        return g_x, g_blink


def dlt_predict(model: DltModel, window: np.ndarray, blink_code: np.ndarray, frame: int = 0) -> LandmarkSet:
    """对窗口中心帧预测关键点（只读参数，可并发）"""
    window = np.asarray(window)
    if window.ndim != 2:
        raise ShapeError("dlt_predict 只接受单个窗口 (W, D_in)", str(window.shape))
    out = model.forward(window, blink_code, retain=False)
    return LandmarkSet(out.reshape(LANDMARK_COUNT, 3), frame)
