# -*- coding: utf-8 -*-
"""
固定拓扑多层感知机
前向保留激活值，反向把参数梯度累加进 ParamStore 并返回输入梯度
"""

from typing import List, Optional, Sequence

import numpy as np

from src.exceptions import ShapeError, StateError
from src.nn.functional import ACTIVATIONS, activation_backward
from src.nn.params import ParamStore


class Mlp:
    """
    全连接网络：隐藏层 ReLU，输出层 identity | sigmoid | softplus

    权重 `{name}.w{i}` 形状 (in, out)，偏置 `{name}.b{i}` 形状 (out,)。
    """

    def __init__(
        self,
        store: ParamStore,
        name: str,
        widths: Sequence[int],
        output_activation: str = "identity",
        hidden_activation: str = "relu",
    ):
        """
        Args:
            store: 参数仓库
            name: 子网络名（检查点中的前缀）
            widths: 各层宽度，至少两个元素
            output_activation: 输出激活
            hidden_activation: 隐藏层激活
        """
        if len(widths) < 2 or any(w <= 0 for w in widths):
            raise ShapeError(f"{name} 的层宽度非法", str(list(widths)))
        for kind in (output_activation, hidden_activation):
            if kind not in ACTIVATIONS:
                raise ShapeError(f"{name} 的激活函数未知", kind)
        self.store = store
        self.name = name
        self.widths = [int(w) for w in widths]
        self.output_activation = output_activation
        self.hidden_activation = hidden_activation
        for i in range(len(self.widths) - 1):
            store.add(f"{name}.w{i}", (self.widths[i], self.widths[i + 1]), init="glorot")
            store.add(f"{name}.b{i}", (self.widths[i + 1],), init="zeros")
        self._cache: Optional[dict] = None

    @property
    def in_width(self) -> int:
        return self.widths[0]

    @property
    def out_width(self) -> int:
        return self.widths[-1]

    @property
    def num_layers(self) -> int:
        return len(self.widths) - 1

    def param_names(self) -> List[str]:
        return self.store.names(f"{self.name}.")

    def weight(self, i: int) -> np.ndarray:
        return self.store[f"{self.name}.w{i}"]

    def bias(self, i: int) -> np.ndarray:
        return self.store[f"{self.name}.b{i}"]

    def _activation(self, layer: int) -> str:
        return self.output_activation if layer == self.num_layers - 1 else self.hidden_activation

    def forward(self, x: np.ndarray, retain: bool = True) -> np.ndarray:
        """
        前向计算

        Args:
            x: (in,) 或 (N, in)
            retain: 是否保留激活供 backward 使用

        Returns:
            (out,) 或 (N, out)
        """
        x = np.asarray(x, dtype=self.store.dtype)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        if h.ndim != 2 or h.shape[1] != self.in_width:
            raise ShapeError(
                f"{self.name}.layer0 输入宽度不匹配",
                f"期望 {self.in_width}，得到 {x.shape}",
            )
        inputs, pres, posts = [], [], []
        for i in range(self.num_layers):
            inputs.append(h)
            pre = h @ self.weight(i) + self.bias(i)
            post = ACTIVATIONS[self._activation(i)][0](pre)
            pres.append(pre)
            posts.append(post)
            h = post
        if retain:
            self._cache = {"inputs": inputs, "pres": pres, "posts": posts, "squeeze": squeeze}
        return h[0] if squeeze else h

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        """
        反向传播，参数梯度累加到 store

        Args:
            upstream: 与输出同形状的上游梯度

        Returns:
            对输入的梯度
        """
        if self._cache is None:
            raise StateError(f"{self.name} 在 forward 之前调用了 backward")
        cache = self._cache
        g = np.asarray(upstream, dtype=self.store.dtype)
        if cache["squeeze"]:
            g = g[None, :] if g.ndim == 1 else g
        expected = cache["posts"][-1].shape
        if g.shape != expected:
            raise ShapeError(f"{self.name} 上游梯度形状不匹配", f"期望 {expected}，得到 {g.shape}")

        for i in reversed(range(self.num_layers)):
            g = activation_backward(self._activation(i), cache["pres"][i], cache["posts"][i], g)
            self.store.accumulate(f"{self.name}.w{i}", cache["inputs"][i].T @ g)
            self.store.accumulate(f"{self.name}.b{i}", g.sum(axis=0))
            g = g @ self.weight(i).T
        return g[0] if cache["squeeze"] else g

    def zero_(self) -> None:
        """权重和偏置全部置零（消融与测试用）"""
        for name in self.param_names():
            self.store[name].fill(0)
