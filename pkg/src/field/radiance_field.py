# -*- coding: utf-8 -*-
"""
条件辐射场 F: (x, d, cond) -> (c, σ)

密度分支 `field.sigma`: f_x ‖ cond -> 64 -> 64 -> 1 + geo
颜色分支 `field.color`: geo ‖ SH(d) -> 64 -> 64 -> 3 (sigmoid)
σ 只依赖 x 和 cond，与视线方向无关。
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.constants import SH_WIDTH
from src.encoders.hash_grid import TriplaneEncoder
from src.encoders.spherical_harmonics import sh_encode
from src.exceptions import ConfigError, ShapeError, StateError
from src.nn.functional import sigmoid, softplus
from src.nn.mlp import Mlp
from src.nn.params import ParamStore

logger = logging.getLogger(__name__)

# exp 密度激活的指数上限
EXP_CLAMP = 15.0


@dataclass
class FieldOutput:
    """color (…, 3) ∈ [0,1]，sigma (…) ≥ 0"""

    color: np.ndarray
    sigma: np.ndarray


class RadianceField:
    """由三平面编码器和两支解码 MLP 组成的条件辐射场"""

    def __init__(
        self,
        store: ParamStore,
        encoder: TriplaneEncoder,
        condition_width: int,
        hidden: int = 64,
        geo_width: int = 15,
        density_activation: str = "softplus",
    ):
        if density_activation not in ("softplus", "exp"):
            raise ConfigError("未知密度激活", density_activation)
        self.store = store
        self.encoder = encoder
        self.condition_width = condition_width
        self.geo_width = geo_width
        self.density_activation = density_activation
        self.sigma_net = Mlp(store, "field.sigma", [encoder.output_width + condition_width, hidden, hidden, 1 + geo_width])
        self.color_net = Mlp(store, "field.color", [geo_width + SH_WIDTH, hidden, hidden, 3], output_activation="sigmoid")
        self._cache: Optional[dict] = None

    def _density(self, pre: np.ndarray) -> np.ndarray:
        if self.density_activation == "softplus":
            return softplus(pre)
        return np.exp(np.minimum(pre, EXP_CLAMP))

    def _density_grad(self, pre: np.ndarray) -> np.ndarray:
        if self.density_activation == "softplus":
            return sigmoid(pre)
        return np.where(pre < EXP_CLAMP, np.exp(np.minimum(pre, EXP_CLAMP)), 0.0)

    def _condition(self, cond, n: int) -> np.ndarray:
        c = np.asarray(getattr(cond, "fused", cond), dtype=self.store.dtype)
        if c.ndim == 1:
            c = np.broadcast_to(c, (n, c.shape[0]))
        if c.shape != (n, self.condition_width):
            raise ShapeError("条件向量宽度不匹配", f"期望 {(n, self.condition_width)}，得到 {c.shape}")
        return c

    def forward(self, x: np.ndarray, d: np.ndarray, cond, retain: bool = True) -> FieldOutput:
        """
        Args:
            x: (N, 3) 单位立方体内的位置
            d: (N, 3) 单位视线方向
            cond: 条件（ConditionVector、(C,) 或每点 (N, C)）
            retain: 保留中间结果供 backward（并发只读评估时传 False）

        Returns:
            FieldOutput(color (N,3), sigma (N,))
        """
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        x2 = x[None] if squeeze else x
        d2 = np.asarray(d, dtype=np.float64)
        d2 = d2[None] if d2.ndim == 1 else d2
        if d2.shape != x2.shape:
            raise ShapeError("位置与方向数量不一致", f"{x.shape} vs {np.shape(d)}")
        sh = sh_encode(d2)
        lookups = self.encoder.lookup(x2)
        feats = self.encoder.encode(x2, lookups)
        c = self._condition(cond, x2.shape[0])
        out = self.sigma_net.forward(np.concatenate([feats, c], axis=1), retain=retain)
        pre = out[:, 0]
        sigma = self._density(pre)
        geo = out[:, 1:]
        color = self.color_net.forward(np.concatenate([geo, sh.astype(self.store.dtype)], axis=1), retain=retain)
        if retain:
            self._cache = {"x": x2, "lookups": lookups, "pre": pre}
        if squeeze:
            return FieldOutput(color[0], sigma[0])
        return FieldOutput(color, sigma)

    def backward(self, g_color: np.ndarray, g_sigma: np.ndarray) -> np.ndarray:
        """
        反向传播到哈希表和两支 MLP

        Returns:
            对条件向量的梯度 (N, C)
        """
        if self._cache is None:
            raise StateError("RadianceField 在 forward 之前调用了 backward")
        c = self._cache
        g_color = np.atleast_2d(np.asarray(g_color, dtype=self.store.dtype))
        g_sigma = np.atleast_1d(np.asarray(g_sigma, dtype=self.store.dtype))
        g_color_in = self.color_net.backward(g_color)
        g_out = np.empty((g_color.shape[0], 1 + self.geo_width), dtype=self.store.dtype)
        g_out[:, 0] = g_sigma * self._density_grad(c["pre"])
        g_out[:, 1:] = g_color_in[:, :self.geo_width]
        g_in = self.sigma_net.backward(g_out)
        width = self.encoder.output_width
        self.encoder.backward(c["x"], g_in[:, :width], c["lookups"])
        return g_in[:, width:]

    def closure(self, cond) -> Callable[[np.ndarray, np.ndarray], FieldOutput]:
        """固定条件的只读评估闭包，供渲染器使用"""

        def evaluate(x: np.ndarray, d: np.ndarray) -> FieldOutput:
            return self.forward(x, d, cond, retain=False)

        return evaluate


def field_eval(field: RadianceField, x, d, cond) -> FieldOutput:
    """单点（或批量）辐射场评估"""
    return field.forward(np.asarray(x, dtype=np.float64), np.asarray(d, dtype=np.float64), cond, retain=False)
