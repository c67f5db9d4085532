# -*- coding: utf-8 -*-
"""
多分辨率二维哈希网格与三平面编码器

每个平面是 L 层虚拟 2D 网格，第 l 层分辨率为 floor(N_min * b^l)。
顶点特征存放在 2^T × F 的表中：整层稠密网格装得下时直接按行优先下标
存储（无冲突），否则用异或素数哈希。查询点在每层做双线性插值，
由粗到细拼接。三平面特征按 XY ‖ YZ ‖ XZ 的固定顺序拼接。
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from src.constants import HASH_PRIMES, PLANE_AXES, PLANE_ORDER
from src.exceptions import ConfigError, DomainError, ShapeError
from src.nn.params import ParamStore

logger = logging.getLogger(__name__)

IntLike = Union[int, np.ndarray]


@dataclass(frozen=True)
class HashGridConfig:
    """哈希网格超参数（构造后不可变）"""

    level_count: int = 8
    features_per_entry: int = 2
    table_size_log2: int = 14
    base_resolution: int = 16
    per_level_scale: float = 1.32

    def __post_init__(self):
        if self.level_count <= 0 or self.features_per_entry <= 0 or self.base_resolution <= 0:
            raise ConfigError("哈希网格的层数/特征数/基础分辨率必须为正", str(self))
        if self.table_size_log2 < 1:
            raise ConfigError("哈希表至少需要2个条目", str(self))
        if not self.per_level_scale > 1.0:
            raise ConfigError("per_level_scale 必须大于1", str(self))

    @classmethod
    def from_config(cls, cfg) -> "HashGridConfig":
        section = cfg.section("hash")
        return cls(
            level_count=section["levels"],
            features_per_entry=section["features"],
            table_size_log2=section["table_size_log2"],
            base_resolution=section["base_resolution"],
            per_level_scale=section["per_level_scale"],
        )

    @property
    def table_size(self) -> int:
        return 1 << self.table_size_log2

    @property
    def output_width(self) -> int:
        return self.level_count * self.features_per_entry

    def resolution(self, level: int) -> int:
        return int(math.floor(self.base_resolution * self.per_level_scale ** level))

    def is_dense(self, level: int) -> bool:
        """该层 (res+1)^2 个顶点能否直接放进表里"""
        res = self.resolution(level)
        return (res + 1) ** 2 <= self.table_size


def spatial_hash(ix: IntLike, iy: IntLike, table_size: int) -> IntLike:
    """
    二维空间哈希：(ix·1) XOR (iy·2654435761)，再按表大小取掩码

    Args:
        ix, iy: 网格顶点整数坐标（标量或数组）
        table_size: 表大小，必须是2的幂

    Returns:
        [0, table_size) 内的下标
    """
    if table_size < 2 or table_size & (table_size - 1):
        raise DomainError("哈希表大小必须是2的幂", str(table_size))
    x = np.asarray(ix).astype(np.uint64)
    y = np.asarray(iy).astype(np.uint64)
    h = (x * np.uint64(HASH_PRIMES[0])) ^ (y * np.uint64(HASH_PRIMES[1]))
    out = (h & np.uint64(table_size - 1)).astype(np.int64)
    if out.ndim == 0:
        return int(out)
    return out


def _check_unit(points: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(points)):
        raise DomainError(f"{what} 含有非有限值")
    if points.size and (points.min() < 0.0 or points.max() > 1.0):
        bad = np.argwhere((points < 0.0) | (points > 1.0))[0]
        raise DomainError(
            f"{what} 超出单位范围",
            f"第 {int(bad[0])} 个点: {points[int(bad[0])].tolist()}",
        )


class PlanarHashGrid:
    """
    单个平面（XY / YZ / XZ）的多分辨率哈希网格
    表在 ParamStore 中命名为 `plane_{tag}.level{l}`
    """

    def __init__(self, store: ParamStore, config: HashGridConfig, plane: str, init_scale: float = 1e-4):
        if plane not in PLANE_AXES:
            raise ConfigError("未知平面标签", plane)
        self.store = store
        self.config = config
        self.plane = plane
        self.table_names = [f"plane_{plane}.level{l}" for l in range(config.level_count)]
        for name in self.table_names:
            store.add(name, (config.table_size, config.features_per_entry), init="uniform", scale=init_scale)

    @property
    def output_width(self) -> int:
        return self.config.output_width

    def table(self, level: int) -> np.ndarray:
        return self.store[self.table_names[level]]

    def lookup(self, uv: np.ndarray) -> List[Tuple[np.ndarray, np.ndarray]]:
        """
        计算每层4个角点的表下标和双线性权重

        Args:
            uv: (N, 2)，已在 [0,1]^2 内

        Returns:
            每层一个 (indices (N,4), weights (N,4))
        """
        cfg = self.config
        out = []
        uv64 = uv.astype(np.float64)
        for level in range(cfg.level_count):
            res = cfg.resolution(level)
            pos = uv64 * res
            base = np.clip(np.floor(pos), 0, res - 1).astype(np.int64)
            frac = pos - base
            fx, fy = frac[:, 0], frac[:, 1]
            x0, y0 = base[:, 0], base[:, 1]
            xs = np.stack([x0, x0 + 1, x0, x0 + 1], axis=1)
            ys = np.stack([y0, y0, y0 + 1, y0 + 1], axis=1)
            weights = np.stack(
                [(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy], axis=1
            ).astype(self.store.dtype)
            if cfg.is_dense(level):
                idx = xs + ys * (res + 1)
            else:
                idx = spatial_hash(xs, ys, cfg.table_size)
            out.append((idx, weights))
        return out

    def encode(self, uv: np.ndarray) -> np.ndarray:
        """
        平面编码：各层双线性插值后由粗到细拼接

        Args:
            uv: (2,) 或 (N, 2)，坐标须在 [0,1]^2 内

        Returns:
            (L·F,) 或 (N, L·F)
        """
        uv = np.asarray(uv, dtype=np.float64)
        squeeze = uv.ndim == 1
        uv2 = uv[None, :] if squeeze else uv
        if uv2.ndim != 2 or uv2.shape[1] != 2:
            raise ShapeError(f"plane_{self.plane} 需要 (N,2) 坐标", str(uv.shape))
        _check_unit(uv2, f"plane_{self.plane} 坐标")
        feats = self._gather(uv2, self.lookup(uv2))
        return feats[0] if squeeze else feats

    def _gather(self, uv2: np.ndarray, lookups) -> np.ndarray:
        F = self.config.features_per_entry
        feats = np.empty((uv2.shape[0], self.output_width), dtype=self.store.dtype)
        for level, (idx, w) in enumerate(lookups):
            rows = self.table(level)[idx]  # (N, 4, F)
            feats[:, level * F:(level + 1) * F] = np.einsum("nc,ncf->nf", w, rows)
        return feats

    def backward(self, uv: np.ndarray, upstream: np.ndarray, lookups=None) -> Dict[str, np.ndarray]:
        """
        把特征梯度按双线性权重散射回被访问的表行（每层至多4行）

        Args:
            uv: 前向时的坐标
            upstream: (L·F,) 或 (N, L·F)
            lookups: 可复用前向的 lookup 结果

        Returns:
            表名 -> 本次累加的梯度
        """
        uv = np.asarray(uv, dtype=np.float64)
        up = np.asarray(upstream, dtype=self.store.dtype)
        uv2 = uv[None, :] if uv.ndim == 1 else uv
        up2 = up[None, :] if up.ndim == 1 else up
        if up2.shape != (uv2.shape[0], self.output_width):
            raise ShapeError(
                f"plane_{self.plane} 上游梯度形状不匹配",
                f"期望 {(uv2.shape[0], self.output_width)}，得到 {up.shape}",
            )
        if lookups is None:
            _check_unit(uv2, f"plane_{self.plane} 坐标")
            lookups = self.lookup(uv2)
        F = self.config.features_per_entry
        T = self.config.table_size
        grads = {}
        for level, (idx, w) in enumerate(lookups):
            g = np.zeros((T, F), dtype=self.store.dtype)
            flat_idx = idx.ravel()
            for f in range(F):
                contrib = (w * up2[:, level * F + f, None]).ravel()
                g[:, f] = np.bincount(flat_idx, weights=contrib, minlength=T)
            name = self.table_names[level]
            self.store.accumulate(name, g)
            grads[name] = g
        return grads


class TriplaneEncoder:
    """
    三平面编码器 f_x = H^XY(x,y) ‖ H^YZ(y,z) ‖ H^XZ(x,z)
    三个平面共享配置但各自拥有独立的表
    """

    def __init__(self, store: ParamStore, config: HashGridConfig, init_scale: float = 1e-4):
        self.store = store
        self.config = config
        self.grids: Dict[str, PlanarHashGrid] = {
            tag: PlanarHashGrid(store, config, tag, init_scale) for tag in PLANE_ORDER
        }

    @property
    def output_width(self) -> int:
        return 3 * self.config.output_width

    def _project(self, x: np.ndarray, tag: str) -> np.ndarray:
        a, b = PLANE_AXES[tag]
        return x[:, [a, b]]

    def _points(self, x: np.ndarray) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x, dtype=np.float64)
        squeeze = x.ndim == 1
        x2 = x[None, :] if squeeze else x
        if x2.ndim != 2 or x2.shape[1] != 3:
            raise ShapeError("三平面编码需要 (N,3) 坐标", str(x.shape))
        _check_unit(x2, "三平面编码坐标")
        return x2, squeeze

    def lookup(self, x: np.ndarray) -> Dict[str, list]:
        x2, _ = self._points(x)
        return {tag: grid.lookup(self._project(x2, tag)) for tag, grid in self.grids.items()}

    def encode(self, x: np.ndarray, lookups: Dict[str, list] = None) -> np.ndarray:
        """
        Args:
            x: (3,) 或 (N,3)，须在单位立方体内
            lookups: 可选的预计算 lookup（训练时前向/反向共用）

        Returns:
            (3LF,) 或 (N, 3LF)
        """
        x2, squeeze = self._points(x)
        if lookups is None:
            lookups = {tag: grid.lookup(self._project(x2, tag)) for tag, grid in self.grids.items()}
        parts = [self.grids[tag]._gather(x2, lookups[tag]) for tag in PLANE_ORDER]
        feats = np.concatenate(parts, axis=1)
        return feats[0] if squeeze else feats

    def backward(self, x: np.ndarray, upstream: np.ndarray, lookups: Dict[str, list] = None) -> Dict[str, np.ndarray]:
        x2, _ = self._points(x)
        up = np.asarray(upstream, dtype=self.store.dtype)
        up2 = up[None, :] if up.ndim == 1 else up
        if up2.shape != (x2.shape[0], self.output_width):
            raise ShapeError(
                "三平面上游梯度形状不匹配",
                f"期望 {(x2.shape[0], self.output_width)}，得到 {up.shape}",
            )
        width = self.config.output_width
        grads: Dict[str, np.ndarray] = {}
        for i, tag in enumerate(PLANE_ORDER):
            grid = self.grids[tag]
            uv = self._project(x2, tag)
            block = up2[:, i * width:(i + 1) * width]
            grads.update(grid.backward(uv, block, None if lookups is None else lookups[tag]))
        return grads


# ---------------------------------------------------------------------------
# 函数式接口
# ---------------------------------------------------------------------------


def encode_plane(grid: PlanarHashGrid, u: float, v: float) -> np.ndarray:
    return grid.encode(np.array([u, v], dtype=np.float64))


def encode_plane_backward(grid: PlanarHashGrid, u: float, v: float, upstream: np.ndarray) -> Dict[str, np.ndarray]:
    return grid.backward(np.array([u, v], dtype=np.float64), upstream)


def triplane_encode(enc: TriplaneEncoder, x: Sequence[float]) -> np.ndarray:
    return enc.encode(np.asarray(x, dtype=np.float64))
