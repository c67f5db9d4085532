# -*- coding: utf-8 -*-
"""
参数仓库与 Adam 优化器
所有可学习权重（哈希表、MLP、DLT、VAE、眨眼网络）都登记在 ParamStore 中
"""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from src.exceptions import ConfigError, DomainError, NumericError, ShapeError

logger = logging.getLogger(__name__)

LearningRate = Union[float, Mapping[str, float]]


class ParamStore:
    """
    命名参数数组 + 梯度槽 + Adam 一/二阶矩

    每个参数恰好有一个同形状的梯度槽；矩累加器初始化为0；
    adam_step 每调用一次 step 加1。前向计算只读参数，
    梯度累加和 adam_step 需要独占访问（单写者）。
    """

    def __init__(self, seed: int = 0, dtype=np.float32):
        """
        Args:
            seed: 权重初始化随机种子
            dtype: 参数 dtype，生产用 float32，梯度校验可用 float64
        """
        self.dtype = np.dtype(dtype)
        self.rng = np.random.default_rng(seed)
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        self.step = 0

    # ------------------------------------------------------------------
    # 注册与访问
    # ------------------------------------------------------------------

    def add(
        self,
        name: str,
        shape: Tuple[int, ...],
        init: str = "glorot",
        scale: Optional[float] = None,
        value: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """
        注册一个参数

        Args:
            name: 参数名（全局唯一）
            shape: 形状
            init: glorot | zeros | uniform（±scale）
            scale: uniform 初始化的幅度
            value: 直接给定初始值（优先于 init）

        Returns:
            参数数组（原地更新，调用方可以持有引用）
        """
        if name in self.params:
            raise ConfigError("参数重复注册", name)
        shape = tuple(int(s) for s in shape)
        if value is not None:
            arr = np.array(value, dtype=self.dtype).reshape(shape)
        elif init == "zeros":
            arr = np.zeros(shape, dtype=self.dtype)
        elif init == "uniform":
            limit = 1e-4 if scale is None else scale
            arr = self.rng.uniform(-limit, limit, size=shape).astype(self.dtype)
        elif init == "glorot":
            fan_in = shape[0]
            fan_out = shape[1] if len(shape) > 1 else shape[0]
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            arr = self.rng.uniform(-limit, limit, size=shape).astype(self.dtype)
        else:
            raise ConfigError("未知初始化方式", init)

        self.params[name] = arr
        self.grads[name] = np.zeros(shape, dtype=self.dtype)
        self.m[name] = np.zeros(shape, dtype=self.dtype)
        self.v[name] = np.zeros(shape, dtype=self.dtype)
        return arr

    def __contains__(self, name: str) -> bool:
        return name in self.params

    def __getitem__(self, name: str) -> np.ndarray:
        return self.params[name]

    def names(self, prefix: Optional[str] = None) -> List[str]:
        """按注册顺序返回参数名"""
        if prefix is None:
            return list(self.params)
        return [n for n in self.params if n.startswith(prefix)]

    def grad(self, name: str) -> np.ndarray:
        return self.grads[name]

    def accumulate(self, name: str, g: np.ndarray) -> None:
        """把梯度累加到梯度槽（不清零）"""
        slot = self.grads[name]
        if g.shape != slot.shape:
            raise ShapeError(f"梯度形状不匹配 {name}", f"期望 {slot.shape}，得到 {g.shape}")
        slot += g.astype(self.dtype, copy=False)

    def assign(self, name: str, value: np.ndarray) -> None:
        """原地写入参数值（保持引用不变）"""
        target = self.params[name]
        value = np.asarray(value, dtype=self.dtype)
        if value.shape != target.shape:
            raise ShapeError(f"参数形状不匹配 {name}", f"期望 {target.shape}，得到 {value.shape}")
        target[...] = value

    def zero_grad(self, prefix: Optional[str] = None) -> None:
        for name in self.names(prefix):
            self.grads[name].fill(0)

    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def snapshot(self) -> Dict[str, np.ndarray]:
        """参数的深拷贝"""
        return {k: v.copy() for k, v in self.params.items()}


def resolve_lr(name: str, lr: LearningRate) -> float:
    """按最长前缀匹配解析参数组学习率"""
    if not isinstance(lr, Mapping):
        return float(lr)
    best = None
    for prefix in lr:
        if name.startswith(prefix) and (best is None or len(prefix) > len(best)):
            best = prefix
    if best is None:
        raise ConfigError("参数没有匹配的学习率分组", name)
    return float(lr[best])


def warmup_scale(iteration: int, warmup_iters: int) -> float:
    """常数学习率 + 线性预热"""
    if warmup_iters <= 0:
        return 1.0
    return min(1.0, (iteration + 1) / warmup_iters)


def adam_step(
    store: ParamStore,
    lr: LearningRate,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    names: Optional[Iterable[str]] = None,
    lr_scale: float = 1.0,
) -> ParamStore:
    """
    带偏差校正的 Adam 更新，更新后梯度清零

    Args:
        store: 参数仓库
        lr: 学习率，或 {参数名前缀: 学习率}
        beta1, beta2, eps: Adam 超参数
        names: 只更新这些参数（默认全部）
        lr_scale: 预热等调度的倍率

    Returns:
        同一个 store（原地更新）
    """
    if not (0.0 < beta1 < 1.0 and 0.0 < beta2 < 1.0):
        raise DomainError("beta 必须在 (0,1) 内", f"beta1={beta1}, beta2={beta2}")
    if eps <= 0:
        raise DomainError("eps 必须为正", str(eps))
    selected = list(store.params) if names is None else list(names)

    # 先整体检查，避免部分更新
    for name in selected:
        if not np.all(np.isfinite(store.grads[name])):
            raise NumericError("梯度非有限", name)
    for name in selected:
        if resolve_lr(name, lr) <= 0:
            raise DomainError("学习率必须为正", name)

    store.step += 1
    t = store.step
    bias1 = 1.0 - beta1 ** t
    bias2 = 1.0 - beta2 ** t
    for name in selected:
        g = store.grads[name]
        m = store.m[name]
        v = store.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        step_size = resolve_lr(name, lr) * lr_scale
        update = step_size * (m / bias1) / (np.sqrt(v / bias2) + eps)
        store.params[name] -= update.astype(store.dtype, copy=False)
        g.fill(0)
    return store
