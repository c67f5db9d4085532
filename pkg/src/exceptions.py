# -*- coding: utf-8 -*-
"""
自定义异常模块
定义项目中使用的各类异常
"""

from dataclasses import dataclass
from typing import List, Optional


class PortraitError(Exception):
    """说话人像辐射场项目的基础异常类"""

    def __init__(self, message: str, details: Optional[str] = None):
        self.message = message
        self.details = details
        super().__init__(self.message)

    def __str__(self):
        if self.details:
            return f"{self.message}: {self.details}"
        return self.message


# =============================================================================
# 数值核心相关异常
# =============================================================================


class ShapeError(PortraitError):
    """宽度/长度/形状不匹配"""

    pass


class DomainError(PortraitError):
    """输入超出定义域（立方体外的点、非单位方向、图像外的像素等）"""

    pass


class StateError(PortraitError):
    """调用顺序错误（未前向就反向、缺少粗阶段检查点等）"""

    pass


class NumericError(PortraitError):
    """出现非有限数值（NaN / Inf），location 为出问题的位置（如 (光线, 采样)）"""

    def __init__(self, message: str, details: Optional[str] = None, location: Optional[tuple] = None):
        self.location = location
        super().__init__(message, details)


class DegenerateEyeError(DomainError):
    """眼角两点重合，EAR 无定义"""

    pass


# =============================================================================
# 渲染与训练相关异常
# =============================================================================


class RenderError(PortraitError):
    """逐像素渲染失败，details 中带像素坐标"""

    def __init__(self, message: str, pixel: Optional[tuple] = None, details: Optional[str] = None):
        self.pixel = pixel
        super().__init__(message, details)


class TrainingError(NumericError):
    """训练损失非有限，带迭代序号"""

    def __init__(self, message: str, iteration: int, details: Optional[str] = None):
        self.iteration = iteration
        super().__init__(message, details, location=(iteration,))


# =============================================================================
# 配置和IO相关异常
# =============================================================================


class ConfigError(PortraitError):
    """配置错误异常"""

    pass


class CheckpointError(PortraitError):
    """检查点文件损坏或版本不支持"""

    pass


class DatasetError(PortraitError):
    """数据集异常"""

    pass


@dataclass(frozen=True)
class Violation:
    """一条数据校验失败记录"""

    file: str
    location: str
    rule: str
    message: str

    def __str__(self):
        return f"{self.file} [{self.location}] {self.rule}: {self.message}"


class DatasetValidationError(DatasetError):
    """数据集校验失败，汇总所有违规项（加载是全有或全无的）"""

    def __init__(self, violations: List[Violation]):
        self.violations = list(violations)
        details = "; ".join(str(v) for v in self.violations[:20])
        if len(self.violations) > 20:
            details += f"; ...(共 {len(self.violations)} 项)"
        super().__init__("数据集校验失败", details)


# 映射到 CLI 退出码 1 的异常类型
VALIDATION_ERRORS = (ConfigError, DatasetError, ShapeError, DomainError)
