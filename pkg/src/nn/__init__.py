# -*- coding: utf-8 -*-
"""
数值核心包
参数仓库、Adam、固定拓扑 MLP、检查点与梯度校验
"""

from .params import ParamStore, adam_step, resolve_lr, warmup_scale
from .mlp import Mlp
from .checkpoint import save_checkpoint, load_checkpoint, restore_into, file_digest
from .gradcheck import central_difference, max_gradient_error, relative_error

__all__ = [
    "ParamStore",
    "adam_step",
    "resolve_lr",
    "warmup_scale",
    "Mlp",
    "save_checkpoint",
    "load_checkpoint",
    "restore_into",
    "file_digest",
    "central_difference",
    "max_gradient_error",
    "relative_error",
]
