# -*- coding: utf-8 -*-
"""
工具模块包
辅助函数、JSON/CSV 持久化、PNG 与原始 float32 图像读写
"""

from .helpers import format_number, ensure_dir, bytes_to_human
from .persistence import save_json, load_json, save_csv
from .image_io import to_uint8, save_png, load_png, save_raw_float32, load_raw_float32

__all__ = [
    "format_number",
    "ensure_dir",
    "bytes_to_human",
    "save_json",
    "load_json",
    "save_csv",
    "to_uint8",
    "save_png",
    "load_png",
    "save_raw_float32",
    "load_raw_float32",
]
