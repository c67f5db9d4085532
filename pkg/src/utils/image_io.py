# -*- coding: utf-8 -*-
"""
图像读写
PNG 通过 matplotlib.image 编解码（8位/通道）；原始 float32 转储带宽高头
"""

import logging
import struct
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.image as mpimg
import numpy as np

from src.exceptions import DatasetError, ShapeError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_RAW_HEADER = struct.Struct("<II")


def to_uint8(image: np.ndarray) -> np.ndarray:
    """[0,1] 浮点 -> uint8，四舍五入"""
    return np.round(np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0) * 255.0).astype(np.uint8)


def save_png(path: PathLike, image: np.ndarray) -> Path:
    """
    保存 (H, W, 3) 图像为 PNG

    Args:
        path: 输出路径
        image: float [0,1] 或 uint8
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ShapeError("PNG 需要 (H, W, 3) 图像", str(image.shape))
    data = image if image.dtype == np.uint8 else to_uint8(image)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mpimg.imsave(path, data, format="png")
    return path


def load_png(path: PathLike) -> np.ndarray:
    """读取 PNG，返回 (H, W, 3) float64 [0,1]"""
    path = Path(path)
    if not path.exists():
        raise DatasetError("图像文件不存在", str(path))
    data = mpimg.imread(path, format="png")
    if data.ndim == 2:
        data = np.repeat(data[..., None], 3, axis=2)
    if data.dtype == np.uint8:
        data = data / 255.0
    return np.asarray(data[..., :3], dtype=np.float64)


def save_raw_float32(path: PathLike, image: np.ndarray) -> Path:
    """小端 float32 行优先转储，头部为 uint32 宽、高"""
    image = np.asarray(image, dtype="<f4")
    if image.ndim != 3:
        raise ShapeError("原始转储需要 (H, W, C) 图像", str(image.shape))
    height, width = image.shape[:2]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_RAW_HEADER.pack(width, height) + np.ascontiguousarray(image).tobytes())
    return path


def load_raw_float32(path: PathLike, channels: int = 3) -> np.ndarray:
    blob = Path(path).read_bytes()
    width, height = _RAW_HEADER.unpack_from(blob, 0)
    data = np.frombuffer(blob, dtype="<f4", offset=_RAW_HEADER.size)
    if data.size != width * height * channels:
        raise ShapeError("原始转储大小与头部不符", f"{path}: {width}x{height}x{channels} vs {data.size}")
    return data.reshape(height, width, channels).astype(np.float64)
