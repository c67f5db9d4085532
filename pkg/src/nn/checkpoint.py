# -*- coding: utf-8 -*-
"""
参数检查点读写

文件格式（小端）：
    magic(8 字节) | version:u32 | meta_len:u32 | meta(JSON, UTF-8)
    | count:u32 | count 条记录
记录：
    name_len:u32 | name(UTF-8) | ndim:u32 | dims:u32*ndim | float32 数据
"""

import hashlib
import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from src.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from src.exceptions import CheckpointError, ShapeError
from src.nn.params import ParamStore
from src.utils.helpers import bytes_to_human, format_number

logger = logging.getLogger(__name__)

_U32 = struct.Struct("<I")


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"无法序列化 {type(obj)}")


def encode_checkpoint(params: Dict[str, np.ndarray], metadata: Optional[Dict[str, Any]] = None) -> bytes:
    """把参数字典编码为字节串（按字典顺序写出，保证可复现）"""
    meta_bytes = json.dumps(
        metadata or {}, sort_keys=True, separators=(",", ":"), default=_json_default
    ).encode("utf-8")
    chunks = [CHECKPOINT_MAGIC, _U32.pack(CHECKPOINT_VERSION), _U32.pack(len(meta_bytes)), meta_bytes]
    chunks.append(_U32.pack(len(params)))
    for name, arr in params.items():
        name_bytes = name.encode("utf-8")
        data = np.ascontiguousarray(arr, dtype="<f4")
        chunks.append(_U32.pack(len(name_bytes)))
        chunks.append(name_bytes)
        chunks.append(_U32.pack(data.ndim))
        chunks.extend(_U32.pack(d) for d in data.shape)
        chunks.append(data.tobytes())
    return b"".join(chunks)


def decode_checkpoint(blob: bytes, origin: str = "<bytes>") -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    """解码字节串，返回 (参数字典, 元数据)"""
    pos = 0

    def take(n: int) -> bytes:
        nonlocal pos
        if pos + n > len(blob):
            raise CheckpointError("检查点被截断", f"{origin} @ {pos}")
        chunk = blob[pos:pos + n]
        pos += n
        return chunk

    def take_u32() -> int:
        return _U32.unpack(take(4))[0]

    if take(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
        raise CheckpointError("检查点魔数不匹配", origin)
    version = take_u32()
    if version != CHECKPOINT_VERSION:
        raise CheckpointError("不支持的检查点版本", f"{origin}: v{version}")
    metadata = json.loads(take(take_u32()).decode("utf-8"))
    params: Dict[str, np.ndarray] = {}
    for _ in range(take_u32()):
        name = take(take_u32()).decode("utf-8")
        ndim = take_u32()
        shape = tuple(take_u32() for _ in range(ndim))
        count = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(take(4 * count), dtype="<f4").reshape(shape)
        params[name] = data.astype(np.float32)
    if pos != len(blob):
        raise CheckpointError("检查点尾部有多余数据", origin)
    return params, metadata


def save_checkpoint(
    path: Union[str, Path], store: ParamStore, metadata: Optional[Dict[str, Any]] = None
) -> Path:
    """
    保存 ParamStore 到检查点文件

    Args:
        path: 输出路径
        store: 参数仓库
        metadata: 附带的 JSON 元数据（阶段、迭代、父检查点等）

    Returns:
        写入的路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = dict(metadata or {})
    meta.setdefault("adam_step", store.step)
    blob = encode_checkpoint(store.params, meta)
    path.write_bytes(blob)
    logger.info(f"检查点已保存: {path} ({format_number(store.num_parameters())} 个参数, {bytes_to_human(len(blob))})")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[Dict[str, np.ndarray], Dict[str, Any]]:
    """读取检查点文件"""
    path = Path(path)
    if not path.exists():
        raise CheckpointError("检查点不存在", str(path))
    return decode_checkpoint(path.read_bytes(), origin=str(path))


def restore_into(store: ParamStore, params: Dict[str, np.ndarray], strict: bool = True) -> None:
    """
    把检查点参数写回已构建好的 ParamStore

    Args:
        store: 目标仓库（网络结构需一致）
        params: load_checkpoint 返回的参数
        strict: 名称集合必须完全一致
    """
    if strict:
        missing = set(store.params) - set(params)
        extra = set(params) - set(store.params)
        if missing or extra:
            raise CheckpointError(
                "检查点参数名与模型不一致",
                f"缺少 {sorted(missing)[:5]}，多余 {sorted(extra)[:5]}",
            )
    for name, value in params.items():
        if name not in store:
            continue
        if store[name].shape != value.shape:
            raise ShapeError(f"检查点参数形状不匹配 {name}", f"{store[name].shape} vs {value.shape}")
        store.assign(name, value)


def file_digest(path: Union[str, Path]) -> str:
    """检查点文件的 SHA-256（用于记录父检查点）"""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
