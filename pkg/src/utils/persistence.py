# -*- coding: utf-8 -*-
"""
数据持久化模块
提供JSON和CSV的保存和加载功能（CSV 通过 pandas）
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"无法序列化 {type(obj)}")


def save_json(data: Any, filepath: PathLike, indent: int = 2) -> Path:
    """保存数据到JSON文件（键排序，保证输出可复现）"""
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=False, indent=indent, sort_keys=True, default=_json_default)
        f.write("\n")
    logger.debug(f"已保存JSON: {filepath}")
    return path


def load_json(filepath: PathLike) -> Optional[Any]:
    """从JSON文件加载数据，文件不存在时返回 None"""
    path = Path(filepath)
    if not path.exists():
        return None
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def save_csv(
    rows: Union[pd.DataFrame, List[Dict[str, Any]]],
    filepath: PathLike,
    columns: Optional[Sequence[str]] = None,
    float_format: str = "%.9g",
) -> Path:
    """保存表格到CSV文件"""
    df = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows, columns=columns)
    if columns is not None:
        df = df[list(columns)]
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=float_format)
    logger.debug(f"已保存CSV: {filepath} ({len(df)} 行)")
    return path

