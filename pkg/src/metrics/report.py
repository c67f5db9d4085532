# -*- coding: utf-8 -*-
"""
评估报告
eval.json（汇总 + 逐帧）与 eval.csv（逐帧表）
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

import pandas as pd

from src.constants import PSNR_INF_SENTINEL, RESERVED_NULL_METRICS
from src.exceptions import DomainError
from src.metrics.image_metrics import format_psnr
from src.utils.persistence import save_csv, save_json

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FRAME_COLUMNS = ("frame", "psnr", "lmd", "mouth_psnr", "perceptual_proxy")


def _json_value(value: Any) -> Any:
    """nan -> null，+inf -> 哨兵字符串"""
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return PSNR_INF_SENTINEL if value > 0 else "-inf"
    return value


@dataclass
class EvalReport:
    frames: List[int]
    psnr: List[float]
    lmd: List[float]
    mean_psnr: float
    mean_lmd: float
    lmd_units: str
    checkpoint: str
    mouth_psnr: List[float] = field(default_factory=list)
    perceptual_proxy: List[float] = field(default_factory=list)
    mean_mouth_psnr: float = float("nan")
    mean_perceptual_proxy: float = float("nan")
    blink_band_correlation: float = float("nan")
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if any(v < 0 for v in self.lmd) or (not math.isnan(self.mean_lmd) and self.mean_lmd < 0):
            raise DomainError("LMD 不能为负")
        if not len(self.frames) == len(self.psnr) == len(self.lmd):
            raise DomainError("逐帧指标长度不一致", f"{len(self.frames)}, {len(self.psnr)}, {len(self.lmd)}")

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def per_frame(self) -> pd.DataFrame:
        n = self.frame_count
        return pd.DataFrame({
            "frame": self.frames,
            "psnr": self.psnr,
            "lmd": self.lmd,
            "mouth_psnr": self.mouth_psnr or [float("nan")] * n,
            "perceptual_proxy": self.perceptual_proxy or [float("nan")] * n,
        }, columns=list(FRAME_COLUMNS))

    def to_dict(self) -> Dict[str, Any]:
        rows = [
            {k: _json_value(format_psnr(v) if k in ("psnr", "mouth_psnr") else v) for k, v in row.items()}
            for row in self.per_frame().to_dict(orient="records")
        ]
        for row in rows:
            row["frame"] = int(row["frame"])
        summary = {
            "frame_count": self.frame_count,
            "checkpoint": self.checkpoint,
            "mean_psnr": _json_value(format_psnr(self.mean_psnr)),
            "mean_lmd": _json_value(self.mean_lmd),
            "lmd_units": self.lmd_units,
            "mean_mouth_psnr": _json_value(format_psnr(self.mean_mouth_psnr)),
            "perceptual_proxy": _json_value(self.mean_perceptual_proxy),
            "blink_band_correlation": _json_value(self.blink_band_correlation),
            "metadata": self.metadata,
            "per_frame": rows,
        }
        # 需要预训练网络的指标保留字段
        for name in RESERVED_NULL_METRICS:
            summary[name] = None
        return summary


def write_report(report: EvalReport, out_dir: PathLike) -> Tuple[Path, Path]:
    """
    Returns:
        (eval.json 路径, eval.csv 路径)
    """
    out_dir = Path(out_dir)
    json_path = save_json(report.to_dict(), out_dir / "eval.json")
    table = report.per_frame()
    for col in ("psnr", "mouth_psnr"):
        table[col] = [format_psnr(v) for v in table[col]]
    csv_path = save_csv(table, out_dir / "eval.csv")
    logger.info(
        f"评估报告已写出: {json_path}，平均 PSNR {format_psnr(report.mean_psnr)}，"
        f"平均 LMD {report.mean_lmd:.6g} ({report.lmd_units})"
    )
    return json_path, csv_path

