# -*- coding: utf-8 -*-
"""
损失曲线记录
逐迭代收集损失、按间隔写日志，结束时落盘为 CSV（可选同时出图）
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd

from src.exceptions import TrainingError
from src.utils.persistence import save_csv

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class LossCurve:
    """
    Args:
        stage: 阶段名（日志前缀、图表标题）
        columns: 除 iter 外的列名，第一列为总损失
        log_interval: 每隔多少次迭代写一条 INFO 日志
        per_item: 日志中总损失除以的批大小（报告逐光线平均）
    """

    stage: str
    columns: Sequence[str]
    log_interval: int = 100
    per_item: int = 1
    rows: List[Dict[str, float]] = field(default_factory=list)

    def record(self, iteration: int, **values: float) -> None:
        """记录一次迭代；任何非有限值都终止训练"""
        for name, value in values.items():
            if not math.isfinite(value):
                raise TrainingError(f"{self.stage} 阶段损失非有限", iteration, f"{name}={value}")
        self.rows.append({"iter": iteration, **{c: float(values[c]) for c in self.columns}})
        if iteration % self.log_interval == 0:
            head = self.columns[0]
            parts = [f"{head}/item={values[head] / self.per_item:.6g}"]
            parts += [f"{c}={values[c]:.6g}" for c in self.columns[1:]]
            logger.info(f"[{self.stage}] iter {iteration}: " + ", ".join(parts))

    def value_at(self, iteration: int, column: Optional[str] = None) -> float:
        column = column or self.columns[0]
        for row in self.rows:
            if row["iter"] == iteration:
                return row[column]
        raise KeyError(iteration)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=["iter", *self.columns])

    def save(self, path: PathLike, chart: Optional[PathLike] = None) -> Path:
        """写 CSV；chart 非空时同时画损失曲线"""
        frame = self.to_frame()
        out = save_csv(frame, path)
        if chart is not None:
            from src.visualizers.training_charts import plot_loss_curve

            plot_loss_curve(frame, chart, title=f"{self.stage} 损失")
        return out
