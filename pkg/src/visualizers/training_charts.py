# -*- coding: utf-8 -*-
"""
训练与评估图表
损失曲线、眨眼轨迹、逐帧 PSNR
"""

import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from src.visualizers.style import apply_style, save_plot, get_color, get_palette

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def plot_loss_curve(
    curve: pd.DataFrame,
    output_path: PathLike,
    title: str = "训练损失",
    columns: Optional[Sequence[str]] = None,
) -> Optional[Path]:
    """
    绘制损失曲线（对数纵轴）

    Args:
        curve: 含 iter 列和若干损失列的表
        output_path: 保存路径
        title: 图表标题
        columns: 要画的列，默认除 iter 外全部
    """
    if curve.empty:
        logger.warning("损失曲线为空，跳过绘图")
        return None
    apply_style()

    columns = list(columns) if columns else [c for c in curve.columns if c != "iter"]
    palette = get_palette()
    plt.figure(figsize=(12, 6))
    for i, col in enumerate(columns):
        values = curve[col].to_numpy(dtype=np.float64)
        # 对数轴只画正值
        values = np.where(values > 0, values, np.nan)
        plt.plot(curve["iter"], values, label=col, color=palette[i % len(palette)], linewidth=1.5)
    plt.yscale("log")
    plt.xlabel("迭代")
    plt.ylabel("损失")
    plt.legend()
    plt.grid(True, alpha=0.3)

    return save_plot(output_path, title)


def plot_blink_track(
    openness: np.ndarray,
    output_path: PathLike,
    reference: Optional[np.ndarray] = None,
    band: Optional[np.ndarray] = None,
    title: str = "眨眼轨迹",
) -> Path:
    """
    预测睁眼程度，可叠加参考轨迹和渲染图中眼部亮度

    Args:
        openness: (F,) 预测睁眼程度
        output_path: 保存路径
        reference: (F,) 参考睁眼程度
        band: (F,) 眼部区域平均亮度（按 [0,1] 归一化后绘制）
    """
    apply_style()
    frames = np.arange(len(openness))
    plt.figure(figsize=(12, 5))
    plt.plot(frames, openness, color=get_color("primary"), linewidth=2, label="预测")
    if reference is not None:
        plt.plot(frames, reference, color=get_color("dark"), linestyle="--", linewidth=1.5, label="参考")
    if band is not None:
        band = np.asarray(band, dtype=np.float64)
        span = band.max() - band.min()
        scaled = (band - band.min()) / span if span > 0 else np.zeros_like(band)
        plt.plot(frames, scaled, color=get_color("accent"), linewidth=1.2, label="眼部亮度")
    plt.ylim(-0.05, 1.05)
    plt.xlabel("帧")
    plt.ylabel("睁眼程度")
    plt.legend()
    plt.grid(True, alpha=0.3)

    return save_plot(output_path, title)


def plot_frame_psnr(per_frame: pd.DataFrame, output_path: PathLike, title: str = "逐帧 PSNR") -> Optional[Path]:
    """逐帧 PSNR 柱状图，+inf 帧不画"""
    finite = per_frame[np.isfinite(per_frame["psnr"].to_numpy(dtype=np.float64))]
    if finite.empty:
        logger.warning("没有有限的 PSNR 值，跳过绘图")
        return None
    apply_style()
    plt.figure(figsize=(12, 5))
    plt.bar(finite["frame"].astype(str), finite["psnr"], color=get_color("secondary"))
    plt.xlabel("帧")
    plt.ylabel("PSNR (dB)")
    plt.xticks(rotation=45, ha="right")

    return save_plot(output_path, title)
