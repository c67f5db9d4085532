# -*- coding: utf-8 -*-
"""
样式模块
暖色系配色和图表样式
"""

import warnings
from pathlib import Path
from typing import List, Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import seaborn as sns

from src.config import (
    WARM_COLORS,
    WARM_PALETTE,
    CHART_STYLE,
    FIGURE_SIZE,
    FIGURE_DPI,
)


def apply_style() -> None:
    """应用暖色主题"""
    warnings.filterwarnings("ignore", category=UserWarning)

    sns.set_theme(style="whitegrid", palette=WARM_PALETTE)
    for key, value in CHART_STYLE.items():
        plt.rcParams[key] = value
    plt.rcParams["figure.figsize"] = FIGURE_SIZE
    plt.rcParams["figure.dpi"] = FIGURE_DPI
    plt.rcParams["font.sans-serif"] = ["Noto Sans CJK SC", "SimHei", "DejaVu Sans"]
    plt.rcParams["axes.unicode_minus"] = False


def get_color(name: str) -> str:
    """获取颜色"""
    return WARM_COLORS.get(name, WARM_COLORS["primary"])


def get_palette() -> List[str]:
    """获取调色板"""
    return WARM_PALETTE


def save_plot(filename: Union[str, Path], title: Optional[str] = None) -> Path:
    """保存图表并关闭当前 figure"""
    if title:
        plt.title(title, pad=20, fontsize=14, fontweight="bold", color=WARM_COLORS["dark"])
    plt.tight_layout()

    path = Path(filename)
    path.parent.mkdir(parents=True, exist_ok=True)
    plt.savefig(
        path,
        dpi=FIGURE_DPI,
        bbox_inches="tight",
        facecolor=WARM_COLORS["background"],
    )
    plt.close()
    return path
