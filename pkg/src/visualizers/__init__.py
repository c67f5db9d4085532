# -*- coding: utf-8 -*-
"""
Visualizers package
可视化模块包
"""

from .style import apply_style, save_plot, get_color, get_palette
from .training_charts import plot_loss_curve, plot_blink_track, plot_frame_psnr

__all__ = [
    "apply_style",
    "save_plot",
    "get_color",
    "get_palette",
    "plot_loss_curve",
    "plot_blink_track",
    "plot_frame_psnr",
]
