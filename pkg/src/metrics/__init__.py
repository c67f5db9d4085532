# -*- coding: utf-8 -*-
"""
评估指标模块包
PSNR、LMD、眨眼带相关系数与评估报告
"""

from .image_metrics import psnr, mean_psnr, format_psnr
from .landmark_metrics import lmd, lmd_per_frame, project_sequence
from .blink_metrics import blink_band_correlation, blink_band_brightness, pearson
from .report import EvalReport, write_report
from .evaluation import evaluate_frames

__all__ = [
    "psnr",
    "mean_psnr",
    "format_psnr",
    "lmd",
    "lmd_per_frame",
    "project_sequence",
    "blink_band_correlation",
    "blink_band_brightness",
    "pearson",
    "EvalReport",
    "write_report",
    "evaluate_frames",
]
