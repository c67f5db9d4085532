# -*- coding: utf-8 -*-
"""
逐帧评估并汇总为 EvalReport
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Optional, Sequence

import numpy as np

from src.exceptions import ConfigError, ShapeError
from src.metrics.blink_metrics import blink_band_correlation
from src.metrics.image_metrics import mean_psnr, psnr
from src.metrics.landmark_metrics import lmd_per_frame, project_sequence
from src.metrics.report import EvalReport
from src.training.patches import center_patch, crop, mouth_region
from src.training.perceptual import PerceptualMetric

logger = logging.getLogger(__name__)

LMD_UNITS = ("scene", "pixel")


def _mouth_scores(pred, gt, cam, landmarks, metric: PerceptualMetric, patch_size: int, dilation: int):
    width, height = cam.width, cam.height
    size = min(patch_size, width, height)
    region = mouth_region(landmarks, cam, dilation, min_size=size)
    mouth = psnr(crop(pred, region), crop(gt, region))
    patch = center_patch(region, size, (width, height))
    proxy = metric.distance(crop(pred, patch), crop(gt, patch)) if size >= metric.min_size else float("nan")
    return mouth, proxy


def evaluate_frames(
    frames: Sequence[int],
    pred_images: np.ndarray,
    gt_images: np.ndarray,
    pred_landmarks: np.ndarray,
    gt_landmarks: np.ndarray,
    cameras: Sequence,
    checkpoint: str,
    openness: Optional[np.ndarray] = None,
    lmd_units: str = "scene",
    patch_size: int = 32,
    dilation: int = 8,
    metric: Optional[PerceptualMetric] = None,
    workers: int = 1,
    metadata: Optional[Dict[str, Any]] = None,
) -> EvalReport:
    """
    Args:
        frames: 帧序号
        pred_images / gt_images: (F, H, W, 3)
        pred_landmarks / gt_landmarks: (F, 68, 3) 场景坐标
        cameras: 每帧相机
        checkpoint: 报告中的检查点标识
        openness: (F,) 睁眼轨迹，给出时计算眨眼带相关系数
        lmd_units: scene（场景归一化单位）| pixel（投影后的像素距离）
        patch_size: 嘴部感知距离的 patch 边长
        dilation: 嘴部包围盒外扩像素
        metric: 感知距离（默认种子0的冻结网络）
        workers: 逐帧评估的线程数
    """
    if lmd_units not in LMD_UNITS:
        raise ConfigError("eval.lmd_units 只能是 scene 或 pixel", lmd_units)
    count = len(frames)
    if not count == len(pred_images) == len(gt_images) == len(cameras):
        raise ShapeError(
            "评估输入帧数不一致",
            f"frames={count}, pred={len(pred_images)}, gt={len(gt_images)}, cameras={len(cameras)}",
        )
    metric = metric or PerceptualMetric(seed=0)

    def score(i: int):
        p = psnr(pred_images[i], gt_images[i])
        mouth, proxy = _mouth_scores(pred_images[i], gt_images[i], cameras[i], gt_landmarks[i], metric, patch_size, dilation)
        return p, mouth, proxy

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scores = list(pool.map(score, range(count)))
    else:
        scores = [score(i) for i in range(count)]
    psnrs = [s[0] for s in scores]
    mouths = [s[1] for s in scores]
    proxies = [s[2] for s in scores]

    if lmd_units == "pixel":
        per_lmd = lmd_per_frame(project_sequence(pred_landmarks, cameras), project_sequence(gt_landmarks, cameras))
    else:
        per_lmd = lmd_per_frame(pred_landmarks, gt_landmarks)

    corr = float("nan")
    if openness is not None:
        corr = blink_band_correlation(pred_images, cameras, pred_landmarks, openness)

    meta = dict(metadata or {})
    meta.setdefault(
        "lmd_note",
        "三维场景归一化单位" if lmd_units == "scene" else "投影到图像平面的像素距离",
    )
    proxy_arr = np.asarray(proxies, dtype=np.float64)
    report = EvalReport(
        frames=[int(f) for f in frames],
        psnr=[float(v) for v in psnrs],
        lmd=[float(v) for v in per_lmd],
        mean_psnr=mean_psnr(psnrs),
        mean_lmd=float(per_lmd.mean()),
        lmd_units=lmd_units,
        checkpoint=checkpoint,
        mouth_psnr=[float(v) for v in mouths],
        perceptual_proxy=[float(v) for v in proxies],
        mean_mouth_psnr=mean_psnr(mouths),
        mean_perceptual_proxy=float(np.nanmean(proxy_arr)) if np.any(np.isfinite(proxy_arr)) else float("nan"),
        blink_band_correlation=corr,
        metadata=meta,
    )
    logger.info(f"评估完成: {count} 帧")
    return report
