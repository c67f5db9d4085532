# -*- coding: utf-8 -*-
"""
推理与评估流程
音频特征 -> DLT 关键点 -> 眨眼轨迹 -> 辐射场 -> 体渲染，逐帧写出 PNG
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.config import Config
from src.constants import (
    AU_COLUMN,
    FRAME_NAME_PATTERN,
    LANDMARK_COUNT,
    landmark_columns,
)
from src.data.manifest import DatasetManifest
from src.exceptions import DatasetError, ShapeError
from src.metrics.evaluation import evaluate_frames
from src.metrics.report import EvalReport, write_report
from src.nn.checkpoint import file_digest
from src.render.renderer import render_image
from src.training.conditioning import FrameConditions, predicted_conditions
from src.training.models import FieldModels, MotionModels
from src.utils.image_io import load_png, save_png, save_raw_float32
from src.utils.persistence import save_csv

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def read_audio_features(path: PathLike, width: Optional[int] = None) -> np.ndarray:
    """读取 f0..f{D-1} 表头的音频特征 CSV"""
    df = pd.read_csv(path)
    cols = [f"f{i}" for i in range(len(df.columns)) if f"f{i}" in df.columns]
    if not cols:
        raise DatasetError("音频特征文件缺少 f0..f{D-1} 列", str(path))
    audio = df[cols].to_numpy(dtype=np.float64)
    if width is not None and audio.shape[1] != width:
        raise ShapeError("音频特征宽度与运动模型不一致", f"{path}: 期望 {width}，得到 {audio.shape[1]}")
    if not np.all(np.isfinite(audio)):
        raise DatasetError("音频特征含非有限值", str(path))
    return audio


def read_au(path: PathLike) -> np.ndarray:
    df = pd.read_csv(path)
    if AU_COLUMN not in df.columns:
        raise DatasetError(f"AU 文件缺少 {AU_COLUMN} 列", str(path))
    return df[AU_COLUMN].to_numpy(dtype=np.float64)


def driving_au(frame_count: int, au_path: Optional[PathLike], dataset: Optional[DatasetManifest]) -> np.ndarray:
    """推理用 AU：显式文件 > 数据集 au.csv（行数够时）> 全零"""
    if au_path is not None:
        au = read_au(au_path)
        if au.shape[0] < frame_count:
            raise ShapeError("AU 行数少于音频帧数", f"{au.shape[0]} < {frame_count}")
        return au[:frame_count]
    if dataset is not None and dataset.frame_count >= frame_count:
        return dataset.au[:frame_count]
    logger.warning("没有可用的 AU 序列，按不眨眼（全零）处理")
    return np.zeros(frame_count)


def frame_cameras(dataset: DatasetManifest, frame_count: int) -> List:
    """第 i 帧用数据集第 i 个相机，超出时循环"""
    cams = dataset.cameras
    return [cams[i % len(cams)] for i in range(frame_count)]


def render_sequence(
    field: FieldModels,
    conditions: FrameConditions,
    cameras: Sequence,
    cfg: Config,
    seed: int,
    background,
    out_dir: Optional[PathLike] = None,
    frame_ids: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """
    逐帧渲染

    Args:
        field: 辐射场模型
        conditions: 每帧条件
        cameras: 每帧相机
        cfg: 配置（render.* 键）
        seed: 随机种子
        background: 背景色
        out_dir: 非空时写出 PNG（以及 render.raw_dump 时的 float32 原始数据）
        frame_ids: 输出文件名使用的帧序号

    Returns:
        (F, H, W, 3)
    """
    if len(cameras) != len(conditions):
        raise ShapeError("相机数与条件帧数不一致", f"{len(cameras)} vs {len(conditions)}")
    frame_ids = list(range(len(conditions))) if frame_ids is None else list(frame_ids)
    cond = field.condition.encode(conditions.landmarks, conditions.latents, conditions.embeddings, retain=False)
    fused = np.atleast_2d(cond.fused)
    images = []
    for i, cam in enumerate(cameras):
        image = render_image(
            cam,
            field.field.closure(fused[i]),
            n_samples=cfg["render.samples"],
            background=background,
            seed=seed + frame_ids[i],
            chunk_rays=cfg["render.chunk_rays"],
            workers=cfg["render.workers"],
        )
        images.append(image)
        if out_dir is not None:
            name = FRAME_NAME_PATTERN.format(frame_ids[i])
            save_png(Path(out_dir) / name, image)
            if cfg["render.raw_dump"]:
                save_raw_float32(Path(out_dir) / name.replace(".png", ".f32"), image)
        logger.debug(f"已渲染帧 {frame_ids[i]}")
    return np.stack(images)


def run_render(
    cfg: Config,
    seed: int,
    dataset: DatasetManifest,
    motion: MotionModels,
    field: FieldModels,
    audio_path: PathLike,
    out_dir: PathLike,
    au_path: Optional[PathLike] = None,
) -> Dict[str, Path]:
    """
    render 命令：写出 PNG 序列、landmarks_pred.csv、blink_track.csv

    Returns:
        各输出文件路径
    """
    out_dir = Path(out_dir)
    audio = read_audio_features(audio_path, motion.vae.input_width)
    count = audio.shape[0]
    au = driving_au(count, au_path, dataset)
    conditions = predicted_conditions(motion, audio, au, eye_control=cfg["render.eye_control"])
    logger.info(f"开始渲染 {count} 帧 -> {out_dir}")
    render_sequence(field, conditions, frame_cameras(dataset, count), cfg, seed, dataset.background, out_dir)

    world = conditions.landmarks
    if dataset.normalization is not None:
        world = dataset.normalization.invert(world.reshape(-1, 3)).reshape(-1, LANDMARK_COUNT, 3)
    lm_path = save_csv(pd.DataFrame(world.reshape(count, -1), columns=landmark_columns()), out_dir / "landmarks_pred.csv")
    blink_path = save_csv(
        pd.DataFrame({"frame": np.arange(count), "openness": conditions.openness}),
        out_dir / "blink_track.csv",
    )
    if cfg["viz.enabled"]:
        from src.visualizers.training_charts import plot_blink_track

        plot_blink_track(conditions.openness, out_dir / "blink_track.png")
    return {"frames": out_dir, "landmarks": lm_path, "blink_track": blink_path}


def load_frame_dir(directory: PathLike, frames: Sequence[int]) -> np.ndarray:
    directory = Path(directory)
    paths = [directory / FRAME_NAME_PATTERN.format(i) for i in frames]
    missing = [p.name for p in paths if not p.exists()]
    if missing:
        raise DatasetError("渲染目录缺少帧", f"{directory}: {missing[:5]}")
    return np.stack([load_png(p) for p in paths])


def run_eval(
    cfg: Config,
    seed: int,
    dataset: DatasetManifest,
    motion: MotionModels,
    field: FieldModels,
    field_checkpoint: PathLike,
    out_dir: PathLike,
    renders: Optional[PathLike] = None,
    reference: Optional[PathLike] = None,
    frames: Optional[Sequence[int]] = None,
) -> EvalReport:
    """
    eval 命令：默认在留出帧上用预测条件渲染并与数据集图像比较

    Args:
        renders: 已渲染帧目录（给出时不再渲染）
        reference: 参考帧目录（默认数据集 frames/）
        frames: 评估的帧（默认留出帧）
    """
    out_dir = Path(out_dir)
    if frames is None:
        _, frames = dataset.split(cfg["data.holdout_every"])
    frames = list(frames)
    predicted = predicted_conditions(motion, dataset.audio, dataset.au, eye_control=cfg["render.eye_control"])
    picked = predicted.take(frames)
    cameras = [dataset.frames[i].camera for i in frames]

    if renders is not None:
        pred_images = load_frame_dir(renders, frames)
    else:
        pred_images = render_sequence(field, picked, cameras, cfg, seed, dataset.background, frame_ids=frames)
    gt_images = load_frame_dir(reference, frames) if reference is not None else dataset.load_images(frames)

    report = evaluate_frames(
        frames,
        pred_images,
        gt_images,
        picked.landmarks,
        dataset.landmarks[frames],
        cameras,
        checkpoint=f"{Path(field_checkpoint).name}@{file_digest(field_checkpoint)[:16]}",
        openness=picked.openness,
        lmd_units=cfg["eval.lmd_units"],
        patch_size=cfg["train.fine.patch_size"],
        dilation=cfg["train.mouth.dilation"],
        workers=cfg["render.workers"],
        metadata={
            "settings": {k: v for k, v in field.settings.items() if k.startswith("field.use")},
            "motion.use_vae_latent": motion.use_vae_latent,
            "renders": None if renders is None else Path(renders).name,
            "seed": seed,
        },
    )
    write_report(report, out_dir)
    if cfg["viz.enabled"]:
        from src.visualizers.training_charts import plot_blink_track, plot_frame_psnr

        plot_frame_psnr(report.per_frame(), out_dir / "psnr_frames.png")
        plot_blink_track(picked.openness, out_dir / "blink_track.png")
    return report
