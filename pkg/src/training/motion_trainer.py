# -*- coding: utf-8 -*-
"""
运动模型联合训练
目标 = L_p（DLT 关键点） + VAE 目标 + blink_weight ·（睁眼读出 MSE + 眼动预测 MSE）
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.blink.eye import ear_open_reference, eye_openness, mean_eye_aspect_ratio
from src.blink.networks import au_windows, history_indices, state_history
from src.config import Config
from src.constants import LANDMARK_COUNT
from src.data.loader import check_alignment
from src.data.manifest import DatasetManifest
from src.motion.audio import smooth_features, window_indices
from src.motion.landmarks import positional_loss, positional_loss_grad
from src.nn.checkpoint import save_checkpoint
from src.nn.params import adam_step, warmup_scale
from src.training.curve import LossCurve
from src.training.models import MotionModels, build_motion_models
from src.training.train_config import TrainConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MOTION_CURVE_COLUMNS = ("loss", "positional", "vae", "blink")


@dataclass
class TrainResult:
    """一次训练的产物"""

    checkpoint: Path
    curve_path: Path
    curve: LossCurve
    metadata: Dict[str, Any]

    @property
    def final_loss(self) -> float:
        return self.curve.rows[-1][self.curve.columns[0]] if self.curve.rows else float("nan")


@dataclass
class MotionTargets:
    """训练目标与固定输入，整段序列预处理一次"""

    audio: np.ndarray
    smoothed: np.ndarray
    au_rows: np.ndarray
    landmarks: np.ndarray
    openness: np.ndarray


def motion_targets(dataset: DatasetManifest, models: MotionModels) -> MotionTargets:
    audio = dataset.audio
    landmarks = dataset.landmarks
    au = dataset.au
    check_alignment({
        dataset.files.get("audio", "audio"): audio,
        dataset.files.get("landmarks", "landmarks"): landmarks,
        dataset.files.get("au", "au"): au,
    })
    openness = eye_openness(mean_eye_aspect_ratio(landmarks), models.ear_open)
    return MotionTargets(
        audio=audio,
        smoothed=smooth_features(audio, models.half_width),
        au_rows=au_windows(au, models.mapper.au_window),
        landmarks=landmarks,
        openness=openness,
    )


def motion_step(
    models: MotionModels,
    targets: MotionTargets,
    centers: np.ndarray,
    blink_weight: float,
    rng: np.random.Generator,
) -> Dict[str, float]:
    """
    一次前向 + 反向，梯度累加到 models.store（不做优化器更新）

    VAE 与眨眼网络在整段序列上前向；DLT 只在 centers 对应的帧上计算。

    Returns:
        {"loss", "positional", "vae", "blink"}
    """
    frame_count = targets.audio.shape[0]
    vae_total, _, _, latent = models.vae.objective(targets.smoothed, rng=rng)

    emb = models.mapper.forward(targets.au_rows, targets.audio, retain=True)
    readout = models.mapper.predict_openness(emb, retain=True)
    k = models.predictor.history
    hist = history_indices(frame_count, k)
    predicted = models.predictor.forward(emb[hist], state_history(targets.openness, k), retain=True)
    readout_mse = float(np.mean((readout - targets.openness) ** 2))
    predictor_mse = float(np.mean((predicted - targets.openness) ** 2))

    inputs = models.dlt_inputs(targets.smoothed, latent.mean)
    win = window_indices(centers, models.window, frame_count)
    pred = models.dlt.forward(inputs[win], emb[centers], retain=True)
    target = targets.landmarks[centers]
    l_p = positional_loss(pred.reshape(-1, LANDMARK_COUNT, 3), target)

    g_x, g_b = models.dlt.backward(positional_loss_grad(pred, target.reshape(pred.shape)))
    g_inputs = np.zeros_like(inputs)
    np.add.at(g_inputs, win, g_x)
    g_emb = np.zeros_like(emb)
    np.add.at(g_emb, centers, g_b)

    g_emb += models.mapper.backward_openness(blink_weight * 2.0 * (readout - targets.openness) / frame_count)
    g_hist = models.predictor.backward(blink_weight * 2.0 * (predicted - targets.openness) / frame_count)
    np.add.at(g_emb, hist, g_hist)
    models.mapper.backward(g_emb)

    models.vae.backward(scale=1.0, mean_grad=g_inputs if models.use_vae_latent else None)

    blink = readout_mse + predictor_mse
    return {
        "loss": l_p + vae_total + blink_weight * blink,
        "positional": l_p,
        "vae": vae_total,
        "blink": blink,
    }


def prepare_motion_models(cfg: Config, dataset: DatasetManifest, seed: int) -> MotionModels:
    """按数据集统计量（平均关键点、EAR_open）构建运动模型"""
    landmarks = dataset.landmarks
    ear_open = ear_open_reference(mean_eye_aspect_ratio(landmarks), cfg["blink.ear_open_percentile"])
    return build_motion_models(cfg, dataset.audio_width, landmarks.mean(axis=0), ear_open, seed=seed)


def train_motion(
    train_cfg: TrainConfig,
    cfg: Config,
    dataset: DatasetManifest,
    out_dir: PathLike,
    models: Optional[MotionModels] = None,
) -> TrainResult:
    """
    联合训练 DLT、音频 VAE 和眨眼网络

    Args:
        train_cfg: 训练超参数
        cfg: 完整配置（模型宽度等）
        dataset: 已校验、已归一化的数据集
        out_dir: 检查点与损失曲线输出目录
        models: 预先构建的模型（默认按 cfg 构建）

    Returns:
        TrainResult，检查点名为 motion_{iter:06d}.ckpt

    Raises:
        DatasetError: 音频、关键点、AU 帧数不一致
        TrainingError: 损失非有限
    """
    out_dir = Path(out_dir)
    if models is None:
        models = prepare_motion_models(cfg, dataset, train_cfg.seed)
    targets = motion_targets(dataset, models)
    frame_count = targets.audio.shape[0]
    batch = min(train_cfg.motion_batch_frames, frame_count)
    rng = np.random.default_rng(train_cfg.seed)
    curve = LossCurve("motion", MOTION_CURVE_COLUMNS, train_cfg.log_interval, per_item=1)
    logger.info(
        f"开始运动训练: {frame_count} 帧，{train_cfg.motion_iters} 次迭代，"
        f"每批 {batch} 帧，参数量 {models.store.num_parameters()}"
    )

    def metadata(iteration: int) -> Dict[str, Any]:
        return {"stage": "motion", "iteration": iteration, "seed": train_cfg.seed, **models.metadata()}

    checkpoint = out_dir / "motion_000000.ckpt"
    if train_cfg.motion_iters == 0:
        checkpoint = save_checkpoint(checkpoint, models.store, metadata(0))

    for it in range(train_cfg.motion_iters):
        centers = np.sort(rng.choice(frame_count, size=batch, replace=False))
        models.store.zero_grad()
        losses = motion_step(models, targets, centers, train_cfg.blink_weight, rng)
        curve.record(it, **losses)
        adam_step(
            models.store,
            train_cfg.lr_motion,
            train_cfg.beta1,
            train_cfg.beta2,
            train_cfg.adam_eps,
            lr_scale=warmup_scale(it, train_cfg.warmup_iters),
        )
        done = it + 1
        if done % train_cfg.checkpoint_interval == 0 or done == train_cfg.motion_iters:
            checkpoint = save_checkpoint(out_dir / f"motion_{done:06d}.ckpt", models.store, metadata(done))

    chart = out_dir / "loss_motion.png" if cfg["viz.enabled"] and curve.rows else None
    curve_path = curve.save(out_dir / "loss_motion.csv", chart)
    logger.info(f"运动训练完成，最终损失 {curve.rows[-1]['loss'] if curve.rows else float('nan'):.6g}")
    return TrainResult(checkpoint, curve_path, curve, metadata(train_cfg.motion_iters))
