# -*- coding: utf-8 -*-
"""
辐射场两阶段训练
粗阶段：所有训练帧上随机采样光线，像素平方误差
细阶段：从粗阶段检查点继续，只在嘴部区域随机取 patch，平方误差 + λ·感知距离
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import Config
from src.data.manifest import DatasetManifest
from src.exceptions import ConfigError, StateError
from src.nn.checkpoint import file_digest, save_checkpoint
from src.nn.params import adam_step, warmup_scale
from src.render.camera import RayBatch, generate_rays
from src.render.compositing import composite_backward
from src.render.renderer import RenderedRays, render_rays
from src.training.conditioning import FrameConditions, teacher_forced_conditions
from src.training.curve import LossCurve
from src.training.losses import coarse_loss, coarse_loss_grad, fine_loss_and_grad
from src.training.models import (
    FieldModels,
    MotionModels,
    build_field_models,
    latest_checkpoint,
    load_field_models,
)
from src.training.motion_trainer import TrainResult
from src.training.patches import mouth_region, sample_patch
from src.training.perceptual import PerceptualMetric
from src.training.train_config import TrainConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

STAGES = ("coarse", "fine")
PERCEPTUAL_SEED = 0


def field_checkpoint_name(stage: str, iteration: int) -> str:
    return f"field_{stage}_{iteration:06d}.ckpt"


def concat_rays(batches: Sequence[RayBatch]) -> RayBatch:
    return RayBatch(
        np.concatenate([b.origins for b in batches]),
        np.concatenate([b.directions for b in batches]),
        np.concatenate([b.t_near for b in batches]),
        np.concatenate([b.t_far for b in batches]),
        np.concatenate([b.hit for b in batches]),
        np.concatenate([b.pixels for b in batches]),
    )


@dataclass
class RayStep:
    """一批（可能来自多帧的）光线的前向结果，backward 把像素梯度回传到全部参数"""

    models: FieldModels
    rendered: RenderedRays
    point_slots: np.ndarray
    slot_count: int
    background: Tuple[float, float, float]

    @property
    def rgb(self) -> np.ndarray:
        return self.rendered.rgb

    def backward(self, g_rgb: np.ndarray) -> None:
        r = self.rendered
        if r.hit_index.size == 0:
            return
        g_sigma, g_color = composite_backward(r.samples, r.composite, g_rgb[r.hit_index], self.background)
        g_cond = self.models.field.backward(g_color.reshape(-1, 3), g_sigma.reshape(-1))
        g_frames = np.zeros((self.slot_count, g_cond.shape[1]), dtype=g_cond.dtype)
        np.add.at(g_frames, self.point_slots, g_cond)
        self.models.condition.backward(g_frames)


def render_training_rays(
    models: FieldModels,
    conditions: FrameConditions,
    rays: RayBatch,
    ray_slots: np.ndarray,
    n_samples: int,
    rng: np.random.Generator,
    background,
) -> RayStep:
    """
    Args:
        conditions: 本批涉及帧的条件（第 i 个槽对应第 i 帧）
        rays: 光线
        ray_slots: 每条光线所属的条件槽
    """
    cond = models.condition.encode(conditions.landmarks, conditions.latents, conditions.embeddings, retain=True)
    fused = cond.fused
    hit_index = np.flatnonzero(rays.hit)
    point_slots = np.repeat(ray_slots[hit_index], n_samples)

    def field_fn(x: np.ndarray, d: np.ndarray):
        return models.field.forward(x, d, fused[point_slots], retain=True)

    rendered = render_rays(field_fn, rays, n_samples, rng, jitter=True, background=background)
    return RayStep(models, rendered, point_slots, fused.shape[0], tuple(background))


class FieldTrainer:
    """单个阶段的训练循环"""

    def __init__(
        self,
        stage: str,
        train_cfg: TrainConfig,
        cfg: Config,
        dataset: DatasetManifest,
        models: FieldModels,
        conditions: FrameConditions,
        out_dir: PathLike,
        base_metadata: Dict[str, Any],
    ):
        if stage not in STAGES:
            raise ConfigError("未知训练阶段", stage)
        self.stage = stage
        self.train_cfg = train_cfg
        self.cfg = cfg
        self.dataset = dataset
        self.models = models
        self.conditions = conditions
        self.out_dir = Path(out_dir)
        self.base_metadata = base_metadata
        self.train_frames, _ = dataset.split(train_cfg.holdout_every)
        self.rng = np.random.default_rng([train_cfg.seed, STAGES.index(stage)])
        self.images = dataset.load_images(self.train_frames)
        self.metric = PerceptualMetric(seed=PERCEPTUAL_SEED)
        self.lr = train_cfg.field_lr()

    @property
    def iterations(self) -> int:
        return self.train_cfg.coarse_iters if self.stage == "coarse" else self.train_cfg.fine_iters

    def metadata(self, iteration: int) -> Dict[str, Any]:
        return {
            **self.base_metadata,
            **self.models.metadata(),
            "stage": self.stage,
            "iteration": iteration,
            "seed": self.train_cfg.seed,
            "train_frames": list(self.train_frames),
            "perceptual_fingerprint": self.metric.fingerprint(),
        }

    # ------------------------------------------------------------------

    def coarse_step(self) -> Dict[str, float]:
        """随机帧上的随机像素"""
        width, height = self.dataset.image_size
        count = self.train_cfg.rays_per_batch
        picks = self.rng.integers(0, len(self.train_frames), size=count)
        px = self.rng.integers(0, width, size=count)
        py = self.rng.integers(0, height, size=count)
        slots = np.unique(picks)
        batches, ray_slots, gt = [], [], []
        for slot, pick in enumerate(slots):
            mask = picks == pick
            frame = self.train_frames[pick]
            pixels = np.stack([px[mask], py[mask]], axis=1)
            batches.append(generate_rays(self.dataset.frames[frame].camera, pixels))
            ray_slots.append(np.full(pixels.shape[0], slot))
            gt.append(self.images[pick][pixels[:, 1], pixels[:, 0]])
        frames = [self.train_frames[p] for p in slots]
        step = render_training_rays(
            self.models,
            self.conditions.take(frames),
            concat_rays(batches),
            np.concatenate(ray_slots),
            self.train_cfg.train_samples,
            self.rng,
            self.dataset.background,
        )
        target = np.concatenate(gt)
        loss = coarse_loss(step.rgb, target)
        step.backward(coarse_loss_grad(step.rgb, target))
        return {"loss": loss}

    def fine_step(self) -> Dict[str, float]:
        """一帧嘴部区域内的一个 patch"""
        p = self.train_cfg.patch_size
        pick = int(self.rng.integers(0, len(self.train_frames)))
        frame = self.train_frames[pick]
        cam = self.dataset.frames[frame].camera
        region = mouth_region(self.conditions.landmarks[frame], cam, self.train_cfg.mouth_dilation, min_size=p)
        pixels = sample_patch(self.dataset.image_size, region, p, self.rng)
        step = render_training_rays(
            self.models,
            self.conditions.take([frame]),
            generate_rays(cam, pixels),
            np.zeros(pixels.shape[0], dtype=np.int64),
            self.train_cfg.train_samples,
            self.rng,
            self.dataset.background,
        )
        pred = step.rgb.reshape(p, p, 3)
        gt = self.images[pick][pixels[:, 1], pixels[:, 0]].reshape(p, p, 3)
        total, mse, perceptual, grad = fine_loss_and_grad(pred, gt, self.metric, self.train_cfg.fine_lambda)
        step.backward(grad.reshape(-1, 3))
        return {"loss": total, "mse": mse, "perceptual": perceptual}

    # ------------------------------------------------------------------

    def run(self) -> TrainResult:
        tc = self.train_cfg
        if self.stage == "fine":
            width, height = self.dataset.image_size
            tc.check_patch(width, height)
            columns = ("loss", "mse", "perceptual")
            per_item = tc.patch_size * tc.patch_size
            step_fn = self.fine_step
        else:
            columns = ("loss",)
            per_item = tc.rays_per_batch
            step_fn = self.coarse_step
        curve = LossCurve(self.stage, columns, tc.log_interval, per_item=per_item)
        store = self.models.store
        fingerprint = self.metric.fingerprint()
        logger.info(
            f"开始 {self.stage} 阶段: {self.iterations} 次迭代，训练帧 {len(self.train_frames)}，"
            f"参数量 {store.num_parameters()}"
        )

        checkpoint = self.out_dir / field_checkpoint_name(self.stage, 0)
        if self.iterations == 0:
            checkpoint = save_checkpoint(checkpoint, store, self.metadata(0))

        for it in range(self.iterations):
            store.zero_grad()
            losses = step_fn()
            curve.record(it, **losses)
            adam_step(store, self.lr, tc.beta1, tc.beta2, tc.adam_eps, lr_scale=warmup_scale(it, tc.warmup_iters))
            done = it + 1
            if done % tc.checkpoint_interval == 0 or done == self.iterations:
                checkpoint = save_checkpoint(
                    self.out_dir / field_checkpoint_name(self.stage, done), store, self.metadata(done)
                )

        if self.metric.fingerprint() != fingerprint:
            raise StateError("感知网络权重在训练中被修改", self.stage)
        chart = self.out_dir / f"loss_{self.stage}.png" if self.cfg["viz.enabled"] and curve.rows else None
        curve_path = curve.save(self.out_dir / f"loss_{self.stage}.csv", chart)
        return TrainResult(checkpoint, curve_path, curve, self.metadata(self.iterations))


def train_stage(
    stage: str,
    train_cfg: TrainConfig,
    cfg: Config,
    dataset: DatasetManifest,
    motion: MotionModels,
    out_dir: PathLike,
    motion_checkpoint: Optional[PathLike] = None,
    coarse_checkpoint: Optional[PathLike] = None,
) -> TrainResult:
    """
    训练辐射场的一个阶段

    Args:
        stage: coarse | fine
        train_cfg: 训练超参数
        cfg: 完整配置
        dataset: 已归一化的数据集
        motion: 训练好的运动模型（冻结）
        out_dir: 输出目录
        motion_checkpoint: 运动检查点路径（写入元数据）
        coarse_checkpoint: 细阶段的起点；缺省时取 out_dir 中最新的粗阶段检查点

    Raises:
        StateError: 细阶段找不到粗阶段检查点
        TrainingError: 损失非有限
    """
    if stage not in STAGES:
        raise ConfigError("未知训练阶段", stage)
    out_dir = Path(out_dir)
    base: Dict[str, Any] = {}
    if motion_checkpoint is not None:
        base["motion_checkpoint"] = Path(motion_checkpoint).name
        base["motion_sha256"] = file_digest(motion_checkpoint)

    if stage == "coarse":
        models = build_field_models(
            cfg,
            motion.vae.latent_width,
            motion.mapper.embedding_width,
            seed=train_cfg.seed,
        )
    else:
        parent = Path(coarse_checkpoint) if coarse_checkpoint else latest_checkpoint(out_dir, "field_coarse")
        if parent is None or not parent.exists():
            raise StateError("细阶段需要粗阶段检查点", str(parent or out_dir))
        models, parent_meta = load_field_models(parent)
        if parent_meta.get("stage") != "coarse":
            raise StateError("细阶段的起点必须是粗阶段检查点", f"{parent}: stage={parent_meta.get('stage')}")
        base["parent"] = parent.name
        base["parent_sha256"] = file_digest(parent)
        logger.info(f"细阶段从 {parent} 继续")

    conditions = teacher_forced_conditions(motion, dataset)
    trainer = FieldTrainer(stage, train_cfg, cfg, dataset, models, conditions, out_dir, base)
    return trainer.run()
