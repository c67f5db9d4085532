# -*- coding: utf-8 -*-
"""
渲染器
光线 -> 分层采样 -> 场评估 -> 体渲染求积；整幅图像按块渲染，可用线程池并行
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.exceptions import NumericError, RenderError
from src.render.camera import Camera, RayBatch, generate_rays
from src.render.compositing import CompositeResult, RaySamples, composite
from src.render.sampling import segment_lengths, stratified_samples

logger = logging.getLogger(__name__)

# field_fn(x (M,3), d (M,3)) -> FieldOutput，须可并发只读调用
FieldFn = Callable[[np.ndarray, np.ndarray], object]


@dataclass
class RenderedRays:
    """一批光线的渲染结果；hit_index 为命中立方体的光线下标"""

    rgb: np.ndarray
    opacity: np.ndarray
    hit_index: np.ndarray
    samples: Optional[RaySamples] = None
    composite: Optional[CompositeResult] = None


def render_rays(
    field_fn: FieldFn,
    rays: RayBatch,
    n_samples: int,
    rng: Optional[np.random.Generator] = None,
    jitter: bool = True,
    background=(1.0, 1.0, 1.0),
) -> RenderedRays:
    """
    渲染一批光线，未命中的光线直接取背景色

    Args:
        field_fn: 辐射场闭包
        rays: 光线
        n_samples: 每条光线采样数
        rng: 抖动随机数
        jitter: 是否抖动采样
        background: 背景色

    Returns:
        RenderedRays
    """
    bg = np.asarray(background, dtype=np.float64)
    n_rays = len(rays)
    rgb = np.broadcast_to(bg, (n_rays, 3)).copy()
    opacity = np.zeros(n_rays)
    hit_index = np.flatnonzero(rays.hit)
    if hit_index.size == 0:
        return RenderedRays(rgb, opacity, hit_index)

    near = rays.t_near[hit_index]
    far = rays.t_far[hit_index]
    t = stratified_samples(near, far, n_samples, jitter=jitter, seed=rng)
    deltas = segment_lengths(t, far)
    o = rays.origins[hit_index]
    d = rays.directions[hit_index]
    points = o[:, None, :] + t[..., None] * d[:, None, :]
    # 交点计算的舍入可能让点略微越出立方体
    points = np.clip(points, 0.0, 1.0).reshape(-1, 3)
    dirs = np.repeat(d, n_samples, axis=0)
    out = field_fn(points, dirs)
    samples = RaySamples(
        t=t,
        deltas=deltas,
        sigma=np.asarray(out.sigma, dtype=np.float64).reshape(hit_index.size, n_samples),
        color=np.asarray(out.color, dtype=np.float64).reshape(hit_index.size, n_samples, 3),
    )
    comp = composite(samples, bg)
    rgb[hit_index] = comp.rgb
    opacity[hit_index] = comp.opacity
    return RenderedRays(rgb, opacity, hit_index, samples, comp)


def render_image(
    cam: Camera,
    field_fn: FieldFn,
    n_samples: int = 128,
    background=(1.0, 1.0, 1.0),
    seed: int = 0,
    chunk_rays: int = 4096,
    workers: int = 1,
    jitter: bool = False,
) -> np.ndarray:
    """
    渲染整幅图像

    每个块使用由 (seed, 块序号) 派生的随机数，结果与线程数无关。

    Args:
        cam: 相机
        field_fn: 只读辐射场闭包（条件已绑定）
        n_samples: 每条光线采样数
        background: 背景色
        seed: 随机种子
        chunk_rays: 每块光线数
        workers: 线程数
        jitter: 推理时默认取区间中点

    Returns:
        (H, W, 3) float 图像，行优先
    """
    rays = generate_rays(cam)
    total = len(rays)
    starts = list(range(0, total, max(1, chunk_rays)))
    image = np.empty((total, 3))

    def run_chunk(chunk_id: int) -> None:
        start = starts[chunk_id]
        stop = min(total, start + chunk_rays)
        rng = np.random.default_rng([seed, chunk_id])
        try:
            result = render_rays(field_fn, rays.subset(slice(start, stop)), n_samples, rng, jitter, background)
        except NumericError as e:
            ray_local = e.location[0] if e.location else 0
            hit_index = np.flatnonzero(rays.hit[start:stop])
            flat = start + int(hit_index[ray_local] if ray_local < hit_index.size else ray_local)
            pixel = (flat % cam.width, flat // cam.width)
            raise RenderError("像素渲染失败", pixel=pixel, details=f"pixel={pixel}: {e}") from e
        image[start:stop] = result.rgb

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, range(len(starts))))
    else:
        for chunk_id in range(len(starts)):
            run_chunk(chunk_id)
    logger.debug(f"渲染完成 {cam.width}x{cam.height}，{len(starts)} 块，{workers} 线程")
    return image.reshape(cam.height, cam.width, 3)
