# -*- coding: utf-8 -*-
"""
针孔相机与光线生成

相机约定：右手系，相机看向 -z，y 向上；位姿为相机到世界（R, t）。
像素 (px, py) 的光线穿过像素中心 (px+0.5, py+0.5)，py 向下增长。
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from src.exceptions import DomainError, ShapeError

logger = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-5


@dataclass
class Camera:
    """内参 (fx, fy, cx, cy)、位姿 (R, t) 与图像尺寸"""

    fx: float
    fy: float
    cx: float
    cy: float
    rotation: np.ndarray
    translation: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not (self.fx > 0 and self.fy > 0):
            raise DomainError("焦距必须为正", f"fx={self.fx}, fy={self.fy}")
        if self.width <= 0 or self.height <= 0:
            raise DomainError("图像尺寸必须为正", f"{self.width}x{self.height}")
        err = orthonormal_error(self.rotation)
        if err > ORTHONORMAL_TOL:
            raise DomainError("旋转矩阵不是正交的", f"max|RᵀR - I| = {err:.2e}")

    @property
    def center(self) -> np.ndarray:
        return self.translation

    def to_dict(self) -> Dict[str, Any]:
        """cameras.json 中的一项"""
        return {
            "fx": float(self.fx),
            "fy": float(self.fy),
            "cx": float(self.cx),
            "cy": float(self.cy),
            "rotation": [float(v) for v in self.rotation.reshape(-1)],
            "translation": [float(v) for v in self.translation],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], width: int, height: int) -> "Camera":
        return cls(
            fx=float(data["fx"]),
            fy=float(data["fy"]),
            cx=float(data["cx"]),
            cy=float(data["cy"]),
            rotation=np.asarray(data["rotation"], dtype=np.float64),
            translation=np.asarray(data["translation"], dtype=np.float64),
            width=int(width),
            height=int(height),
        )

    def with_translation(self, translation: np.ndarray) -> "Camera":
        return Camera(self.fx, self.fy, self.cx, self.cy, self.rotation, translation, self.width, self.height)

    def camera_directions(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        """相机坐标系下（未归一化）的像素中心方向 (N, 3)"""
        px = np.asarray(px, dtype=np.float64)
        py = np.asarray(py, dtype=np.float64)
        return np.stack(
            [(px + 0.5 - self.cx) / self.fx, -(py + 0.5 - self.cy) / self.fy, -np.ones_like(px)],
            axis=-1,
        )

    def project(self, points: np.ndarray) -> np.ndarray:
        """
        世界坐标点投影到连续像素坐标

        Args:
            points: (N, 3)

        Returns:
            (N, 2)，像素 (px, py) 的中心对应 (px+0.5, py+0.5)
        """
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        local = (pts - self.translation) @ self.rotation
        depth = -local[:, 2]
        if np.any(depth <= 0):
            raise DomainError("点位于相机后方，无法投影")
        u = self.cx + self.fx * local[:, 0] / depth
        v = self.cy - self.fy * local[:, 1] / depth
        return np.stack([u, v], axis=1)


def orthonormal_error(rotation: np.ndarray) -> float:
    r = np.asarray(rotation, dtype=np.float64).reshape(3, 3)
    return float(np.max(np.abs(r.T @ r - np.eye(3))))


@dataclass
class Ray:
    """r(t) = o + t·d，t ∈ [t_near, t_far]；未命中场景立方体时 hit=False 且 t 范围为空"""

    origin: np.ndarray
    direction: np.ndarray
    t_near: float
    t_far: float
    hit: bool = True
    pixel: Optional[tuple] = None


@dataclass
class RayBatch:
    """N 条光线的结构化数组"""

    origins: np.ndarray
    directions: np.ndarray
    t_near: np.ndarray
    t_far: np.ndarray
    hit: np.ndarray
    pixels: np.ndarray = field(default=None)

    def __len__(self) -> int:
        return int(self.origins.shape[0])

    def subset(self, index) -> "RayBatch":
        return RayBatch(
            self.origins[index],
            self.directions[index],
            self.t_near[index],
            self.t_far[index],
            self.hit[index],
            None if self.pixels is None else self.pixels[index],
        )


def intersect_unit_cube(origins: np.ndarray, directions: np.ndarray):
    """
    slab 法求光线与 [0,1]^3 的交

    Returns:
        (t_near, t_far, hit)；t_near 不小于0，未命中时 t_near = t_far = 0
    """
    o = np.atleast_2d(origins)
    d = np.atleast_2d(directions)
    t_lo = np.full(o.shape, -np.inf)
    t_hi = np.full(o.shape, np.inf)
    moving = np.abs(d) > 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = np.where(moving, (0.0 - o) / d, 0.0)
        t1 = np.where(moving, (1.0 - o) / d, 0.0)
    t_lo = np.where(moving, np.minimum(t0, t1), t_lo)
    t_hi = np.where(moving, np.maximum(t0, t1), t_hi)
    # 平行于某个 slab 的光线：起点必须在 slab 内
    outside = ~moving & ((o < 0.0) | (o > 1.0))
    t_hi = np.where(outside, -np.inf, t_hi)
    near = np.maximum(t_lo.max(axis=1), 0.0)
    far = t_hi.min(axis=1)
    hit = far > near
    near = np.where(hit, near, 0.0)
    far = np.where(hit, far, 0.0)
    return near, far, hit


def generate_rays(cam: Camera, pixels: Optional[np.ndarray] = None) -> RayBatch:
    """
    批量生成针孔光线

    Args:
        cam: 相机
        pixels: (N, 2) 整数像素 (px, py)；为 None 时按行优先生成整幅图像

    Returns:
        RayBatch
    """
    if pixels is None:
        py, px = np.mgrid[0:cam.height, 0:cam.width]
        pixels = np.stack([px.ravel(), py.ravel()], axis=1)
    pixels = np.asarray(pixels, dtype=np.int64)
    if pixels.ndim != 2 or pixels.shape[1] != 2:
        raise ShapeError("像素坐标必须是 (N, 2)", str(pixels.shape))
    px, py = pixels[:, 0], pixels[:, 1]
    bad = (px < 0) | (px >= cam.width) | (py < 0) | (py >= cam.height)
    if np.any(bad):
        first = int(np.argmax(bad))
        raise DomainError("像素超出图像范围", f"({int(px[first])}, {int(py[first])}) 不在 {cam.width}x{cam.height} 内")
    local = cam.camera_directions(px, py)
    dirs = local @ cam.rotation.T
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    origins = np.broadcast_to(cam.translation, dirs.shape).copy()
    near, far, hit = intersect_unit_cube(origins, dirs)
    return RayBatch(origins, dirs, near, far, hit, pixels)


def generate_ray(cam: Camera, px: int, py: int) -> Ray:
    """穿过像素 (px, py) 中心的单条光线"""
    batch = generate_rays(cam, np.array([[px, py]]))
    return Ray(
        origin=batch.origins[0],
        direction=batch.directions[0],
        t_near=float(batch.t_near[0]),
        t_far=float(batch.t_far[0]),
        hit=bool(batch.hit[0]),
        pixel=(int(px), int(py)),
    )
