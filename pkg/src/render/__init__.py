# -*- coding: utf-8 -*-
"""
体渲染模块包
"""

from .camera import Camera, Ray, RayBatch, generate_ray, generate_rays, intersect_unit_cube, orthonormal_error
from .sampling import stratified_sample, stratified_samples, segment_lengths
from .compositing import RaySamples, CompositeResult, composite, composite_backward
from .renderer import RenderedRays, render_rays, render_image

__all__ = [
    "Camera",
    "Ray",
    "RayBatch",
    "generate_ray",
    "generate_rays",
    "intersect_unit_cube",
    "orthonormal_error",
    "stratified_sample",
    "stratified_samples",
    "segment_lengths",
    "RaySamples",
    "CompositeResult",
    "composite",
    "composite_backward",
    "RenderedRays",
    "render_rays",
    "render_image",
]
