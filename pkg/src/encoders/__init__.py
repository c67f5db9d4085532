# -*- coding: utf-8 -*-
"""
编码器包
多分辨率二维哈希网格、三平面编码、球谐方向编码
"""

from .hash_grid import (
    HashGridConfig,
    PlanarHashGrid,
    TriplaneEncoder,
    spatial_hash,
    encode_plane,
    encode_plane_backward,
    triplane_encode,
)
from .spherical_harmonics import sh_encode

__all__ = [
    "HashGridConfig",
    "PlanarHashGrid",
    "TriplaneEncoder",
    "spatial_hash",
    "encode_plane",
    "encode_plane_backward",
    "triplane_encode",
    "sh_encode",
]
