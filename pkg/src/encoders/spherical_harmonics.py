# -*- coding: utf-8 -*-
"""
2阶实球谐方向编码（9个系数）
"""

import numpy as np

from src.constants import SH_C0, SH_C1, SH_C2, SH_WIDTH
from src.exceptions import DomainError, ShapeError


def sh_encode(d: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """
    Args:
        d: (3,) 或 (N,3) 单位方向
        tol: 单位长度容差

    Returns:
        (9,) 或 (N, 9)
    """
    d = np.asarray(d, dtype=np.float64)
    squeeze = d.ndim == 1
    d2 = d[None, :] if squeeze else d
    if d2.ndim != 2 or d2.shape[1] != 3:
        raise ShapeError("方向需要 (N,3)", str(d.shape))
    norms = np.linalg.norm(d2, axis=1)
    if not np.all(np.abs(norms - 1.0) <= tol):
        bad = int(np.argmax(np.abs(norms - 1.0)))
        raise DomainError("视线方向不是单位向量", f"第 {bad} 个, |d|={norms[bad]:.8f}")
    x, y, z = d2[:, 0], d2[:, 1], d2[:, 2]
    out = np.empty((d2.shape[0], SH_WIDTH), dtype=np.float64)
    out[:, 0] = SH_C0
    out[:, 1] = -SH_C1 * y
    out[:, 2] = SH_C1 * z
    out[:, 3] = -SH_C1 * x
    out[:, 4] = SH_C2[0] * x * y
    out[:, 5] = SH_C2[1] * y * z
    out[:, 6] = SH_C2[2] * (2.0 * z * z - x * x - y * y)
    out[:, 7] = SH_C2[3] * x * z
    out[:, 8] = SH_C2[4] * (x * x - y * y)
    return out[0] if squeeze else out
