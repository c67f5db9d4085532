# -*- coding: utf-8 -*-
"""
数据集加载与校验
所有规则都检查完后一次性报告；任何违规都不会返回部分清单
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from src.constants import (
    AU_COLUMN,
    AU_FILE,
    AU_MAX,
    AU_MIN,
    AUDIO_FILE,
    CAMERAS_FILE,
    FRAME_NAME_PATTERN,
    FRAMES_DIR,
    LANDMARK_COUNT,
    LANDMARKS_FILE,
    MANIFEST_FILE,
    landmark_columns,
)
from src.data.manifest import DatasetManifest, FrameRecord
from src.exceptions import DatasetError, DatasetValidationError, DomainError, Violation
from src.render.camera import Camera, orthonormal_error
from src.utils.persistence import load_json

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# 关键点越出场景边界的容差（世界单位）
BOUNDS_TOL = 1e-6

CAMERA_FIELDS = ("fx", "fy", "cx", "cy", "rotation", "translation")

# JSON 文件存在但无法解析
_UNREADABLE = object()


class _Collector:
    """收集违规项"""

    def __init__(self):
        self.violations: List[Violation] = []

    def add(self, file: str, location: str, rule: str, message: str) -> None:
        v = Violation(file, location, rule, message)
        logger.error(f"数据校验失败: {v}")
        self.violations.append(v)


def _read_csv(path: Path, name: str, issues: _Collector) -> Optional[pd.DataFrame]:
    if not path.exists():
        issues.add(name, "-", "exists", "文件不存在")
        return None
    try:
        return pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        issues.add(name, "-", "format", f"无法解析: {e}")
        return None


def _numeric_block(df: pd.DataFrame, columns: List[str], name: str, issues: _Collector) -> Optional[np.ndarray]:
    missing = [c for c in columns if c not in df.columns]
    if missing:
        issues.add(name, "header", "columns", f"缺少列 {missing[:5]}")
        return None
    block = df[columns].apply(pd.to_numeric, errors="coerce").to_numpy(dtype=np.float64)
    bad_rows = np.flatnonzero(~np.all(np.isfinite(block), axis=1))
    for row in bad_rows[:10]:
        issues.add(name, f"frame {int(row)}", "finite", "存在非数值或非有限值")
    return block if bad_rows.size == 0 else None


def _read_json(path: Path, name: str, issues: _Collector) -> Any:
    """读取 JSON；文件不存在返回 None，无法解析时记一条 format 违规"""
    try:
        return load_json(path)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        issues.add(name, "-", "format", f"无法解析: {e}")
        return _UNREADABLE


def _vector(value: Any, width: int) -> Optional[np.ndarray]:
    """长度为 width 的有限数值序列，否则返回 None"""
    if not isinstance(value, (list, tuple)) or len(value) != width:
        return None
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
        return None
    arr = np.asarray(value, dtype=np.float64)
    return arr if np.all(np.isfinite(arr)) else None


def _integer(value: Any) -> Optional[int]:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return None


def _check_manifest(data: Any, issues: _Collector) -> Optional[Dict[str, Any]]:
    """
    校验 manifest.json 的字段类型和取值

    Returns:
        类型化后的字段；帧数、图像尺寸或场景边界不可用时返回 None
    """
    if data is _UNREADABLE:
        return None
    if data is None:
        issues.add(MANIFEST_FILE, "-", "exists", "文件不存在")
        return None
    if not isinstance(data, dict):
        issues.add(MANIFEST_FILE, "-", "format", "顶层必须是 JSON 对象")
        return None
    required = ("frame_count", "fps", "background", "scene_bounds", "image_size")
    missing = [k for k in required if k not in data]
    if missing:
        issues.add(MANIFEST_FILE, "-", "fields", f"缺少字段 {missing}")
        return None

    bounds = data["scene_bounds"]
    lo = hi = None
    if isinstance(bounds, dict):
        lo, hi = _vector(bounds.get("min"), 3), _vector(bounds.get("max"), 3)
    if lo is None or hi is None:
        issues.add(MANIFEST_FILE, "scene_bounds", "shape", "必须是含 min/max 两个三维数值向量的对象")
    elif np.any(hi <= lo):
        issues.add(MANIFEST_FILE, "scene_bounds", "extent", f"边界退化: min={lo.tolist()}, max={hi.tolist()}")

    bg = _vector(data["background"], 3)
    if bg is None or np.any((bg < 0.0) | (bg > 1.0)):
        issues.add(MANIFEST_FILE, "background", "range", "背景色必须是 [0,1] 内的 RGB")
        bg = None

    frame_count = _integer(data["frame_count"])
    if frame_count is None:
        issues.add(MANIFEST_FILE, "frame_count", "type", f"帧数必须是整数，得到 {data['frame_count']!r}")
    elif frame_count <= 0:
        issues.add(MANIFEST_FILE, "frame_count", "positive", "帧数必须为正")
        frame_count = None

    size = data["image_size"]
    dims = [_integer(v) for v in size] if isinstance(size, (list, tuple)) and len(size) == 2 else [None]
    if any(d is None or d <= 0 for d in dims):
        issues.add(MANIFEST_FILE, "image_size", "shape", "必须是两个正整数 [宽, 高]")
        dims = None

    fps = data["fps"]
    if isinstance(fps, bool) or not isinstance(fps, (int, float)) or not np.isfinite(fps) or fps <= 0:
        issues.add(MANIFEST_FILE, "fps", "positive", "fps 必须是正数")
        fps = None

    files = data.get("files", {})
    if not isinstance(files, dict) or not all(isinstance(v, str) for v in files.values()):
        issues.add(MANIFEST_FILE, "files", "type", "files 必须是 名称 → 相对路径 的对象")
        files = {}

    if lo is None or hi is None or frame_count is None or dims is None:
        return None
    return {
        "frame_count": frame_count,
        "fps": fps,
        "background": None if bg is None else tuple(float(c) for c in bg),
        "bounds": (lo, hi),
        "image_size": (dims[0], dims[1]),
        "files": files,
    }


def _check_cameras(raw: Any, width: int, height: int, issues: _Collector) -> List[Optional[Camera]]:
    if raw is _UNREADABLE:
        return []
    if raw is None:
        issues.add(CAMERAS_FILE, "-", "exists", "文件不存在")
        return []
    entries = raw.get("frames", raw) if isinstance(raw, dict) else raw
    if not isinstance(entries, list):
        issues.add(CAMERAS_FILE, "-", "format", "相机必须是逐帧对象的列表")
        return []
    cameras: List[Optional[Camera]] = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            issues.add(CAMERAS_FILE, f"frame {i}", "format", "每帧相机必须是 JSON 对象")
            cameras.append(None)
            continue
        missing = [k for k in CAMERA_FIELDS if k not in entry]
        if missing:
            issues.add(CAMERAS_FILE, f"frame {i}", "fields", f"缺少字段 {missing}")
            cameras.append(None)
            continue
        rotation = _vector(entry["rotation"], 9)
        translation = _vector(entry["translation"], 3)
        intrinsics = _vector([entry[k] for k in ("fx", "fy", "cx", "cy")], 4)
        if rotation is None or translation is None or intrinsics is None:
            issues.add(CAMERAS_FILE, f"frame {i}", "shape", "rotation 需9个数，translation 需3个数，内参须为数值")
            cameras.append(None)
            continue
        err = orthonormal_error(rotation.reshape(3, 3))
        if err > 1e-5:
            issues.add(CAMERAS_FILE, f"frame {i}", "orthonormal", f"旋转矩阵不正交 (误差 {err:.2e})")
            cameras.append(None)
            continue
        try:
            cameras.append(Camera.from_dict(entry, width, height))
        except DomainError as e:
            issues.add(CAMERAS_FILE, f"frame {i}", "intrinsics", str(e))
            cameras.append(None)
    return cameras


def load_dataset(root: PathLike) -> DatasetManifest:
    """
    读取并校验数据集目录

    Args:
        root: 含 manifest.json、frames/、cameras.json、landmarks.csv、
              audio_features.csv、au.csv 的目录

    Returns:
        校验通过的清单（世界坐标，未归一化）

    Raises:
        DatasetValidationError: 汇总全部违规项
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError("数据集目录不存在", str(root))
    issues = _Collector()

    manifest = _check_manifest(_read_json(root / MANIFEST_FILE, MANIFEST_FILE, issues), issues)
    if manifest is None:
        raise DatasetValidationError(issues.violations)
    files = manifest["files"]
    names = {
        "cameras": files.get("cameras", CAMERAS_FILE),
        "landmarks": files.get("landmarks", LANDMARKS_FILE),
        "audio": files.get("audio", AUDIO_FILE),
        "au": files.get("au", AU_FILE),
        "frames": files.get("frames", FRAMES_DIR),
    }
    frame_count = manifest["frame_count"]
    width, height = manifest["image_size"]
    lo, hi = manifest["bounds"]

    cameras = _check_cameras(_read_json(root / names["cameras"], names["cameras"], issues), width, height, issues)

    lm_df = _read_csv(root / names["landmarks"], names["landmarks"], issues)
    landmarks = None if lm_df is None else _numeric_block(lm_df, landmark_columns(), names["landmarks"], issues)
    if landmarks is not None:
        pts = landmarks.reshape(-1, LANDMARK_COUNT, 3)
        outside = np.any((pts < lo - BOUNDS_TOL) | (pts > hi + BOUNDS_TOL), axis=2)
        for frame, index in np.argwhere(outside)[:20]:
            issues.add(
                names["landmarks"],
                f"frame {int(frame)}",
                "bounds",
                f"关键点 {int(index)} 超出场景边界（归一化后不在单位立方体内）",
            )

    audio_df = _read_csv(root / names["audio"], names["audio"], issues)
    audio = None
    if audio_df is not None:
        feature_cols = [c for c in audio_df.columns if c.startswith("f") and c[1:].isdigit()]
        feature_cols.sort(key=lambda c: int(c[1:]))
        if not feature_cols or feature_cols != [f"f{i}" for i in range(len(feature_cols))]:
            issues.add(names["audio"], "header", "columns", "表头必须为 f0..f{D-1}")
        else:
            audio = _numeric_block(audio_df, feature_cols, names["audio"], issues)

    au_df = _read_csv(root / names["au"], names["au"], issues)
    au = None
    if au_df is not None:
        block = _numeric_block(au_df, ["frame", AU_COLUMN], names["au"], issues)
        if block is not None:
            au = block[:, 1]
            for row in np.flatnonzero((au < AU_MIN) | (au > AU_MAX))[:20]:
                issues.add(names["au"], f"frame {int(block[row, 0])}", "range", f"AU 强度 {au[row]} 不在 [0,5] 内")

    counts = {
        names["cameras"]: len(cameras),
        names["landmarks"]: None if lm_df is None else len(lm_df),
        names["audio"]: None if audio_df is None else len(audio_df),
        names["au"]: None if au_df is None else len(au_df),
    }
    for name, count in counts.items():
        if count is not None and count != frame_count:
            issues.add(name, "-", "frame_count", f"{count} 行，manifest 为 {frame_count} 帧")

    frames_dir = root / names["frames"]
    image_paths = [frames_dir / FRAME_NAME_PATTERN.format(i) for i in range(frame_count)]
    for i, path in enumerate(image_paths):
        if not path.exists():
            issues.add(f"{names['frames']}/{path.name}", f"frame {i}", "exists", "图像文件不存在")

    if issues.violations:
        raise DatasetValidationError(issues.violations)

    records = [
        FrameRecord(
            index=i,
            image_path=image_paths[i],
            camera=cameras[i],
            landmarks=landmarks[i].reshape(LANDMARK_COUNT, 3),
            audio=audio[i],
            au=float(au[i]),
        )
        for i in range(frame_count)
    ]
    logger.info(f"数据集已加载: {root}，{frame_count} 帧，音频宽度 {audio.shape[1]}")
    return DatasetManifest(
        root=root,
        frame_count=frame_count,
        fps=float(manifest["fps"]),
        background=manifest["background"],
        bounds_min=lo,
        bounds_max=hi,
        image_size=(width, height),
        frames=records,
        files=names,
    )


def check_alignment(arrays: Dict[str, np.ndarray]) -> Tuple[int, Dict[str, int]]:
    """
    检查若干逐帧数组的帧数一致

    Raises:
        DatasetError: 帧数不一致时列出各文件的行数
    """
    counts = {name: int(np.shape(arr)[0]) for name, arr in arrays.items()}
    if len(set(counts.values())) > 1:
        detail = ", ".join(f"{name}={count}" for name, count in counts.items())
        raise DatasetError("逐帧文件的帧数不一致", detail)
    return next(iter(counts.values()), 0), counts
