# -*- coding: utf-8 -*-
"""
全局配置模块
包含路径配置、各模块默认超参数、图表样式，以及 `key = value` 配置文件解析
"""

import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Union

from src.exceptions import ConfigError

logger = logging.getLogger(__name__)

# =============================================================================
# 路径配置
# =============================================================================

# 项目根目录
PROJECT_ROOT = Path(__file__).parent.parent

# 输出目录（渲染结果、检查点、评估报告）
OUTPUT_DIR = PROJECT_ROOT / "output"

# 日志文件名
LOG_FILE_NAME = "portrait.log"

# =============================================================================
# 默认超参数（扁平的点号键 -> 默认值；默认值的类型决定解析类型）
# =============================================================================

DEFAULT_CONFIG: Dict[str, Any] = {
    # --- 三平面哈希网格 ---
    "hash.levels": 8,
    "hash.features": 2,
    "hash.table_size_log2": 14,
    "hash.base_resolution": 16,
    "hash.per_level_scale": 1.32,
    "hash.init_scale": 1e-4,
    # --- 音频 -> 关键点 ---
    "motion.audio_width": 29,
    "motion.filter_half_width": 2,
    "motion.window": 9,
    "motion.embed_width": 64,
    "motion.head_hidden": 64,
    "motion.latent_width": 16,
    "motion.vae_hidden": 32,
    "motion.kl_weight": 1e-4,
    "motion.use_vae_latent": True,
    # --- 眨眼模块 ---
    "blink.embedding_width": 4,
    "blink.history": 4,
    "blink.au_window": 5,
    "blink.hidden": 32,
    "blink.ear_open_percentile": 95.0,
    # --- 辐射场 ---
    "field.landmark_code_width": 32,
    "field.audio_code_width": 32,
    "field.hidden": 64,
    "field.geo_width": 15,
    "field.density_activation": "softplus",
    "field.use_audio_residual": True,
    "field.use_blink": True,
    # --- 体渲染 ---
    "render.train_samples": 64,
    "render.samples": 128,
    "render.chunk_rays": 4096,
    "render.workers": 1,
    "render.eye_control": True,
    "render.raw_dump": False,
    # --- 训练 ---
    "train.seed": 0,
    "train.coarse.iters": 20000,
    "train.fine.iters": 5000,
    "train.rays_per_batch": 4096,
    "train.fine.patch_size": 32,
    "train.fine.lambda": 0.001,
    "train.lr.tables": 1e-2,
    "train.lr.mlp": 1e-3,
    "train.lr.motion": 1e-3,
    "train.warmup_iters": 0,
    "train.adam.beta1": 0.9,
    "train.adam.beta2": 0.999,
    "train.adam.eps": 1e-8,
    "train.mouth.dilation": 8,
    "train.checkpoint_interval": 1000,
    "train.log_interval": 100,
    "train.motion.iters": 2000,
    "train.motion.batch_frames": 16,
    "train.motion.blink_weight": 1.0,
    # --- 数据 ---
    "data.holdout_every": 8,
    # --- 评估 ---
    "eval.lmd_units": "scene",
    # --- 合成数据集 ---
    "synth.seed": 0,
    "synth.frames": 60,
    "synth.image_size": 64,
    "synth.mouth_amplitude": 0.08,
    "synth.blink_count": 4,
    "synth.fps": 25,
    "synth.background": (1.0, 1.0, 1.0),
    "synth.orbit_degrees": 0.0,
    # --- 图表 ---
    "viz.enabled": True,
}

# =============================================================================
# 暖色系配色方案（训练曲线、眨眼轨迹图）
# =============================================================================

WARM_COLORS = {
    "primary": "#E85A4F",  # 珊瑚红 - 主色调
    "secondary": "#E98074",  # 浅珊瑚 - 次要色
    "tertiary": "#D8C3A5",  # 米色 - 第三色
    "background": "#EAE7DC",  # 奶白色 - 背景色
    "accent": "#8E8D8A",  # 灰色 - 强调色
    "dark": "#4A4A48",  # 深灰 - 文字/边框
}

WARM_PALETTE = ["#E85A4F", "#E98074", "#F4A460", "#DEB887", "#D2691E"]

FIGURE_DPI = 120
FIGURE_SIZE = (10, 5)

CHART_STYLE = {
    "figure.facecolor": WARM_COLORS["background"],
    "axes.facecolor": "#FFFFFF",
    "axes.edgecolor": WARM_COLORS["dark"],
    "axes.labelcolor": WARM_COLORS["dark"],
    "text.color": WARM_COLORS["dark"],
    "xtick.color": WARM_COLORS["dark"],
    "ytick.color": WARM_COLORS["dark"],
    "grid.color": WARM_COLORS["tertiary"],
    "grid.alpha": 0.5,
}


# =============================================================================
# 配置对象与解析
# =============================================================================

_TRUE_WORDS = {"true", "1", "yes", "on"}
_FALSE_WORDS = {"false", "0", "no", "off"}


def _coerce(key: str, raw: str, default: Any, origin: str) -> Any:
    """按默认值的类型解析字符串"""
    text = raw.strip()
    try:
        if isinstance(default, bool):
            lowered = text.lower()
            if lowered in _TRUE_WORDS:
                return True
            if lowered in _FALSE_WORDS:
                return False
            raise ValueError(f"不是布尔值: {text!r}")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            parts = [p for p in text.split(",") if p.strip()]
            values = tuple(type(default[0])(p.strip()) for p in parts)
            if len(values) != len(default):
                raise ValueError(f"需要 {len(default)} 个分量，得到 {len(values)} 个")
            return values
        return text
    except ValueError as e:
        raise ConfigError(f"配置值无法解析 {key}", f"{origin}: {e}")


class Config:
    """
    扁平点号键配置
    所有键都必须出现在 DEFAULT_CONFIG 中
    """

    def __init__(self, values: Optional[Mapping[str, Any]] = None):
        self._values: Dict[str, Any] = dict(DEFAULT_CONFIG)
        if values:
            for key, value in values.items():
                self.set(key, value)

    def set(self, key: str, value: Any) -> None:
        """设置一个键（值为字符串时按默认值类型解析）"""
        if key not in DEFAULT_CONFIG:
            raise ConfigError("未知配置键", key)
        default = DEFAULT_CONFIG[key]
        if isinstance(value, str) and not isinstance(default, str):
            value = _coerce(key, value, default, "override")
        elif isinstance(default, float) and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        self._values[key] = value

    def __getitem__(self, key: str) -> Any:
        if key not in self._values:
            raise ConfigError("未知配置键", key)
        return self._values[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self._values.get(key, default)

    def section(self, prefix: str) -> Dict[str, Any]:
        """取出某个前缀下的所有键（去掉前缀）"""
        if not prefix.endswith("."):
            prefix += "."
        return {k[len(prefix):]: v for k, v in self._values.items() if k.startswith(prefix)}

    def as_dict(self) -> Dict[str, Any]:
        return dict(self._values)

    def keys(self) -> Iterable[str]:
        return self._values.keys()


def parse_config_text(text: str, origin: str = "<string>") -> Dict[str, str]:
    """
    解析 `key = value` 文本

    Args:
        text: 配置文本，`#` 开头为注释
        origin: 出错时用于定位的来源名

    Returns:
        键 -> 原始字符串值
    """
    entries: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("配置行缺少 '='", f"{origin}:{lineno}: {line.strip()}")
        key, value = stripped.split("=", 1)
        key = key.strip()
        if key not in DEFAULT_CONFIG:
            raise ConfigError("未知配置键", f"{origin}:{lineno}: {key}")
        entries[key] = value.strip()
    return entries


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> Config:
    """
    加载配置：默认值 <- 配置文件 <- 覆盖项

    Args:
        path: 配置文件路径（可选）
        overrides: 额外覆盖（如 CLI 的 --seed）

    Returns:
        Config 对象
    """
    cfg = Config()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError("配置文件不存在", str(path))
        text = path.read_text(encoding="utf-8")
        for key, raw in parse_config_text(text, origin=str(path)).items():
            cfg.set(key, _coerce(key, raw, DEFAULT_CONFIG[key], str(path)))
        logger.info(f"已加载配置: {path}")
    if overrides:
        for key, value in overrides.items():
            cfg.set(key, value)
    return cfg
