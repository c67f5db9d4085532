# -*- coding: utf-8 -*-
"""
常量定义模块
包含68点人脸关键点索引、哈希素数、球谐系数、检查点格式等常量
"""

# =============================================================================
# 68点人脸关键点（0-based，标准 iBUG-68 标注顺序）
# =============================================================================

LANDMARK_COUNT = 68

# 下颌轮廓、眉毛、鼻子
JAW_INDICES = tuple(range(0, 17))
BROW_INDICES = tuple(range(17, 27))
NOSE_INDICES = tuple(range(27, 36))

# 每只眼6个点，顺序为 p1..p6（p1/p4 为眼角，p2/p3 上眼睑，p5/p6 下眼睑）
LEFT_EYE_INDICES = tuple(range(36, 42))
RIGHT_EYE_INDICES = tuple(range(42, 48))
EYE_INDICES = LEFT_EYE_INDICES + RIGHT_EYE_INDICES

# 嘴部（外唇 48-59，内唇 60-67）
OUTER_LIP_INDICES = tuple(range(48, 60))
INNER_LIP_INDICES = tuple(range(60, 68))
MOUTH_INDICES = OUTER_LIP_INDICES + INNER_LIP_INDICES

# =============================================================================
# 哈希编码
# =============================================================================

# 2D 空间哈希的坐标素数（第一维为1，Instant-NGP 约定）
HASH_PRIMES = (1, 2654435761)

# 三平面标签及其对应的坐标分量
PLANE_AXES = {
    "XY": (0, 1),
    "YZ": (1, 2),
    "XZ": (0, 2),
}
PLANE_ORDER = ("XY", "YZ", "XZ")

# =============================================================================
# 球谐方向编码（2阶，9个系数）
# =============================================================================

SH_C0 = 0.28209479177387814
SH_C1 = 0.4886025119029199
SH_C2 = (
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
)
SH_WIDTH = 9

# =============================================================================
# 检查点文件格式
# =============================================================================

CHECKPOINT_MAGIC = b"TPRFCKPT"
CHECKPOINT_VERSION = 1

# =============================================================================
# 数据集文件名
# =============================================================================

MANIFEST_FILE = "manifest.json"
CAMERAS_FILE = "cameras.json"
LANDMARKS_FILE = "landmarks.csv"
AUDIO_FILE = "audio_features.csv"
AU_FILE = "au.csv"
FRAMES_DIR = "frames"
FRAME_NAME_PATTERN = "frame_{:04d}.png"

# AU 强度范围（OpenFace AU45）
AU_MIN = 0.0
AU_MAX = 5.0
AU_COLUMN = "au45_intensity"

# 归一化后场景所占的立方体范围
NORMALIZED_LOW = 0.05
NORMALIZED_HIGH = 0.95

# =============================================================================
# 评估报告
# =============================================================================

# PSNR 在两图完全相同时的哨兵字符串
PSNR_INF_SENTINEL = "+inf"

# 需要预训练网络的指标，报告中保留为 null
RESERVED_NULL_METRICS = ("sync", "fid", "lpips")


def landmark_columns() -> list:
    """landmarks.csv 的列名 x0,y0,z0,...,x67,y67,z67"""
    cols = []
    for i in range(LANDMARK_COUNT):
        cols.extend([f"x{i}", f"y{i}", f"z{i}"])
    return cols


def audio_columns(width: int) -> list:
    """audio_features.csv 的列名 f0..f{D_a-1}"""
    return [f"f{i}" for i in range(width)]
