# -*- coding: utf-8 -*-
"""
眨眼网络
BlinkMapper: AU 时间窗 + 本帧音频摘要 -> 眨眼嵌入（面部动作单元特征向量）
EyeStatePredictor: K 帧嵌入 + K 帧历史睁眼程度 -> 下一帧睁眼程度
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from src.constants import AU_MAX
from src.exceptions import ShapeError, StateError
from src.nn.mlp import Mlp
from src.nn.params import ParamStore

logger = logging.getLogger(__name__)


@dataclass
class BlinkEmbedding:
    """宽度为 D_b 的眨眼嵌入"""

    vector: np.ndarray
    frame: int = 0

    @property
    def width(self) -> int:
        return int(self.vector.shape[-1])


def au_windows(au: np.ndarray, window: int) -> np.ndarray:
    """
    每帧以自身为中心的 AU 窗口，两端夹取，并除以5归一化

    Returns:
        (F, window)
    """
    au = np.asarray(au, dtype=np.float64)
    half = window // 2
    idx = np.clip(np.arange(au.shape[0])[:, None] + np.arange(-half, window - half)[None, :], 0, au.shape[0] - 1)
    return au[idx] / AU_MAX


def audio_summary(audio: np.ndarray) -> np.ndarray:
    """逐帧音频特征的 [均值, 标准差]"""
    audio = np.atleast_2d(np.asarray(audio, dtype=np.float64))
    return np.stack([audio.mean(axis=1), audio.std(axis=1)], axis=1)


class BlinkMapper:
    """
    映射网络 `blink.map`: [AU窗/5 ‖ 音频摘要] -> D_b
    读出头 `blink.readout`: D_b -> 1 (sigmoid)，监督嵌入携带眼睛状态
    """

    def __init__(self, store: ParamStore, au_window: int = 5, hidden: int = 32, embedding_width: int = 4, name: str = "blink"):
        self.store = store
        self.name = name
        self.au_window = au_window
        self.embedding_width = embedding_width
        self.input_width = au_window + 2
        self.mapper = Mlp(store, f"{name}.map", [self.input_width, hidden, embedding_width])
        self.readout = Mlp(store, f"{name}.readout", [embedding_width, 1], output_activation="sigmoid")

    def inputs(self, au_window_rows: np.ndarray, audio: np.ndarray) -> np.ndarray:
        au_window_rows = np.atleast_2d(np.asarray(au_window_rows, dtype=np.float64))
        if au_window_rows.shape[1] != self.au_window:
            raise ShapeError("AU 窗口长度不匹配", f"期望 {self.au_window}，得到 {au_window_rows.shape[1]}")
        summary = audio_summary(audio)
        if summary.shape[0] != au_window_rows.shape[0]:
            raise ShapeError("AU 窗口与音频帧数不一致", f"{au_window_rows.shape[0]} vs {summary.shape[0]}")
        return np.concatenate([au_window_rows, summary], axis=1)

    def forward(self, au_window_rows: np.ndarray, audio: np.ndarray, retain: bool = True) -> np.ndarray:
        """
        Args:
            au_window_rows: (N, au_window) 已归一化的 AU 窗
            audio: (N, D_a) 本帧音频特征

        Returns:
            (N, D_b)
        """
        return self.mapper.forward(self.inputs(au_window_rows, audio), retain=retain)

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        return self.mapper.backward(upstream)

    def predict_openness(self, embeddings: np.ndarray, retain: bool = True) -> np.ndarray:
        return self.readout.forward(np.atleast_2d(embeddings), retain=retain)[:, 0]

    def backward_openness(self, upstream: np.ndarray) -> np.ndarray:
        return self.readout.backward(np.asarray(upstream)[:, None])


def au_to_blink_feature(mapper: BlinkMapper, states: Sequence, per_frame_audio) -> BlinkEmbedding:
    """
    单帧眨眼嵌入

    Args:
        mapper: 映射网络
        states: 长度为 au_window 的 BlinkState 窗口
        per_frame_audio: 本帧 AudioFeatureFrame 或特征向量
    """
    states = list(states)
    if len(states) != mapper.au_window:
        raise ShapeError("AU 窗口长度不匹配", f"期望 {mapper.au_window}，得到 {len(states)}")
    au = np.array([s.au_intensity for s in states], dtype=np.float64) / AU_MAX
    audio = np.asarray(getattr(per_frame_audio, "features", per_frame_audio), dtype=np.float64)
    emb = mapper.forward(au[None, :], audio[None, :], retain=False)[0]
    center = states[len(states) // 2]
    return BlinkEmbedding(emb, center.frame)


class EyeStatePredictor:
    """眼动预测 `blink.eye`: K·(D_b + 1) -> hidden -> 1 (sigmoid)"""

    def __init__(self, store: ParamStore, history: int = 4, embedding_width: int = 4, hidden: int = 32, name: str = "blink"):
        self.store = store
        self.history = history
        self.embedding_width = embedding_width
        self.net = Mlp(store, f"{name}.eye", [history * (embedding_width + 1), hidden, 1], output_activation="sigmoid")

    def inputs(self, embeddings: np.ndarray, states: np.ndarray) -> np.ndarray:
        emb = np.asarray(embeddings, dtype=np.float64)
        st = np.asarray(states, dtype=np.float64)
        emb = emb[None] if emb.ndim == 2 else emb
        st = st[None] if st.ndim == 1 else st
        if emb.shape[1] < self.history or st.shape[1] < self.history:
            raise StateError("眼动历史长度不足", f"需要 {self.history} 帧，得到 {min(emb.shape[1], st.shape[1])}")
        if emb.shape[1] != self.history or st.shape[1] != self.history:
            raise ShapeError("眼动历史长度不匹配", f"期望 {self.history}")
        if emb.shape[2] != self.embedding_width:
            raise ShapeError("眨眼嵌入宽度不匹配", f"期望 {self.embedding_width}，得到 {emb.shape[2]}")
        return np.concatenate([emb.reshape(emb.shape[0], -1), st], axis=1)

    def forward(self, embeddings: np.ndarray, states: np.ndarray, retain: bool = True) -> np.ndarray:
        """
        Args:
            embeddings: (K, D_b) 或 (N, K, D_b)，截止到当前帧的嵌入
            states: (K,) 或 (N, K)，之前 K 帧的睁眼程度

        Returns:
            (N,) 下一帧睁眼程度
        """
        return self.net.forward(self.inputs(embeddings, states), retain=retain)[:, 0]

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        """返回对嵌入历史的梯度 (N, K, D_b)"""
        g = self.net.backward(np.asarray(upstream)[:, None])
        k, d = self.history, self.embedding_width
        return g[:, :k * d].reshape(-1, k, d)


def predict_next_eye_state(model: EyeStatePredictor, embeddings: np.ndarray, states: np.ndarray) -> float:
    """由 K 帧历史预测下一帧睁眼程度，输出在 (0,1) 内"""
    return float(model.forward(embeddings, states, retain=False)[0])


def history_indices(frame_count: int, history: int) -> np.ndarray:
    """每帧 t 的嵌入历史下标 t-K+1..t（夹到0）"""
    return np.clip(np.arange(frame_count)[:, None] + np.arange(-history + 1, 1)[None, :], 0, None)


def state_history(states: np.ndarray, history: int, initial: float = 1.0) -> np.ndarray:
    """每帧 t 之前 K 帧的状态 t-K..t-1，序列开头用 initial 填充"""
    states = np.asarray(states, dtype=np.float64)
    padded = np.concatenate([np.full(history, initial), states])
    idx = np.arange(states.shape[0])[:, None] + np.arange(history)[None, :]
    return padded[idx]


def rollout_eye_states(
    model: EyeStatePredictor,
    embeddings: np.ndarray,
    initial: float = 1.0,
    history: Optional[int] = None,
) -> np.ndarray:
    """
    自回归逐帧预测睁眼程度，历史用完全睁开的状态初始化

    Args:
        model: 眼动预测网络
        embeddings: (F, D_b) 每帧眨眼嵌入
        initial: 初始历史状态

    Returns:
        (F,) 睁眼程度
    """
    k = history or model.history
    embeddings = np.asarray(embeddings, dtype=np.float64)
    count = embeddings.shape[0]
    emb_idx = history_indices(count, k)
    past = list(np.full(k, initial))
    out = np.empty(count)
    for t in range(count):
        out[t] = predict_next_eye_state(model, embeddings[emb_idx[t]], np.array(past[-k:]))
        past.append(out[t])
    logger.debug(f"眼动轨迹预测完成: {count} 帧")
    return out
