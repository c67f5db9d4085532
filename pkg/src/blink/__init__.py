# -*- coding: utf-8 -*-
"""
眨眼模块包
AU 强度、眼部几何、眨眼嵌入与眼动预测
"""

from .eye import (
    BlinkState,
    EyeLandmarks,
    extract_eye_landmarks,
    eye_aspect_ratio,
    batch_eye_aspect_ratio,
    mean_eye_aspect_ratio,
    ear_open_reference,
    eye_openness,
    apply_eye_openness,
)
from .networks import (
    BlinkEmbedding,
    BlinkMapper,
    EyeStatePredictor,
    au_windows,
    audio_summary,
    au_to_blink_feature,
    predict_next_eye_state,
    history_indices,
    state_history,
    rollout_eye_states,
)

__all__ = [
    "BlinkState",
    "EyeLandmarks",
    "extract_eye_landmarks",
    "eye_aspect_ratio",
    "batch_eye_aspect_ratio",
    "mean_eye_aspect_ratio",
    "ear_open_reference",
    "eye_openness",
    "apply_eye_openness",
    "BlinkEmbedding",
    "BlinkMapper",
    "EyeStatePredictor",
    "au_windows",
    "audio_summary",
    "au_to_blink_feature",
    "predict_next_eye_state",
    "history_indices",
    "state_history",
    "rollout_eye_states",
]
