# -*- coding: utf-8 -*-
"""
Tests for eye geometry and the blink networks.
"""

import numpy as np
import pytest

from src.blink import (
    BlinkMapper,
    BlinkState,
    EyeStatePredictor,
    apply_eye_openness,
    au_to_blink_feature,
    au_windows,
    ear_open_reference,
    extract_eye_landmarks,
    eye_aspect_ratio,
    eye_openness,
    history_indices,
    mean_eye_aspect_ratio,
    predict_next_eye_state,
    rollout_eye_states,
    state_history,
)
from src.constants import EYE_INDICES, LEFT_EYE_INDICES
from src.data.synthetic import SyntheticSceneSpec, landmark_layout
from src.exceptions import DegenerateEyeError, DomainError, ShapeError, StateError
from src.nn.gradcheck import max_gradient_error
from src.nn.params import ParamStore

OPEN_EYE = np.array([[0, 0], [1, 1], [3, 1], [4, 0], [3, -1], [1, -1]], dtype=float)


@pytest.fixture
def face():
    return landmark_layout(SyntheticSceneSpec(), 0.5, 1.0)


# --- eye geometry ---


def test_eye_aspect_ratio_known_value():
    assert eye_aspect_ratio(OPEN_EYE) == pytest.approx(0.5)


def test_closed_eye_has_zero_ratio():
    closed = OPEN_EYE.copy()
    closed[[1, 2, 4, 5], 1] = 0.0
    assert eye_aspect_ratio(closed) == 0.0


def test_degenerate_corners_rejected():
    eye = OPEN_EYE.copy()
    eye[3] = eye[0]
    with pytest.raises(DegenerateEyeError):
        eye_aspect_ratio(eye)


def test_eye_shape_checked():
    with pytest.raises(ShapeError):
        eye_aspect_ratio(np.zeros((5, 2)))


def test_extract_eye_landmarks(face):
    eyes = extract_eye_landmarks(face)
    np.testing.assert_array_equal(eyes.left, face[list(LEFT_EYE_INDICES)])
    assert eyes.right.shape == (6, 3)
    with pytest.raises(ShapeError):
        extract_eye_landmarks(face[:60])


def test_eye_aspect_ratio_invariant_to_similarity_transforms(rng):
    eye = np.column_stack([OPEN_EYE, np.zeros(6)]) + rng.normal(scale=0.1, size=(6, 3))
    expected = eye_aspect_ratio(eye)
    for _ in range(5):
        q, r = np.linalg.qr(rng.normal(size=(3, 3)))
        rotation = q * np.sign(np.diag(r))
        scale = rng.uniform(0.1, 10.0)
        shift = rng.normal(scale=5.0, size=3)
        moved = scale * eye @ rotation.T + shift
        assert eye_aspect_ratio(moved) == pytest.approx(expected, rel=1e-9)


def test_extract_eye_landmarks_ignores_other_points(face, rng):
    before = extract_eye_landmarks(face)
    others = [i for i in range(68) if i not in EYE_INDICES]
    changed = face.copy()
    changed[others] = rng.normal(size=(len(others), 3))
    after = extract_eye_landmarks(changed)
    np.testing.assert_array_equal(after.left, before.left)
    np.testing.assert_array_equal(after.right, before.right)


def test_mean_ratio_drops_when_eyes_close():
    spec = SyntheticSceneSpec()
    seq = np.stack([landmark_layout(spec, 0.5, o) for o in (1.0, 0.5, 0.0)])
    ears = mean_eye_aspect_ratio(seq)
    assert ears[0] > ears[1] > ears[2]
    assert ears[2] == pytest.approx(0.0, abs=1e-9)


def test_blink_state_validation():
    assert BlinkState(2.5, 0.3).eye_openness == 0.3
    with pytest.raises(DomainError):
        BlinkState(5.5)
    with pytest.raises(DomainError):
        BlinkState(1.0, eye_openness=1.2)


def test_eye_openness_clamps():
    np.testing.assert_allclose(eye_openness(np.array([0.0, 0.15, 0.6]), 0.3), [0.0, 0.5, 1.0])


def test_ear_open_reference():
    ears = np.linspace(0.0, 1.0, 101)
    assert ear_open_reference(ears, 95.0) == pytest.approx(0.95)
    with pytest.raises(DomainError):
        ear_open_reference(np.array([]))
    with pytest.raises(DomainError):
        ear_open_reference(np.zeros(5))


@pytest.mark.parametrize("target", [0.0, 0.4, 1.0])
def test_apply_eye_openness_hits_target(face, target):
    ear_open = 0.8 * eye_aspect_ratio(face[list(LEFT_EYE_INDICES)])
    out = apply_eye_openness(face, target, ear_open)
    assert eye_aspect_ratio(out[list(LEFT_EYE_INDICES)]) == pytest.approx(target * ear_open, abs=1e-9)
    others = [i for i in range(68) if i not in EYE_INDICES]
    np.testing.assert_array_equal(out[others], face[others])


def test_apply_eye_openness_range(face):
    with pytest.raises(DomainError):
        apply_eye_openness(face, 1.5, 0.3)


# --- networks ---


def test_au_windows_clamp_and_scale():
    au = np.array([0.0, 5.0, 2.5])
    rows = au_windows(au, 3)
    np.testing.assert_allclose(rows[0], [0.0, 0.0, 1.0])
    np.testing.assert_allclose(rows[2], [1.0, 0.5, 0.5])


def test_blink_mapper_shapes(rng):
    mapper = BlinkMapper(ParamStore(seed=1), au_window=5, hidden=8, embedding_width=4)
    emb = mapper.forward(rng.uniform(size=(6, 5)), rng.normal(size=(6, 7)))
    assert emb.shape == (6, 4)
    openness = mapper.predict_openness(emb)
    assert openness.shape == (6,)
    assert np.all((openness > 0) & (openness < 1))
    with pytest.raises(ShapeError):
        mapper.forward(rng.uniform(size=(6, 4)), rng.normal(size=(6, 7)))
    with pytest.raises(ShapeError):
        mapper.forward(rng.uniform(size=(6, 5)), rng.normal(size=(5, 7)))


def test_single_frame_blink_feature(rng):
    mapper = BlinkMapper(ParamStore(seed=2), au_window=3, hidden=8, embedding_width=4)
    states = [BlinkState(v, frame=i) for i, v in enumerate([0.0, 4.0, 1.0])]
    audio = rng.normal(size=6)
    feature = au_to_blink_feature(mapper, states, audio)
    assert feature.width == 4
    assert feature.frame == 1
    expected = mapper.forward(np.array([[0.0, 0.8, 0.2]]), audio[None, :], retain=False)[0]
    np.testing.assert_allclose(feature.vector, expected)
    with pytest.raises(ShapeError):
        au_to_blink_feature(mapper, states[:2], audio)


def test_eye_predictor_output_in_unit_interval(rng):
    model = EyeStatePredictor(ParamStore(seed=3), history=3, embedding_width=2, hidden=8)
    value = predict_next_eye_state(model, rng.normal(size=(3, 2)), np.ones(3))
    assert 0.0 < value < 1.0
    batch = model.forward(rng.normal(size=(5, 3, 2)), rng.uniform(size=(5, 3)))
    assert batch.shape == (5,)


def test_eye_predictor_history_checks(rng):
    model = EyeStatePredictor(ParamStore(), history=3, embedding_width=2, hidden=4)
    with pytest.raises(StateError):
        model.forward(rng.normal(size=(2, 2)), np.ones(2))
    with pytest.raises(ShapeError):
        model.forward(rng.normal(size=(3, 5)), np.ones(3))


def test_eye_predictor_backward_shape(rng):
    model = EyeStatePredictor(ParamStore(), history=3, embedding_width=2, hidden=4)
    model.forward(rng.normal(size=(4, 3, 2)), rng.uniform(size=(4, 3)))
    assert model.backward(np.ones(4)).shape == (4, 3, 2)


def test_blink_mapper_gradients_match_finite_differences(store64, rng):
    mapper = BlinkMapper(store64, au_window=5, hidden=8, embedding_width=4)
    au = rng.uniform(size=(6, 5))
    audio = rng.normal(size=(6, 7))
    w_emb = rng.normal(size=(6, 4))
    w_open = rng.normal(size=6)

    def loss():
        emb = mapper.forward(au, audio, retain=False)
        return float(np.sum(emb * w_emb) + np.sum(mapper.predict_openness(emb, retain=False) * w_open))

    emb = mapper.forward(au, audio)
    mapper.predict_openness(emb)
    g_emb = mapper.backward_openness(w_open)
    g_in = mapper.backward(w_emb + g_emb)

    for name in store64.names("blink."):
        err = max_gradient_error(loss, store64[name], store64.grad(name), points=50, rng=rng, eps=1e-5)
        assert err < 1e-3, name
    assert max_gradient_error(loss, au, g_in[:, :5], points=50, rng=rng, eps=1e-5) < 1e-3


def test_eye_predictor_gradients_match_finite_differences(store64, rng):
    model = EyeStatePredictor(store64, history=3, embedding_width=2, hidden=8)
    embeddings = rng.normal(size=(5, 3, 2))
    states = rng.uniform(size=(5, 3))
    weights = rng.normal(size=5)

    def loss():
        return float(np.sum(model.forward(embeddings, states, retain=False) * weights))

    model.forward(embeddings, states)
    g_emb = model.backward(weights)

    for name in store64.names("blink.eye"):
        err = max_gradient_error(loss, store64[name], store64.grad(name), points=50, rng=rng, eps=1e-5)
        assert err < 1e-3, name
    assert max_gradient_error(loss, embeddings, g_emb, points=50, rng=rng, eps=1e-5) < 1e-3


def test_history_helpers():
    np.testing.assert_array_equal(history_indices(3, 2), [[0, 0], [0, 1], [1, 2]])
    np.testing.assert_array_equal(state_history(np.array([0.2, 0.4]), 2), [[1.0, 1.0], [1.0, 0.2]])


def test_rollout_feeds_back_predictions(rng):
    model = EyeStatePredictor(ParamStore(seed=4), history=2, embedding_width=2, hidden=4)
    embeddings = rng.normal(size=(5, 2))
    track = rollout_eye_states(model, embeddings)
    assert track.shape == (5,)
    assert np.all((track > 0) & (track < 1))
    # 第3帧的历史是前两帧的预测值
    expected = predict_next_eye_state(model, embeddings[[1, 2]], track[[0, 1]])
    assert track[2] == pytest.approx(expected)
