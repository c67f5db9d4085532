# -*- coding: utf-8 -*-
"""
Tests for audio smoothing, the audio VAE, the landmark transformer and the positional loss.
"""

import numpy as np
import pytest

from src.constants import LANDMARK_COUNT
from src.exceptions import DomainError, ShapeError, StateError
from src.motion import (
    AudioFeatureFrame,
    AudioVae,
    DltModel,
    LandmarkSet,
    build_windows,
    dlt_predict,
    kl_divergence,
    positional_loss,
    positional_loss_grad,
    smooth_features,
    temporal_filter,
    vae_decode,
    vae_encode,
    window_indices,
)
from src.nn.gradcheck import max_gradient_error


# --- temporal filter ---


def test_half_width_zero_is_identity(rng):
    feats = rng.normal(size=(7, 3))
    np.testing.assert_array_equal(smooth_features(feats, 0), feats)


def test_constant_sequence_is_preserved():
    feats = np.full((6, 2), 4.5)
    np.testing.assert_allclose(smooth_features(feats, 2), feats)


def test_filter_commutes_with_constant_shift(rng):
    feats = rng.normal(size=(9, 4))
    shift = rng.normal(size=4)
    for half_width in (0, 1, 3):
        np.testing.assert_allclose(smooth_features(feats + shift, half_width), smooth_features(feats, half_width) + shift)


def test_edges_renormalize_truncated_window():
    feats = np.array([[0.0], [0.0], [3.0]])
    out = smooth_features(feats, 1)
    np.testing.assert_allclose(out[:, 0], [0.0, 0.75, 2.0])


def test_temporal_filter_keeps_length_and_frames():
    frames = [AudioFeatureFrame(np.array([float(i), 1.0]), frame=10 + i) for i in range(5)]
    out = temporal_filter(frames, 2)
    assert len(out) == 5
    assert [f.frame for f in out] == [10, 11, 12, 13, 14]
    assert out[2].features[0] == pytest.approx(2.0)


def test_temporal_filter_rejects_bad_sequences():
    with pytest.raises(DomainError):
        temporal_filter([], 1)
    with pytest.raises(ShapeError):
        temporal_filter([AudioFeatureFrame(np.zeros(2)), AudioFeatureFrame(np.zeros(3))], 1)


def test_audio_frame_validation():
    with pytest.raises(DomainError):
        AudioFeatureFrame(np.array([np.inf, 0.0]))
    with pytest.raises(ShapeError):
        AudioFeatureFrame(np.zeros((2, 2)))


def test_window_indices_clamp_at_edges():
    idx = window_indices(np.array([0, 5]), 5, 6)
    np.testing.assert_array_equal(idx[0], [0, 0, 0, 1, 2])
    np.testing.assert_array_equal(idx[1], [3, 4, 5, 5, 5])
    with pytest.raises(DomainError):
        window_indices(np.array([0]), 4, 6)


def test_build_windows_shape(rng):
    feats = rng.normal(size=(10, 4))
    windows = build_windows(feats, 3)
    assert windows.shape == (10, 3, 4)
    np.testing.assert_array_equal(windows[4, 1], feats[4])


# --- landmarks / positional loss ---


def test_landmark_set_validation():
    pts = np.arange(LANDMARK_COUNT * 3, dtype=float)
    lm = LandmarkSet(pts)
    assert lm.points.shape == (68, 3)
    np.testing.assert_array_equal(lm.flatten(), pts)
    with pytest.raises(ShapeError):
        LandmarkSet(np.zeros((67, 3)))
    with pytest.raises(DomainError):
        LandmarkSet(np.full((68, 3), np.nan))


def test_positional_loss_identical_is_zero(rng):
    seq = rng.normal(size=(4, 68, 3))
    assert positional_loss(seq, seq.copy()) == 0.0


def test_positional_loss_unit_offset(rng):
    seq = rng.normal(size=(3, 68, 3))
    shifted = seq.copy()
    shifted[..., 0] += 1.0
    assert positional_loss(shifted, seq) == pytest.approx(1.0)


def test_positional_loss_is_symmetric(rng):
    a = rng.normal(size=(5, 68, 3))
    b = rng.normal(size=(5, 68, 3))
    assert positional_loss(a, b) == pytest.approx(positional_loss(b, a), rel=1e-12)


def test_positional_loss_accepts_landmark_sets():
    a = [LandmarkSet(np.zeros((68, 3)), frame=i) for i in range(2)]
    b = [LandmarkSet(np.full((68, 3), 0.5), frame=i) for i in range(2)]
    assert positional_loss(a, b) == pytest.approx(1.5)
    c = [LandmarkSet(np.zeros((68, 3)), frame=i + 1) for i in range(2)]
    with pytest.raises(ShapeError):
        positional_loss(a, c)


def test_positional_loss_frame_count_mismatch():
    with pytest.raises(ShapeError):
        positional_loss(np.zeros((2, 68, 3)), np.zeros((3, 68, 3)))


def test_positional_loss_grad(rng):
    pred = rng.normal(size=(2, 68, 3))
    target = rng.normal(size=(2, 68, 3))
    g = positional_loss_grad(pred, target)
    np.testing.assert_allclose(g, np.sign(pred - target) / (68 * 2))


# --- VAE ---


@pytest.fixture
def vae(store64):
    return AudioVae(store64, input_width=5, latent_width=3, hidden=6, kl_weight=0.1)


def test_kl_of_standard_normal_is_zero():
    assert kl_divergence(np.zeros((4, 3)), np.zeros((4, 3))) == 0.0
    assert kl_divergence(np.ones(2), np.zeros(2)) == pytest.approx(1.0)


def test_zero_noise_gives_mean(vae, rng):
    x = rng.normal(size=(4, 5))
    latent = vae_encode(vae, x, eps=np.zeros((4, 3)))
    np.testing.assert_array_equal(latent.z, latent.mean)
    assert latent.width == 3
    assert vae_decode(vae, latent.z).shape == (4, 5)


def test_sample_is_affine_in_noise(vae, rng):
    x = rng.normal(size=(4, 5))
    base = vae_encode(vae, x, eps=np.zeros((4, 3)))
    unit = vae_encode(vae, x, eps=np.ones((4, 3)))
    sigma = unit.z - base.z
    np.testing.assert_allclose(sigma, np.exp(0.5 * base.log_var))
    for _ in range(3):
        eps = rng.normal(size=(4, 3))
        np.testing.assert_allclose(vae_encode(vae, x, eps=eps).z, base.z + sigma * eps, atol=1e-12)


def test_single_frame_shapes(vae, rng):
    latent = vae.encode(rng.normal(size=5), rng=rng)
    assert latent.mean.shape == latent.log_var.shape == latent.z.shape == (3,)
    assert vae.decode(latent.z).shape == (5,)


def test_vae_width_mismatch(vae):
    with pytest.raises(ShapeError):
        vae.encode(np.zeros(4))
    with pytest.raises(ShapeError):
        vae.decode(np.zeros(2))


def test_vae_backward_requires_objective(vae):
    with pytest.raises(StateError):
        vae.backward()


def test_vae_objective_gradients(store64, vae, rng):
    x = rng.normal(size=(4, 5))
    eps = rng.normal(size=(4, 3))
    upstream_mean = rng.normal(size=(4, 3))

    def loss():
        total, _, _, latent = vae.objective(x, eps=eps)
        return total + float(np.sum(latent.mean * upstream_mean))

    total, mse, kl, _ = vae.objective(x, eps=eps)
    assert total == pytest.approx(mse + 0.1 * kl)
    g_x = vae.backward(mean_grad=upstream_mean)
    for name in store64.names("vae."):
        err = max_gradient_error(loss, store64[name], store64.grad(name), points=50, rng=rng, eps=1e-5)
        assert err < 1e-3, name
    assert max_gradient_error(loss, x, g_x, points=50, rng=rng, eps=1e-5) < 1e-3


# --- DLT ---


@pytest.fixture
def dlt(store64):
    return DltModel(store64, input_width=4, window=5, embed_width=6, head_hidden=8, blink_width=2)


def test_dlt_output_shapes(dlt, rng):
    windows = rng.normal(size=(3, 5, 4))
    blink = rng.normal(size=(3, 2))
    batched = dlt.forward(windows, blink)
    assert batched.shape == (3, 204)
    single = dlt.forward(windows[1], blink[1])
    np.testing.assert_allclose(single, batched[1], atol=1e-12)


def test_dlt_head_bias_starts_at_mean_landmarks(store64, rng):
    mean = rng.uniform(size=(68, 3))
    model = DltModel(store64, input_width=4, window=3, embed_width=4, head_hidden=4, blink_width=2, mean_landmarks=mean)
    store64.assign("dlt.head.w1", np.zeros_like(store64["dlt.head.w1"]))
    out = dlt_predict(model, rng.normal(size=(3, 4)), np.zeros(2), frame=5)
    assert out.frame == 5
    np.testing.assert_allclose(out.points, mean)


def test_dlt_shape_errors(dlt):
    with pytest.raises(ShapeError):
        dlt.forward(np.zeros((4, 4)), np.zeros(2))
    with pytest.raises(ShapeError):
        dlt.forward(np.zeros((5, 3)), np.zeros(2))
    with pytest.raises(ShapeError):
        dlt.forward(np.zeros((5, 4)), np.zeros(3))
    with pytest.raises(ShapeError):
        DltModel(dlt.store, input_width=4, window=4, name="other")


def test_dlt_backward_requires_forward(dlt):
    with pytest.raises(StateError):
        dlt.backward(np.zeros(204))


def test_dlt_gradients_match_finite_differences(store64, dlt, rng):
    windows = rng.normal(size=(2, 5, 4))
    blink = rng.normal(size=(2, 2))
    weights = rng.normal(size=(2, 204))

    def loss():
        return float(np.sum(dlt.forward(windows, blink, retain=False) * weights))

    dlt.forward(windows, blink)
    g_windows, g_blink = dlt.backward(weights)
    for name in store64.names("dlt."):
        err = max_gradient_error(loss, store64[name], store64.grad(name), points=50, rng=rng, eps=1e-5)
        assert err < 1e-3, name
    assert max_gradient_error(loss, windows, g_windows, points=50, rng=rng, eps=1e-5) < 1e-3
    assert max_gradient_error(loss, blink, g_blink, points=50, rng=rng, eps=1e-5) < 1e-3
