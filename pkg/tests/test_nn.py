# -*- coding: utf-8 -*-
"""
Tests for the numerical core: ParamStore, Mlp, Adam, checkpoints.
"""

import numpy as np
import pytest

from src.exceptions import CheckpointError, ConfigError, NumericError, ShapeError, StateError
from src.nn import (
    Mlp,
    ParamStore,
    adam_step,
    file_digest,
    load_checkpoint,
    max_gradient_error,
    relative_error,
    resolve_lr,
    restore_into,
    save_checkpoint,
    warmup_scale,
)
from src.nn.checkpoint import decode_checkpoint, encode_checkpoint


# --- Mlp forward ---


def test_zero_net_outputs_zero(rng):
    store = ParamStore(seed=0)
    net = Mlp(store, "net", [5, 7, 3])
    net.zero_()
    out = net.forward(rng.normal(size=5))
    assert out.shape == (3,)
    assert np.all(out == 0)


def test_identity_linear_layer(rng):
    store = ParamStore(seed=0, dtype=np.float64)
    net = Mlp(store, "net", [4, 4])
    store.assign("net.w0", np.eye(4))
    store.assign("net.b0", np.zeros(4))
    v = rng.normal(size=4)
    np.testing.assert_array_equal(net.forward(v), v)


def test_forward_matches_matmul_oracle(rng):
    store = ParamStore(seed=3, dtype=np.float64)
    net = Mlp(store, "net", [6, 5, 2], output_activation="sigmoid")
    x = rng.normal(size=6)

    hidden = np.zeros(5)
    for j in range(5):
        acc = store["net.b0"][j]
        for i in range(6):
            acc += x[i] * store["net.w0"][i, j]
        hidden[j] = max(acc, 0.0)
    expected = np.zeros(2)
    for j in range(2):
        acc = store["net.b1"][j]
        for i in range(5):
            acc += hidden[i] * store["net.w1"][i, j]
        expected[j] = 1.0 / (1.0 + np.exp(-acc))

    np.testing.assert_allclose(net.forward(x), expected, atol=1e-6)


def test_forward_is_deterministic(rng):
    store = ParamStore(seed=11)
    net = Mlp(store, "net", [3, 8, 2])
    x = rng.normal(size=(4, 3))
    np.testing.assert_array_equal(net.forward(x), net.forward(x))


def test_width_mismatch_names_layer():
    net = Mlp(ParamStore(), "decoder", [3, 2])
    with pytest.raises(ShapeError) as exc:
        net.forward(np.zeros(4))
    assert "decoder.layer0" in str(exc.value)


def test_invalid_widths_rejected():
    with pytest.raises(ShapeError):
        Mlp(ParamStore(), "net", [3])
    with pytest.raises(ShapeError):
        Mlp(ParamStore(), "net", [3, 0, 1])


# --- Mlp backward ---


def test_backward_before_forward_is_state_error():
    net = Mlp(ParamStore(), "net", [2, 2])
    with pytest.raises(StateError):
        net.backward(np.ones(2))


def test_identity_net_passes_upstream_through():
    store = ParamStore(dtype=np.float64)
    net = Mlp(store, "net", [3, 3])
    store.assign("net.w0", np.eye(3))
    net.forward(np.array([0.3, -1.0, 2.0]))
    np.testing.assert_array_equal(net.backward(np.ones(3)), np.ones(3))


@pytest.mark.parametrize("output_activation", ["identity", "sigmoid", "softplus"])
def test_parameter_gradients_match_finite_differences(store64, rng, output_activation):
    net = Mlp(store64, "net", [4, 6, 5, 3], output_activation=output_activation)
    x = rng.normal(size=(5, 4))
    weights = rng.normal(size=(5, 3))

    def loss():
        return float(np.sum(net.forward(x, retain=False) * weights))

    net.forward(x)
    g_x = net.backward(weights)
    for name in net.param_names():
        err = max_gradient_error(loss, store64[name], store64.grad(name), points=50, rng=rng, eps=1e-5)
        assert err < 1e-3, name
    err = max_gradient_error(loss, x, g_x, points=50, rng=rng, eps=1e-5)
    assert err < 1e-3


def test_two_backwards_double_gradients(store64, rng):
    net = Mlp(store64, "net", [3, 4, 2])
    x = rng.normal(size=(2, 3))
    net.forward(x)
    net.backward(np.ones((2, 2)))
    first = {n: store64.grad(n).copy() for n in net.param_names()}
    net.backward(np.ones((2, 2)))
    for name, g in first.items():
        np.testing.assert_array_equal(store64.grad(name), 2 * g)


def test_forward_backward_leaves_parameters_unchanged(store64, rng):
    net = Mlp(store64, "net", [3, 4, 2])
    before = store64.snapshot()
    net.forward(rng.normal(size=(2, 3)))
    net.backward(np.ones((2, 2)))
    for name, value in before.items():
        np.testing.assert_array_equal(store64[name], value)


# --- ParamStore / Adam ---


def test_store_slots_match_parameters():
    store = ParamStore(seed=0)
    Mlp(store, "net", [3, 4, 2])
    for name in store.names():
        assert store.grad(name).shape == store[name].shape
        assert np.all(store.m[name] == 0)
        assert np.all(store.v[name] == 0)
    assert store.params["net.w0"].dtype == np.float32


def test_duplicate_parameter_rejected():
    store = ParamStore()
    store.add("a", (2,))
    with pytest.raises(ConfigError):
        store.add("a", (2,))


def test_adam_zero_gradients_is_noop():
    store = ParamStore(seed=0)
    Mlp(store, "net", [3, 2])
    before = store.snapshot()
    adam_step(store, 0.1)
    assert store.step == 1
    for name, value in before.items():
        np.testing.assert_array_equal(store[name], value)


def test_adam_moves_against_gradient_sign():
    store = ParamStore(dtype=np.float64)
    p = store.add("p", (1,), init="zeros")
    previous = 0.0
    for _ in range(20):
        store.accumulate("p", np.array([2.5]))
        adam_step(store, 0.05)
        assert p[0] < previous
        previous = p[0]


def test_adam_three_step_recurrence():
    store = ParamStore(dtype=np.float64)
    p = store.add("p", (1,), value=np.array([1.0]))
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    value, m, v = 1.0, 0.0, 0.0
    for t in range(1, 4):
        store.accumulate("p", np.array([1.0]))
        adam_step(store, lr, b1, b2, eps)
        m = b1 * m + (1 - b1) * 1.0
        v = b2 * v + (1 - b2) * 1.0
        value -= lr * (m / (1 - b1 ** t)) / (np.sqrt(v / (1 - b2 ** t)) + eps)
        assert p[0] == pytest.approx(value, abs=1e-12)
        assert store.grad("p")[0] == 0.0
    assert store.step == 3


def test_adam_non_finite_gradient_names_parameter():
    store = ParamStore()
    store.add("good", (2,))
    store.add("bad", (2,))
    store.accumulate("bad", np.array([np.nan, 0.0], dtype=np.float32))
    before = store.snapshot()
    with pytest.raises(NumericError) as exc:
        adam_step(store, 0.1)
    assert "bad" in str(exc.value)
    assert store.step == 0
    np.testing.assert_array_equal(store["good"], before["good"])


def test_parameter_groups_longest_prefix():
    lr = {"field.": 1e-3, "field.sigma": 5e-3, "plane_": 1e-2}
    assert resolve_lr("field.sigma.w0", lr) == 5e-3
    assert resolve_lr("field.color.w0", lr) == 1e-3
    assert resolve_lr("plane_xy.level0", lr) == 1e-2
    assert resolve_lr("anything", 0.5) == 0.5
    with pytest.raises(ConfigError):
        resolve_lr("dlt.embed.w0", lr)


def test_warmup_scale():
    assert warmup_scale(0, 0) == 1.0
    assert warmup_scale(0, 4) == 0.25
    assert warmup_scale(3, 4) == 1.0
    assert warmup_scale(10, 4) == 1.0


def test_seeded_training_is_bitwise_reproducible(rng):
    x = rng.normal(size=(8, 3))
    y = rng.normal(size=(8, 2))

    def run():
        store = ParamStore(seed=5)
        net = Mlp(store, "net", [3, 6, 2])
        for _ in range(5):
            out = net.forward(x)
            net.backward(2 * (out - y) / len(x))
            adam_step(store, 0.01)
        return store.snapshot()

    a, b = run(), run()
    for name in a:
        np.testing.assert_array_equal(a[name], b[name])


# --- checkpoints / gradcheck helpers ---


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    store = ParamStore(seed=2)
    Mlp(store, "net", [3, 5, 2])
    path = save_checkpoint(tmp_path / "a.ckpt", store, {"stage": "coarse", "iteration": 7})
    params, meta = load_checkpoint(path)
    assert meta["stage"] == "coarse"
    assert meta["adam_step"] == 0
    for name in store.names():
        assert params[name].tobytes() == store[name].tobytes()

    fresh = ParamStore(seed=99)
    Mlp(fresh, "net", [3, 5, 2])
    restore_into(fresh, params)
    for name in store.names():
        np.testing.assert_array_equal(fresh[name], store[name])
    assert len(file_digest(path)) == 64


def test_checkpoint_bytes_are_deterministic():
    store = ParamStore(seed=4)
    Mlp(store, "net", [2, 3])
    assert encode_checkpoint(store.params, {"b": 1, "a": 2}) == encode_checkpoint(store.params, {"a": 2, "b": 1})


def test_corrupt_checkpoints_rejected(tmp_path):
    store = ParamStore()
    store.add("w", (2, 2))
    blob = encode_checkpoint(store.params, {})
    with pytest.raises(CheckpointError):
        decode_checkpoint(b"NOTMAGIC" + blob[8:])
    with pytest.raises(CheckpointError):
        decode_checkpoint(blob[:-3])
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.ckpt")


def test_restore_strict_name_mismatch():
    store = ParamStore()
    store.add("a", (2,))
    with pytest.raises(CheckpointError):
        restore_into(store, {"b": np.zeros(2, dtype=np.float32)})


def test_relative_error_floor():
    assert relative_error(0.0, 0.0) == 0.0
    assert relative_error(1e-9, 0.0, floor=1e-4) < 1e-4
    assert relative_error(1.0, 1.1) == pytest.approx(0.1 / 1.1)
