# -*- coding: utf-8 -*-
"""
Tests for cameras, ray generation, stratified sampling, compositing and image rendering.
"""

import numpy as np
import pytest

from src.exceptions import DomainError, NumericError, RenderError, ShapeError
from src.field import FieldOutput
from src.nn.gradcheck import max_gradient_error
from src.render import (
    Camera,
    RaySamples,
    composite,
    composite_backward,
    generate_ray,
    generate_rays,
    intersect_unit_cube,
    render_image,
    render_rays,
    segment_lengths,
    stratified_sample,
    stratified_samples,
)


def make_camera(size=8, focal=None, translation=(0.5, 0.5, 3.0)):
    focal = 2.0 * size if focal is None else focal
    return Camera(focal, focal, size / 2, size / 2, np.eye(3), np.array(translation), size, size)


def constant_field(sigma, color):
    def field_fn(x, d):
        n = x.shape[0]
        return FieldOutput(np.tile(np.asarray(color, dtype=float), (n, 1)), np.full(n, float(sigma)))

    return field_fn


# --- camera and rays ---


def test_camera_validation():
    with pytest.raises(DomainError):
        Camera(0.0, 1.0, 0.5, 0.5, np.eye(3), np.zeros(3), 1, 1)
    with pytest.raises(DomainError):
        Camera(1.0, 1.0, 0.5, 0.5, 2 * np.eye(3), np.zeros(3), 1, 1)
    with pytest.raises(DomainError):
        Camera(1.0, 1.0, 0.5, 0.5, np.eye(3), np.zeros(3), 0, 1)


def test_camera_dict_round_trip():
    cam = make_camera()
    back = Camera.from_dict(cam.to_dict(), cam.width, cam.height)
    np.testing.assert_array_equal(back.rotation, cam.rotation)
    np.testing.assert_array_equal(back.translation, cam.translation)
    assert back.fx == cam.fx


def test_center_ray_looks_down_negative_z():
    cam = Camera(1.0, 1.0, 0.5, 0.5, np.eye(3), np.array([0.5, 0.5, 3.0]), 1, 1)
    ray = generate_ray(cam, 0, 0)
    np.testing.assert_allclose(ray.direction, [0.0, 0.0, -1.0])
    assert ray.hit
    assert ray.t_near == pytest.approx(2.0)
    assert ray.t_far == pytest.approx(3.0)
    assert ray.pixel == (0, 0)


def test_ray_directions_are_unit_and_row_major():
    cam = make_camera(size=4)
    rays = generate_rays(cam)
    assert len(rays) == 16
    np.testing.assert_allclose(np.linalg.norm(rays.directions, axis=1), 1.0)
    np.testing.assert_array_equal(rays.pixels[:5], [[0, 0], [1, 0], [2, 0], [3, 0], [0, 1]])


def test_missed_rays_have_empty_interval():
    near, far, hit = intersect_unit_cube(np.array([[5.0, 5.0, 3.0]]), np.array([[0.0, 0.0, -1.0]]))
    assert not hit[0]
    assert near[0] == far[0] == 0.0


def test_origin_inside_cube_starts_at_zero():
    near, far, hit = intersect_unit_cube(np.array([[0.5, 0.5, 0.5]]), np.array([[1.0, 0.0, 0.0]]))
    assert hit[0]
    assert near[0] == 0.0
    assert far[0] == pytest.approx(0.5)


def test_pixels_outside_image_rejected():
    cam = make_camera(size=4)
    with pytest.raises(DomainError):
        generate_rays(cam, np.array([[4, 0]]))
    with pytest.raises(ShapeError):
        generate_rays(cam, np.array([1, 2, 3]))


def test_projection_inverts_ray_generation():
    cam = make_camera(size=8)
    rays = generate_rays(cam, np.array([[2, 5], [7, 0]]))
    points = rays.origins + 2.5 * rays.directions
    np.testing.assert_allclose(cam.project(points), [[2.5, 5.5], [7.5, 0.5]], atol=1e-9)


def test_projection_behind_camera_rejected():
    with pytest.raises(DomainError):
        make_camera().project(np.array([0.5, 0.5, 4.0]))


# --- sampling ---


def test_midpoint_samples_without_jitter():
    t = stratified_samples(np.array([2.0]), np.array([3.0]), 4, jitter=False)
    np.testing.assert_allclose(t[0], [2.125, 2.375, 2.625, 2.875])


def test_jittered_samples_stay_in_their_bins(rng):
    t = stratified_samples(np.zeros(50), np.full(50, 2.0), 8, jitter=True, seed=rng)
    bins = np.floor(t / 0.25)
    np.testing.assert_array_equal(bins, np.tile(np.arange(8), (50, 1)))
    assert np.all(np.diff(t, axis=1) > 0)


def test_sampling_is_seeded():
    a = stratified_samples(np.zeros(3), np.ones(3), 5, seed=11)
    b = stratified_samples(np.zeros(3), np.ones(3), 5, seed=11)
    np.testing.assert_array_equal(a, b)


def test_sampling_domain_errors():
    with pytest.raises(DomainError):
        stratified_samples(np.zeros(1), np.ones(1), 1)
    with pytest.raises(DomainError):
        stratified_samples(np.ones(1), np.zeros(1), 4)


def test_single_ray_sampling():
    cam = Camera(1.0, 1.0, 0.5, 0.5, np.eye(3), np.array([0.5, 0.5, 3.0]), 1, 1)
    t = stratified_sample(generate_ray(cam, 0, 0), 2, jitter=False)
    np.testing.assert_allclose(t, [2.25, 2.75])


def test_segment_lengths_last_reaches_far():
    deltas = segment_lengths(np.array([[0.1, 0.4, 0.8]]), np.array([1.0]))
    np.testing.assert_allclose(deltas, [[0.3, 0.4, 0.2]])


# --- compositing ---


def _homogeneous_red(n):
    t = stratified_samples(np.zeros(1), np.ones(1), n, jitter=False)
    deltas = segment_lengths(t, np.ones(1))
    color = np.tile([1.0, 0.0, 0.0], (1, n, 1))
    out = composite(RaySamples(t, deltas, np.full((1, n), 2.0), color), background=(0.0, 0.0, 0.0))
    return out.rgb[0]


def test_homogeneous_medium_closed_form():
    exact = 1.0 - np.exp(-2.0)
    rgb = _homogeneous_red(512)
    assert abs(rgb[0] - exact) < 2e-3
    np.testing.assert_allclose(rgb[1:], 0.0)

    err_512 = abs(_homogeneous_red(512)[0] - exact)
    err_1024 = abs(_homogeneous_red(1024)[0] - exact)
    assert err_512 / err_1024 == pytest.approx(2.0, rel=0.2)


def test_split_segment_invariance(rng):
    n = 6
    t = np.sort(rng.uniform(0.0, 1.0, n))
    deltas = segment_lengths(t[None], np.array([1.2]))[0]
    sigma = rng.uniform(0.0, 4.0, n)
    color = rng.uniform(0.0, 1.0, (n, 3))
    whole = composite(RaySamples(t, deltas, sigma, color), background=(0.3, 0.6, 0.9))

    for k in range(n):
        frac = rng.uniform(0.2, 0.8)
        split_t = np.insert(t, k + 1, t[k] + frac * deltas[k])
        split_deltas = np.insert(deltas, k, frac * deltas[k])
        split_deltas[k + 1] = (1.0 - frac) * deltas[k]
        split_sigma = np.insert(sigma, k, sigma[k])
        split_color = np.insert(color, k, color[k], axis=0)
        parts = composite(RaySamples(split_t, split_deltas, split_sigma, split_color), background=(0.3, 0.6, 0.9))
        np.testing.assert_allclose(parts.rgb, whole.rgb, atol=1e-6)
        assert parts.opacity == pytest.approx(whole.opacity, abs=1e-6)


def test_empty_space_shows_background():
    samples = RaySamples(np.zeros(4), np.full(4, 0.25), np.zeros(4), np.zeros((4, 3)))
    out = composite(samples, background=(0.2, 0.4, 0.6))
    np.testing.assert_allclose(out.rgb, [0.2, 0.4, 0.6])
    assert out.opacity == 0.0


def test_opaque_first_sample_dominates():
    color = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    samples = RaySamples(np.zeros(2), np.ones(2), np.array([1e4, 1.0]), color)
    out = composite(samples)
    np.testing.assert_allclose(out.rgb, [1.0, 0.0, 0.0], atol=1e-12)
    assert out.opacity == pytest.approx(1.0)


def test_two_sample_hand_computation():
    color = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    samples = RaySamples(np.zeros(2), np.full(2, 0.5), np.ones(2), color)
    out = composite(samples, background=(1.0, 1.0, 1.0))
    a = 1 - np.exp(-0.5)
    w0, w1, tf = a, np.exp(-0.5) * a, np.exp(-1.0)
    np.testing.assert_allclose(out.rgb, [w0 + tf, w1 + tf, tf])
    np.testing.assert_allclose(out.weights, [w0, w1])
    np.testing.assert_allclose(out.transmittance, [1.0, np.exp(-0.5), tf])


def test_weights_and_final_transmittance_sum_to_one(rng):
    samples = RaySamples(
        np.zeros((5, 6)), rng.uniform(0.01, 0.2, size=(5, 6)), rng.uniform(0, 20, size=(5, 6)), rng.uniform(size=(5, 6, 3))
    )
    out = composite(samples)
    np.testing.assert_allclose(out.weights.sum(axis=1) + out.transmittance[:, -1], 1.0)
    assert np.all((out.opacity >= 0) & (out.opacity <= 1))
    assert np.all(np.diff(out.transmittance, axis=1) <= 0)


def test_non_finite_density_reports_location():
    sigma = np.array([[0.0, 0.0], [1.0, np.nan]])
    samples = RaySamples(np.zeros((2, 2)), np.ones((2, 2)), sigma, np.zeros((2, 2, 3)))
    with pytest.raises(NumericError) as exc:
        composite(samples)
    assert exc.value.location == (1, 1)


def test_composite_shape_mismatch():
    with pytest.raises(ShapeError):
        composite(RaySamples(np.zeros(3), np.ones(3), np.ones(3), np.zeros((2, 3))))


def test_composite_backward_matches_finite_differences(rng):
    n, k = 3, 5
    sigma = rng.uniform(0.0, 5.0, size=(n, k))
    color = rng.uniform(size=(n, k, 3))
    deltas = rng.uniform(0.05, 0.3, size=(n, k))
    g_rgb = rng.normal(size=(n, 3))
    g_opacity = rng.normal(size=n)
    bg = (0.3, 0.6, 0.9)

    def loss():
        out = composite(RaySamples(np.zeros((n, k)), deltas, sigma, color), bg)
        return float(np.sum(out.rgb * g_rgb) + np.sum(out.opacity * g_opacity))

    samples = RaySamples(np.zeros((n, k)), deltas, sigma, color)
    g_sigma, g_color = composite_backward(samples, composite(samples, bg), g_rgb, bg, g_opacity)
    assert max_gradient_error(loss, sigma, g_sigma, points=50, rng=rng, eps=1e-6) < 1e-5
    assert max_gradient_error(loss, color, g_color, points=50, rng=rng, eps=1e-6) < 1e-5


# --- render_rays / render_image ---


def test_constant_medium_opacity():
    cam = Camera(1.0, 1.0, 0.5, 0.5, np.eye(3), np.array([0.5, 0.5, 3.0]), 1, 1)
    rays = generate_rays(cam)
    out = render_rays(constant_field(2.0, (1.0, 0.0, 0.0)), rays, 4, jitter=False, background=(0.0, 0.0, 0.0))
    # 第一个采样点在 t=2.125，之后的路径长度为 0.875
    expected = 1.0 - np.exp(-2.0 * 0.875)
    assert out.opacity[0] == pytest.approx(expected)
    np.testing.assert_allclose(out.rgb[0], [expected, 0.0, 0.0])


def test_missed_rays_get_background():
    cam = make_camera(size=8, translation=(5.0, 5.0, 3.0))
    rays = generate_rays(cam)
    out = render_rays(constant_field(1.0, (0.0, 0.0, 0.0)), rays, 4, background=(0.1, 0.2, 0.3))
    assert out.hit_index.size == 0
    np.testing.assert_allclose(out.rgb, np.tile([0.1, 0.2, 0.3], (64, 1)))
    assert np.all(out.opacity == 0)


def test_render_image_shape_and_range():
    image = render_image(make_camera(size=6), constant_field(3.0, (0.2, 0.5, 0.8)), n_samples=8)
    assert image.shape == (6, 6, 3)
    assert np.all((image >= 0) & (image <= 1))


def test_render_image_independent_of_workers():
    cam = make_camera(size=8)
    field_fn = constant_field(1.5, (0.9, 0.1, 0.4))
    one = render_image(cam, field_fn, n_samples=8, seed=3, chunk_rays=10, workers=1, jitter=True)
    many = render_image(cam, field_fn, n_samples=8, seed=3, chunk_rays=10, workers=4, jitter=True)
    np.testing.assert_array_equal(one, many)


def test_render_failure_names_pixel():
    cam = make_camera(size=4)

    def broken(x, d):
        return FieldOutput(np.zeros((x.shape[0], 3)), np.full(x.shape[0], np.nan))

    with pytest.raises(RenderError) as exc:
        render_image(cam, broken, n_samples=4)
    px, py = exc.value.pixel
    assert 0 <= px < 4 and 0 <= py < 4
