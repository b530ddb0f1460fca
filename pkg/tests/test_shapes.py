import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phkm.shapes import (
    PointCloud,
    add_uniform_noise,
    circle_from_angles,
    sample_circle,
    sample_shape,
    sample_sphere,
    sample_torus,
)


def test_circle_grid_angles_hit_axis_points():
    pts = circle_from_angles(np.arange(4) * np.pi / 2, 1.0)
    expected = np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]], dtype=float)
    assert np.allclose(pts, expected, atol=1e-15)


def test_circle_single_point_has_radius_norm():
    pc = sample_circle(1, 2.0, seed=5)
    assert len(pc) == 1
    assert np.linalg.norm(pc.points[0]) == pytest.approx(2.0, abs=1e-12)
    assert pc.points[0, 2] == 0.0


@pytest.mark.parametrize("sampler", [
    lambda s: sample_circle(50, 3.0, s),
    lambda s: sample_sphere(50, 3.0, s),
    lambda s: sample_torus(50, 3.0, 1.0, s),
])
def test_samplers_are_deterministic(sampler):
    assert sampler(11) == sampler(11)
    assert not np.array_equal(sampler(11).points, sampler(12).points)


def test_sphere_membership_and_symmetry():
    pc = sample_sphere(1000, 1.0, seed=3)
    assert np.allclose(np.linalg.norm(pc.points, axis=1), 1.0, atol=1e-12)
    assert np.all(np.abs(pc.points.mean(axis=0)) < 0.1)


def test_torus_tube_geometry():
    R, r = 3.0, 1.2
    pc = sample_torus(2000, R, r, seed=4)
    rho = np.hypot(pc.points[:, 0], pc.points[:, 1])
    assert np.all(rho >= R - r - 1e-12) and np.all(rho <= R + r + 1e-12)
    assert np.all(np.abs(pc.points[:, 2]) <= r + 1e-12)
    # area-uniform: the outer half (cos u > 0) carries more than half the mass
    outer = np.mean(rho > R)
    expected = 0.5 + r / (np.pi * R)
    assert abs(outer - expected) < 0.04


@pytest.mark.parametrize("call", [
    lambda: sample_circle(0, 1.0),
    lambda: sample_circle(3, 0.0),
    lambda: sample_sphere(3, -1.0),
    lambda: sample_torus(3, 1.0, 1.0),
    lambda: sample_torus(3, 1.0, 2.0),
    lambda: add_uniform_noise(sample_circle(3), -0.1),
    lambda: sample_shape("cube", 3, 0),
])
def test_invalid_arguments(call):
    with pytest.raises(ValueError):
        call()


def test_zero_noise_is_identity_and_keeps_label():
    pc = sample_sphere(20, 1.0, 0)
    out = add_uniform_noise(pc, 0.0, 9)
    assert out == pc and out.label == "sphere"


def test_noise_is_bit_reproducible():
    pc = sample_torus(30, 2.0, 1.0, 0)
    assert np.array_equal(add_uniform_noise(pc, 1.0, 3).points, add_uniform_noise(pc, 1.0, 3).points)


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.0, 5.0), seed=st.integers(0, 2**31), n=st.integers(1, 40))
def test_noise_support_bound(s, seed, n):
    pc = sample_circle(n, 2.0, seed)
    out = add_uniform_noise(pc, s, seed + 1)
    assert np.max(np.abs(out.points - pc.points)) <= s
    assert out.label == pc.label


@settings(max_examples=30, deadline=None)
@given(R=st.floats(0.5, 20.0), frac=st.floats(0.05, 0.95), seed=st.integers(0, 2**31))
def test_torus_support_property(R, frac, seed):
    r = frac * R
    pc = sample_torus(25, R, r, seed)
    rho = np.hypot(pc.points[:, 0], pc.points[:, 1])
    assert np.all(rho >= R - r - 1e-9) and np.all(rho <= R + r + 1e-9)
    assert np.all(np.abs(pc.points[:, 2]) <= r + 1e-9)


def test_point_cloud_rejects_bad_shapes():
    with pytest.raises(ValueError):
        PointCloud(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        PointCloud(np.zeros(3))
