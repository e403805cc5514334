"""Closed-form measures, slice coordinates, frames, and sampling laws."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finidist_lab import geometry as geo


def test_unit_ball_volumes_golden():
    assert geo.unit_ball_volume(2) == pytest.approx(math.pi, abs=1e-15)
    assert geo.unit_ball_volume(3) == pytest.approx(4.1887902047863910, abs=1e-13)
    assert geo.unit_ball_volume(4) == pytest.approx(math.pi**2 / 2, abs=1e-13)
    assert geo.sphere_area(3) == pytest.approx(4 * math.pi, abs=1e-13)
    assert geo.sphere_area(4) == pytest.approx(2 * math.pi**2, abs=1e-13)
    assert geo.sphere_area(3, r=2.0) == pytest.approx(16 * math.pi, abs=1e-12)


def test_measures_dispatch_and_bounds():
    assert geo.measures(2, "omega_n") == pytest.approx(math.pi)
    assert geo.measures(2, "slice_volume_exact", math.pi / 16, math.pi / 2) \
        == pytest.approx(6.1624556633275884, abs=1e-12)
    assert geo.measures(2, "geodesic_ball_volume", math.pi / 10) \
        == pytest.approx(0.30752097769647459, abs=1e-13)
    with pytest.raises(ValueError):
        geo.measures(9, "omega_n")
    with pytest.raises(ValueError):
        geo.measures(3, "perimeter")


@given(st.floats(0.0, math.pi), st.floats(0.0, math.pi),
       st.integers(min_value=2, max_value=5))
def test_slice_volume_exact_below_bound(a, b, n):
    lo, hi = sorted((a, b))
    exact = geo.slice_volume_exact(n, lo, hi)
    bound = geo.slice_volume_bound(n, lo, hi)
    assert 0.0 <= exact <= bound + 1e-12


def test_full_slice_is_the_sphere():
    for n in (2, 3, 4):
        assert geo.slice_volume_exact(n, 0.0, math.pi) \
            == pytest.approx(geo.sphere_area(n + 1), rel=1e-13)


def test_colatitude_is_pole_safe():
    pts = np.array([[0.0, 0.0, 1.0],
                    [1e-11, 0.0, 1.0],
                    [0.0, 1.0, 0.0],
                    [0.0, 0.0, -1.0]])
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    th = geo.colatitude(pts)
    assert th[0] == 0.0
    assert th[1] == pytest.approx(1e-11, rel=1e-6)
    assert th[2] == pytest.approx(math.pi / 2)
    assert th[3] == pytest.approx(math.pi)


def test_slice_coordinate_roundtrip():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((100, 4))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    theta, z, defined = geo.slice_coords(x)
    assert defined.all()
    back = geo.from_slice_coords(theta, z)
    np.testing.assert_allclose(back, x, atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(z, axis=1), 1.0, atol=1e-14)


def test_tangent_frames_orthonormal_and_oriented():
    rng = np.random.default_rng(1)
    for d in (2, 3, 4):
        x = rng.standard_normal((50, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        fr = geo.tangent_frames(x)
        gram = np.einsum('nij,nik->njk', fr, fr)
        np.testing.assert_allclose(gram, np.broadcast_to(np.eye(d - 1), gram.shape),
                                   atol=1e-12)
        # frame columns are perpendicular to the base point
        np.testing.assert_allclose(np.einsum('nij,ni->nj', fr, x), 0.0, atol=1e-12)
        dets = np.linalg.det(np.concatenate([fr, x[:, :, None]], axis=2))
        np.testing.assert_allclose(dets, 1.0, atol=1e-12)


@settings(max_examples=60)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.integers(0, 10**6))
def test_exp_log_roundtrip(a, b, idx):
    rng = np.random.default_rng(idx)
    q = rng.standard_normal(3)
    q /= np.linalg.norm(q)
    v = np.array([[a, b]])
    fr = geo.tangent_frame(q)
    x = geo.sphere_exp(q, v, frame=fr)
    w = geo.sphere_log(q[None, :], x)
    np.testing.assert_allclose(w @ fr, v, atol=1e-9)


def test_geodesic_distance_triangle_inequality():
    rng = np.random.default_rng(3)
    x, y, z = (rng.standard_normal((64, 3)) for _ in range(3))
    for arr in (x, y, z):
        arr /= np.linalg.norm(arr, axis=1, keepdims=True)
    dxy = geo.geodesic_distance(x, y)
    dyz = geo.geodesic_distance(y, z)
    dxz = geo.geodesic_distance(x, z)
    assert np.all(dxz <= dxy + dyz + 1e-12)


def test_rotation_to_point_moves_north():
    rng = np.random.default_rng(4)
    for d in (3, 4):
        p = rng.standard_normal(d)
        p /= np.linalg.norm(p)
        rot = geo.rotation_to_point(p)
        north = np.zeros(d)
        north[-1] = 1.0
        np.testing.assert_allclose(rot @ north, p, atol=1e-12)
        np.testing.assert_allclose(rot @ rot.T, np.eye(d), atol=1e-12)
        assert np.linalg.det(rot) == pytest.approx(1.0, abs=1e-12)


def test_region_validation():
    with pytest.raises(ValueError):
        geo.Region(kind="euclidean-ball", dim=2, center=np.zeros(2), radius=-1.0)
    with pytest.raises(ValueError):
        geo.Region(kind="latitude-slice", dim=2, alpha=1.0, beta=0.5)
    with pytest.raises(ValueError):
        geo.Region(kind="mystery", dim=2)


@pytest.mark.parametrize("law", ["measure", "coverage"])
def test_sample_region_stays_inside(law):
    regions = [
        geo.Region(kind="euclidean-ball", dim=2, center=np.array([0.5, 0.0]),
                   radius=0.4),
        geo.Region(kind="euclidean-annulus", dim=2, center=np.zeros(2),
                   radius=1.0, inner_radius=0.5),
        geo.Region(kind="geodesic-ball", dim=2,
                   center=np.array([0.0, 1.0, 0.0]), radius=0.7),
        geo.Region(kind="latitude-slice", dim=2, alpha=0.3, beta=0.9),
    ]
    for region in regions:
        pts = geo.sample_region(region, 500, seed=9, law=law)
        assert pts.shape[0] == 500
        if region.kind == "euclidean-ball":
            r = np.linalg.norm(pts - region.center, axis=1)
            assert np.all(r <= region.radius + 1e-12)
        elif region.kind == "euclidean-annulus":
            r = np.linalg.norm(pts - region.center, axis=1)
            assert np.all((r >= region.inner_radius - 1e-12)
                          & (r <= region.radius + 1e-12))
        else:
            np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
            if region.kind == "geodesic-ball":
                d = geo.geodesic_distance(pts, np.asarray(region.center)[None, :])
                assert np.all(d <= region.radius + 1e-12)
            else:
                th = geo.colatitude(pts)
                assert np.all((th >= region.alpha - 1e-12)
                              & (th <= region.beta + 1e-12))


def test_sample_region_deterministic_and_nested():
    region = geo.Region(kind="geodesic-ball", dim=2,
                        center=np.array([0.0, 0.0, 1.0]), radius=0.5)
    a = geo.sample_region(region, 256, seed=5)
    b = geo.sample_region(region, 256, seed=5)
    np.testing.assert_array_equal(a, b)
    big = geo.sample_region(region, 512, seed=5)
    np.testing.assert_array_equal(big[:256], a)


def test_coverage_law_reaches_thin_bands():
    # a band of tiny measure near the pole: coverage sampling must hit it
    region = geo.Region(kind="latitude-slice", dim=2, alpha=0.0, beta=1.0)
    pts = geo.sample_region(region, 2000, seed=0, law="coverage")
    th = geo.colatitude(pts)
    assert np.count_nonzero(th < 0.01) >= 10
