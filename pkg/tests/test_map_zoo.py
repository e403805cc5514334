"""Map families: spot values, glue continuity, singular bookkeeping."""

import math

import numpy as np
import pytest

from finidist_lab import map_zoo as mz
from finidist_lab.geometry import geodesic_distance


NORTH = np.array([[0.0, 0.0, 1.0]])


def sphere_point(theta, phi):
    return np.array([[math.sin(theta) * math.cos(phi),
                      math.sin(theta) * math.sin(phi),
                      math.cos(theta)]])


def test_identity_and_rotation():
    iden = mz.identity_map(2)
    pts = sphere_point(0.8, 1.3)
    np.testing.assert_allclose(iden.evaluate(pts), pts, atol=1e-15)

    rot = mz.rotation_map(2, seed=11)
    q = np.asarray(rot.params["matrix"])
    np.testing.assert_allclose(q @ q.T, np.eye(3), atol=1e-12)
    np.testing.assert_allclose(rot.evaluate(pts), pts @ q.T, atol=1e-14)


def test_power_map_multiplies_longitude():
    pm = mz.power_map(3)
    theta = 1.1
    got = pm.evaluate(sphere_point(theta, 0.4))
    np.testing.assert_allclose(got, sphere_point(theta, 1.2), atol=1e-14)
    # poles are fixed
    np.testing.assert_allclose(pm.evaluate(NORTH), NORTH, atol=1e-15)
    assert pm.is_finite_distortion


def test_power_map_rejects_zero():
    with pytest.raises(ValueError):
        mz.power_map(0)


def test_mobius_is_conformal_and_analytic():
    mo = mz.mobius(0.3 + 0.2j)
    assert mo.is_finite_distortion and mo.has_analytic_differential
    pts = sphere_point(2.0, 0.7)
    img = mo.evaluate(pts)
    np.testing.assert_allclose(np.linalg.norm(img, axis=1), 1.0, atol=1e-12)
    # conformal: restricted singular values agree
    from finidist_lab import calculus

    data = calculus.pointwise_data(mo, pts)
    assert data.distortion[0] == pytest.approx(1.0, abs=1e-10)


def test_slice_stretch_edges_and_domain():
    alpha, beta = 0.3, 1.2
    ss = mz.slice_stretch(alpha, beta)
    # the slice edges land on the poles and the map is onto the sphere
    np.testing.assert_allclose(ss.evaluate(sphere_point(alpha, 0.5)),
                               NORTH, atol=1e-12)
    south = np.array([[0.0, 0.0, -1.0]])
    np.testing.assert_allclose(ss.evaluate(sphere_point(beta, 0.5)),
                               south, atol=1e-12)
    mid = ss.evaluate(sphere_point(0.5 * (alpha + beta), 0.5))
    assert abs(mid[0, 2]) < 1e-12  # midline hits the equator
    # the domain is the slice itself
    with pytest.raises(ValueError):
        ss.evaluate(sphere_point(0.1, 0.5))
    assert ss.domain.slice_bounds == (alpha, beta)


def test_slice_stretch_reflected_reverses_colatitude():
    alpha, beta = 0.3, 1.2
    sr = mz.slice_stretch_reflected(alpha, beta)
    mid = 0.5 * (alpha + beta)
    # the colatitude runs backwards: alpha lands on south, beta on north
    south = np.array([[0.0, 0.0, -1.0]])
    np.testing.assert_allclose(sr.evaluate(sphere_point(alpha, 0.9)),
                               south, atol=1e-12)
    np.testing.assert_allclose(sr.evaluate(sphere_point(beta, 0.9)),
                               NORTH, atol=1e-12)
    a = sr.evaluate(sphere_point(mid - 0.2, 0.9))
    b = sr.evaluate(sphere_point(mid + 0.2, 0.9))
    np.testing.assert_allclose(a[:, :2], b[:, :2], atol=1e-12)
    assert a[0, 2] == pytest.approx(-b[0, 2], abs=1e-12)
    # a longitude reflection rides along, so orientation survives
    assert sr.is_finite_distortion
    ss = mz.slice_stretch(alpha, beta)
    plain = ss.evaluate(sphere_point(mid - 0.2, 0.9))
    assert a[0, 0] == pytest.approx(-plain[0, 0], abs=1e-12)
    assert a[0, 1] == pytest.approx(plain[0, 1], abs=1e-12)
    assert a[0, 2] == pytest.approx(-plain[0, 2], abs=1e-12)


def test_radial_stretch_profile():
    rs = mz.radial_stretch(0.5)
    x = np.array([[0.36, 0.0], [0.0, 0.04]])
    got = rs.evaluate(x)
    np.testing.assert_allclose(got, [[0.6, 0.0], [0.0, 0.2]], atol=1e-14)


def test_cap_profile_misses_the_lower_sphere():
    # colatitude follows c*sin(theta): both poles land on north and the
    # image never leaves the cap theta <= c
    cap = mz.cap_profile(c=0.9)
    np.testing.assert_allclose(cap.evaluate(NORTH), NORTH, atol=1e-14)
    south = np.array([[0.0, 0.0, -1.0]])
    np.testing.assert_allclose(cap.evaluate(south), NORTH, atol=1e-12)
    thetas = np.linspace(0.0, math.pi, 41)
    pts = np.stack([np.sin(thetas) * math.cos(0.2),
                    np.sin(thetas) * math.sin(0.2),
                    np.cos(thetas)], axis=1)
    img = cap.evaluate(pts)
    assert np.all(np.arccos(np.clip(img[:, 2], -1, 1)) <= 0.9 + 1e-12)
    with pytest.raises(ValueError):
        mz.cap_profile(c=2.0)


def test_loglog_scalar_values_and_domain_guard():
    lg = mz.loglog_scalar()
    r = 0.05
    got = lg.evaluate(np.array([[r, 0.0]]))
    assert got[0, 0] == pytest.approx(math.log(abs(math.log(r))), abs=1e-13)
    with pytest.raises(ValueError):
        lg.evaluate(np.array([[0.0, 0.0]]))
    with pytest.raises(ValueError):
        lg.evaluate(np.array([[1.0, 0.0]]))
    assert lg.domain.radius == pytest.approx(math.exp(-2.0))


def test_graph_embed_lifts_the_scalar():
    ge = mz.graph_embed()
    lg = mz.loglog_scalar()
    x = np.array([[0.05, 0.01]])
    got = ge.evaluate(x)
    np.testing.assert_allclose(got[:, :2], x, atol=1e-15)
    assert got[0, 2] == pytest.approx(lg.evaluate(x)[0, 0], abs=1e-14)


def test_inversion_reverses_orientation():
    inv = mz.inversion(0.5)
    x = np.array([[0.3, 0.4]])
    np.testing.assert_allclose(inv.evaluate(x), x, atol=1e-15)  # fixed circle
    from finidist_lab import calculus

    far = np.array([[0.8, 0.1]])
    d = calculus.differential(inv, far)
    assert calculus.jacobian_det(d)[0] < 0.0
    assert not inv.is_finite_distortion


def test_dense_singularities_bumps_sit_on_shells():
    ds = mz.dense_singularities()
    assert len(ds.singular.shells) == 5
    for center, rad in ds.singular.shells:
        assert rad == pytest.approx(0.12)
        # the scalar bump vanishes at its edge and blows up bookkeeping-wise
        # at the center, which refuses evaluation
        edge = np.asarray(center) + np.array([rad, 0.0])
        assert ds.evaluate(edge[None, :])[0, 0] == pytest.approx(0.0, abs=1e-12)
        near = np.asarray(center) + np.array([1e-3, 0.0])
        assert ds.evaluate(near[None, :])[0, 0] > 0.0
        with pytest.raises(ValueError):
            ds.evaluate(np.asarray(center)[None, :])


def test_euclidean_radial_retraction_clamps():
    er = mz.euclidean_radial_retraction(radius=0.5)
    inside = np.array([[0.2, 0.0]])
    outside = np.array([[0.8, 0.0], [0.0, -0.9]])
    np.testing.assert_allclose(er.evaluate(inside), inside, atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(er.evaluate(outside), axis=1),
                               0.5, atol=1e-14)


def test_composed_pair_and_label():
    er = mz.euclidean_radial_retraction(radius=0.5)
    co = mz.composed(er, er)
    assert co.family == "composed"
    assert not co.has_analytic_differential
    x = np.array([[0.7, 0.2]])
    np.testing.assert_allclose(co.evaluate(x), er.evaluate(x), atol=1e-14)


def test_counterexample_schedule_and_slices():
    sched = mz.counterexample_schedule(4)
    assert sched[0] == pytest.approx(math.pi)
    for k, theta in enumerate(sched):
        assert theta == pytest.approx(2.0 ** (-k * k) * math.pi, rel=1e-15)
    ce = mz.counterexample_map(4)
    assert len(ce.singular.latitudes) == 5
    # poles both land somewhere on the sphere; image stays on the sphere
    pts = np.concatenate([sphere_point(t, 0.3) for t in (0.01, 0.3, 1.0, 2.5)])
    img = ce.evaluate(pts)
    np.testing.assert_allclose(np.linalg.norm(img, axis=1), 1.0, atol=1e-12)


def test_counterexample_slice_edges_hit_poles():
    ce = mz.counterexample_map(6)
    sched = mz.counterexample_schedule(7)
    # each slice edge theta_k maps to a pole, alternating as k runs
    for theta in sched[1:6]:
        img = ce.evaluate(sphere_point(theta, 1.0))
        assert abs(abs(img[0, 2]) - 1.0) < 1e-9


def test_counterexample_oscillates_near_north():
    ce = mz.counterexample_map(6)
    sched = mz.counterexample_schedule(7)
    # pick interior points of two consecutive slices very close to north:
    # their images are far apart, witnessing oscillation that never settles
    t4 = math.sqrt(sched[4] * sched[5])
    t5 = math.sqrt(sched[5] * sched[6])
    a = ce.evaluate(sphere_point(t4, 0.0))
    b = ce.evaluate(sphere_point(t5, 0.0))
    assert geodesic_distance(a, b)[0] > 1.0


def test_make_map_factory_round_trip():
    m = mz.make_map("power", k=2)
    assert m.family == "power" and m.params["k"] == 2
    m2 = mz.make_map("slice_stretch", alpha=0.2, beta=0.9)
    assert m2.params["beta"] == 0.9
    with pytest.raises(ValueError):
        mz.make_map("teleport")


def test_orlicz_density_shape():
    t = np.array([0.0, 1.0, math.e, 10.0])
    got = mz.orlicz_density(t, 2)
    assert got[0] == 0.0
    assert got[2] == pytest.approx(math.e**2 / math.log(2 * math.e), rel=1e-13)
    assert np.all(np.diff(got) > 0)


def test_derivative_bound_check_slice_family():
    ss = mz.slice_stretch(math.pi / 16, math.pi / 2)
    rep = mz.derivative_bound_check(ss, samples=10000, seed=0)
    assert rep.fitted_constant <= 4.0
    ((k, reference, observed, ratio),) = rep.per_slice
    assert k == 1
    assert reference == pytest.approx(1.0 / math.sin(math.pi / 16), rel=1e-12)
    assert ratio == pytest.approx(observed / reference, rel=1e-12)
    with pytest.raises(ValueError):
        mz.derivative_bound_check(mz.power_map(2))


def test_counterexample_derivative_bound():
    ce = mz.counterexample_map(5)
    rep = mz.derivative_bound_check(ce, samples=2000, seed=1)
    assert rep.fitted_constant <= 4.0
    assert len(rep.per_slice) == 5
    for k, reference, observed, ratio in rep.per_slice:
        assert reference == pytest.approx(2.0 ** ((k - 1) ** 2), rel=1e-12)
        assert ratio == pytest.approx(observed / reference, rel=1e-12)
