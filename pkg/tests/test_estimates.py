"""Constants, oscillation sampling, and the verification reports."""

import math

import numpy as np
import pytest

from finidist_lab import estimates as est
from finidist_lab import geometry as geo
from finidist_lab import map_zoo as mz


NORTH = np.array([0.0, 0.0, 1.0])


def test_morrey_constant_golden_values():
    assert est.morrey_constant(2) == pytest.approx(1.2533141373155003, abs=1e-15)
    assert est.morrey_constant(3) == pytest.approx(2.70256769006349, abs=1e-13)
    assert est.morrey_constant(4) == pytest.approx(4.471350268287271, abs=1e-13)
    # closed form (n-1) * pi / (n * omega_n)^(1/n)
    for n in (2, 3, 4):
        want = (n - 1) * math.pi / (n * geo.unit_ball_volume(n)) ** (1.0 / n)
        assert est.morrey_constant(n) == pytest.approx(want, rel=1e-15)


def test_constants_table_sphere_target():
    table = est.constants(2, geo.unit_sphere_target(2))
    assert table.d_n == pytest.approx(math.pi)
    assert table.a_n == pytest.approx(0.0008726646259971645, rel=1e-12)
    assert table.b_n == pytest.approx(0.30752097769647485, rel=1e-12)
    assert table.six_cm_pow_n == pytest.approx(56.54866776461628, rel=1e-12)
    assert table.min_threshold == pytest.approx(table.a_n)

    t3 = est.constants(3, geo.unit_sphere_target(3))
    assert t3.a_n == pytest.approx(3.6361026083215192e-06, rel=1e-10)
    assert t3.b_n == pytest.approx(0.12733904972741522, rel=1e-10)
    t4 = est.constants(4, geo.unit_sphere_target(4))
    assert t4.a_n == pytest.approx(9.401772215639154e-09, rel=1e-10)
    assert t4.b_n == pytest.approx(0.04651315190563941, rel=1e-10)


def test_constants_euclidean_target_has_vacuous_thresholds():
    table = est.constants(2, geo.euclidean_target(2))
    assert math.isinf(table.d_n)
    assert math.isinf(table.min_threshold)


def test_constants_rejects_graph_targets():
    lg = mz.graph_embed()
    with pytest.raises(ValueError):
        est.constants(2, lg.target)


def test_oscillation_identity_ball():
    iden = mz.identity_map(2)
    region = geo.Region(kind="geodesic-ball", dim=2, center=NORTH, radius=0.4)
    sample = est.oscillation(iden, region, count=4096, seed=0)
    # geodesic diameter of the image cap is 0.8
    assert sample.diam_lower_bound == pytest.approx(0.8, abs=5e-3)
    assert sample.diam_lower_bound <= 0.8 + 1e-12
    assert sample.metric == "geodesic"
    assert sample.sample_count == 4096


def test_oscillation_monotone_in_count():
    pm = mz.power_map(3)
    region = geo.Region(kind="geodesic-ball", dim=2,
                        center=np.array([1.0, 0.0, 0.0]), radius=0.3)
    lows = [est.oscillation(pm, region, count=c, seed=1).diam_lower_bound
            for c in (64, 256, 1024)]
    assert lows[0] <= lows[1] + 1e-12
    assert lows[1] <= lows[2] + 1e-12


def test_oscillation_metric_override():
    iden = mz.identity_map(2)
    region = geo.Region(kind="latitude-slice", dim=2, alpha=0.0, beta=math.pi)
    geod = est.oscillation(iden, region, count=2048, seed=0)
    amb = est.oscillation(iden, region, count=2048, seed=0, metric="ambient")
    assert geod.diam_lower_bound == pytest.approx(math.pi, abs=1e-2)
    assert amb.diam_lower_bound == pytest.approx(2.0, abs=1e-2)


def test_blocked_diameter_matches_bruteforce():
    rng = np.random.default_rng(5)
    y = rng.standard_normal((300, 3))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    fast = est._blocked_diameter(y, "geodesic")
    slow = 0.0
    for i in range(y.shape[0]):
        d = geo.geodesic_distance(y[i][None, :], y)
        slow = max(slow, float(d.max()))
    assert fast == pytest.approx(slow, rel=1e-12)


def test_verify_morrey_scalar_cosine_oracle():
    field = est.cosine_field(1.0)
    rep = est.verify_morrey(field, np.zeros(2), 1.0, level=4, count=4096, seed=0)
    assert rep.verdict == "pass"
    assert rep.ratio == pytest.approx(0.9003163161487396, abs=1e-6)
    assert rep.details["quad_error_indicator"] < 1e-6


def test_verify_morrey_rotation_chart_ratio():
    # the chart circle has circumference 2*pi*r but the rotated image's
    # diameter is 2r, while the surface energy sees sin(r)/r tangentially
    rot = mz.rotation_map(2, seed=2)
    r = 0.7
    rep = est.verify_morrey(rot, NORTH, r, level=4, count=4096, seed=0)
    assert rep.verdict == "pass"
    want = 2 * r / (math.pi * math.sin(r))
    assert rep.ratio == pytest.approx(want, abs=2e-3)


def test_verify_morrey_fd_agrees_with_analytic():
    ss = mz.slice_stretch(0.4, 1.4)
    x = geo.from_slice_coords(np.array([0.9]), np.array([[1.0, 0.0]]))[0]
    a = est.verify_morrey(ss, x, 0.25, level=3, count=1024, seed=0, mode="analytic")
    b = est.verify_morrey(ss, x, 0.25, level=3, count=1024, seed=0, mode="fd")
    assert b.rhs == pytest.approx(a.rhs, rel=1e-6)
    assert a.verdict == b.verdict == "pass"


def test_verify_morrey_reports_surface_energy():
    pm = mz.power_map(3)
    x = geo.from_slice_coords(np.array([1.2]), np.array([[1.0, 0.0]]))[0]
    rep = est.verify_morrey(pm, x, 0.3, level=4, count=2048, seed=0)
    assert rep.verdict == "pass"
    assert rep.details["surface_energy"] > 0
    assert rep.details["quad_level"] == 4


def test_verify_osc_log_identity_closed_form():
    iden = mz.euclidean_radial_retraction(radius=5.0)  # identity on r<5
    x = np.zeros(2)
    r, R = 0.1, 0.3
    rep = est.verify_osc_log(iden, x, r, R, level=3, count=4096, seed=0)
    # lhs = (2r)^2; the right side integrates |Df|^2 = 1 over B(x, R)
    assert rep.lhs == pytest.approx((2 * r) ** 2, rel=5e-3)
    c2 = (6 * est.morrey_constant(2)) ** 2
    want_rhs = c2 / math.log(R / r) * math.pi * R**2
    assert rep.rhs == pytest.approx(want_rhs, rel=1e-6)
    assert rep.verdict == "pass"
    # euclidean target: the smallness hypothesis is vacuous
    assert all(h.ok for h in rep.hypotheses)


def test_verify_osc_log_fitted_mode():
    iden = mz.euclidean_radial_retraction(radius=5.0)
    rep = est.verify_osc_log(iden, np.zeros(2), 0.1, 0.3, constant_mode="fitted",
                             level=3, count=2048, seed=0)
    fitted = rep.details["fitted_constant"]
    assert 0 < fitted < 6 * est.morrey_constant(2)


def test_verify_osc_log_window_preconditions():
    iden = mz.euclidean_radial_retraction(radius=1.0)
    with pytest.raises(ValueError):
        est.verify_osc_log(iden, np.zeros(2), 0.3, 0.2)
    with pytest.raises(ValueError):
        # B(x, 2R) pokes out of the domain ball
        est.verify_osc_log(iden, np.array([0.8, 0.0]), 0.05, 0.3)


def test_verify_osc_log_sphere_micro_window_passes():
    rot = mz.rotation_map(2, seed=4)
    rep = est.verify_osc_log(rot, NORTH, 0.0004, 0.001, level=3, count=2048, seed=0)
    assert rep.verdict == "pass"
    assert all(h.ok for h in rep.hypotheses)


def test_verify_osc_log_sphere_macro_window_misses_hypothesis():
    # a window of visible size cannot satisfy the smallness threshold
    rot = mz.rotation_map(2, seed=4)
    rep = est.verify_osc_log(rot, NORTH, 0.05, 0.2, level=3, count=2048, seed=0)
    assert rep.verdict == "hypothesis-not-met"
    assert any(not h.ok for h in rep.hypotheses)


def test_boundary_control_sphere_example():
    pm = mz.power_map(2)
    x = geo.from_slice_coords(np.array([1.1]), np.array([[1.0, 0.0]]))[0]
    ball = geo.Region(kind="geodesic-ball", dim=2, center=x, radius=0.06)
    rep = est.verify_boundary_control(pm, ball, level=3, count=2048, seed=0)
    assert rep.verdict == "pass"
    assert rep.lhs <= 6 * rep.details["osc_boundary"] * (1 + 1e-3)


def test_boundary_control_counterexample_ball_fails_hypothesis():
    ce = mz.counterexample_map(6)
    theta2 = mz.counterexample_schedule(2)[2]
    ball = geo.Region(kind="geodesic-ball", dim=2, center=NORTH, radius=theta2)
    rep = est.verify_boundary_control(ce, ball, level=3, count=4096, seed=0)
    assert rep.verdict == "hypothesis-not-met"
    failed = [h for h in rep.hypotheses if not h.ok]
    assert failed and failed[0].name == "jacobian-mass-fits-shell"
    # the ball oscillation itself is huge even though the boundary is quiet
    assert rep.lhs > 1.99


def test_boundary_control_euclidean_mode():
    rs = mz.radial_stretch(0.5)
    ball = geo.Region(kind="euclidean-ball", dim=2, center=np.zeros(2),
                      radius=0.5)
    rep = est.verify_boundary_control(rs, ball, mode="euclidean-2x",
                                      level=3, count=2048, seed=0)
    assert rep.verdict == "pass"
    assert rep.rhs == pytest.approx(2 * rep.details["osc_boundary"], rel=1e-12)


def test_degree_power_maps():
    for k in (1, 2, 4):
        d = est.degree(mz.power_map(k), level=4)
        assert d.nearest == k
        assert d.residual < 1e-9
    cap = est.degree(mz.cap_profile(c=1.0), level=4)
    assert cap.nearest == 0
    assert cap.residual < 1e-9


def test_degree_requires_equidimensional_sphere_map():
    with pytest.raises(ValueError):
        est.degree(mz.loglog_scalar())
    with pytest.raises(ValueError):
        est.degree(mz.radial_stretch(0.5))


def test_jacobian_match_stretch_vs_identity():
    ball = geo.Region(kind="euclidean-ball", dim=2, center=np.zeros(2),
                      radius=1.0)
    iden = mz.euclidean_radial_retraction(radius=2.0)
    rep = est.jacobian_integral_match(mz.radial_stretch(0.5), iden, ball, level=4)
    assert rep.verdict == "pass"
    assert rep.lhs <= 1e-3 * math.pi


def test_jacobian_match_rejects_boundary_mismatch():
    ball = geo.Region(kind="euclidean-ball", dim=2, center=np.zeros(2),
                      radius=0.8)
    iden = mz.euclidean_radial_retraction(radius=2.0)
    with pytest.raises(ValueError):
        # the stretch moves the circle r=0.8, the identity does not
        est.jacobian_integral_match(mz.radial_stretch(0.5), iden, ball)


def test_jacobian_match_flags_engineered_defect():
    # same boundary trace, different interior mass: must fail, not error
    ball = geo.Region(kind="euclidean-ball", dim=2, center=np.zeros(2),
                      radius=1.0)
    iden = mz.euclidean_radial_retraction(radius=2.0)
    flat = mz.composed(mz.euclidean_radial_retraction(2, radius=1.0),
                       mz.inversion(1.0))
    rep = est.jacobian_integral_match(iden, flat, ball, level=3)
    assert rep.verdict == "fail"
    assert rep.details["jacobian_f"] == pytest.approx(math.pi, rel=1e-6)
    assert abs(rep.details["jacobian_g"]) < 1e-3


def test_counterexample_audit_slice_identities():
    audit = est.counterexample_audit(n=2, k_max=4, level=3, count=2048, seed=0)
    assert len(audit.slices) == 4
    for row in audit.slices:
        assert row.jacobian_integral == pytest.approx(4 * math.pi, rel=1e-2)
        assert row.volume_exact <= row.volume_bound * (1 + 1e-12)
        if row.k >= 2:
            assert row.oscillation_inner >= 1.99
    # cumulative columns are running sums
    cum_e = 0.0
    for row in audit.slices:
        cum_e += row.energy_n
        assert row.cumulative_energy == pytest.approx(cum_e, rel=1e-12)
    assert audit.total_energy == pytest.approx(audit.slices[-1].cumulative_energy)
    assert audit.sphere_volume == pytest.approx(4 * math.pi, rel=1e-12)


def test_counterexample_energy_grows_without_bound():
    short = est.counterexample_audit(n=2, k_max=3, level=3, count=512, seed=0)
    longer = est.counterexample_audit(n=2, k_max=5, level=3, count=512, seed=0)
    assert longer.total_energy > short.total_energy * 1.5
    assert longer.total_orlicz > short.total_orlicz


def test_extremal_search_families():
    cos_res = est.morrey_extremal_search("cosine", budget=20, level=4,
                                         count=2048, seed=0)
    assert cos_res.best_ratio == pytest.approx(0.90, abs=0.02)
    assert cos_res.best_ratio < 1.0
    const_res = est.morrey_extremal_search("constant", budget=8, level=3,
                                           count=512, seed=0)
    assert const_res.best_ratio == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ValueError):
        est.morrey_extremal_search("fourier")


def test_extremal_search_cap_bump_stays_below_one():
    res = est.morrey_extremal_search("cap-bump", budget=30, level=4,
                                     count=2048, seed=0)
    assert 0.85 < res.best_ratio < 1.0
    assert res.evaluations <= 40


def test_scalar_field_construction_guards():
    with pytest.raises(ValueError):
        est.cap_bump_field(-0.1, 0.5)
    with pytest.raises(ValueError):
        est.cap_bump_field(2.0, 2.0)  # plateau + ramp exceeds pi
    field = est.cap_bump_field(0.3, 0.8)
    rep = est.verify_morrey(field, np.zeros(2), 1.0, level=3, count=512, seed=0)
    assert rep.verdict == "pass"


def test_constant_field_has_zero_oscillation():
    field = est.constant_field(0.7)
    rep = est.verify_morrey(field, np.zeros(2), 1.0, level=3, count=512, seed=0)
    assert rep.lhs == 0.0
    assert rep.verdict == "pass"


def test_morrey_corpus_shape():
    cases = est.morrey_corpus(seed=0, spheres_per_map=2)
    maps = {case.mapfield.label for case in cases}
    assert len(maps) == 50
    assert len(cases) == 100
    for case in cases:
        assert case.radius > 0


def test_osc_log_corpus_shape():
    cases = est.osc_log_corpus(seed=0, windows_per_map=4)
    assert len(cases) == 12
    assert sum(len(c.windows) for c in cases) == 48
    for case in cases:
        for x, r, big in case.windows:
            assert 0 < r < big
