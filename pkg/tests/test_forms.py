"""Hodge star, SD/ASD splitting, composition algebra, d and delta,
and the correspondence between J-invariant tensors and ASD forms."""
import math

import numpy as np
import pytest

from emverify.chart import CallableMetricOracle, FlatOracle, curvature, norm_covector
from emverify.errors import NotJInvariant
from emverify.forms import (
    SIX_PAIRS,
    CallableTwoFormField,
    ConstantTwoFormField,
    Orientation,
    TwoForm,
    asd_from_jinvariant,
    codifferential,
    codifferential_two_ways,
    compose,
    exterior_derivative,
    exterior_derivative_from_jet,
    hodge_star,
    inner,
    jinvariance_residual,
    norm,
    sd_asd_split,
    star_field_jet,
    three_form_norm,
)

FLAT = np.eye(4)
ORIENT = Orientation()


def random_forms(rng, n):
    return TwoForm(rng.uniform(-1.0, 1.0, size=(n, 6)))


def random_spd_metrics(rng, n):
    a = rng.uniform(-0.5, 0.5, size=(n, 4, 4))
    return np.eye(4) + 0.5 * (a + np.swapaxes(a, -1, -2)) + np.eye(4) * 1.0


def test_star_flat_basis():
    f = TwoForm(np.array([1.0, 0, 0, 0, 0, 0]))  # dx0^dx1
    s = hodge_star(FLAT, ORIENT, f)
    expected = np.zeros(6)
    expected[SIX_PAIRS.index((2, 3))] = 1.0
    assert np.allclose(s.six, expected, atol=1e-15)


def test_star_involution_random(rng):
    g = random_spd_metrics(rng, 200)
    f = random_forms(rng, 200)
    ss = hodge_star(g, ORIENT, hodge_star(g, ORIENT, f))
    assert np.max(np.abs(ss.six - f.six)) < 1e-12


def test_orientation_from_order():
    assert Orientation.from_order((0, 1, 2, 3)).sign == 1
    assert Orientation.from_order((1, 0, 2, 3)).sign == -1
    with pytest.raises(ValueError):
        Orientation.from_order((0, 0, 1, 2))


def test_kahler_form_self_dual_on_family(chart12, rng):
    pts = chart12.interior_points(rng, 25)
    gj = chart12.g_oracle.jet(pts)
    om = chart12.omega.value(pts)
    assert np.max(np.abs(hodge_star(gj, ORIENT, om).six - om.six)) < 1e-13
    # reversing orientation makes it anti-self-dual instead
    rev = Orientation(sign=-1)
    assert np.max(np.abs(hodge_star(gj, rev, om).six + om.six)) < 1e-13


def test_kahler_form_norm(chart12, rng):
    pts = chart12.interior_points(rng, 25)
    gj = chart12.g_oracle.jet(pts)
    hj = chart12.h_oracle.jet(pts)
    om = chart12.omega.value(pts)
    assert np.max(np.abs(norm(om, gj) - math.sqrt(2.0))) < 1e-12
    t = pts[..., 0]
    assert np.max(np.abs(norm(om, hj) - math.sqrt(2.0) * t**2)) < 1e-12


def test_split_properties(rng):
    g = random_spd_metrics(rng, 300)
    f = random_forms(rng, 300)
    fp, fm = sd_asd_split(g, ORIENT, f)
    assert np.max(np.abs(fp.six + fm.six - f.six)) < 1e-13
    assert np.max(np.abs(hodge_star(g, ORIENT, fp).six - fp.six)) < 1e-12
    assert np.max(np.abs(hodge_star(g, ORIENT, fm).six + fm.six)) < 1e-12
    assert np.max(np.abs(inner(fp, fm, g))) < 1e-12


def test_split_of_self_dual_form_is_identity(chart12, rng):
    pts = chart12.interior_points(rng, 10)
    gj = chart12.g_oracle.jet(pts)
    om = chart12.omega.value(pts)
    fp, fm = sd_asd_split(gj, ORIENT, om)
    assert np.max(np.abs(fp.six - om.six)) < 1e-13
    assert np.max(np.abs(fm.six)) < 1e-13


def test_split_dt_dtheta(chart12, rng):
    pts = chart12.interior_points(rng, 10)
    gj = chart12.g_oracle.jet(pts)
    f = ConstantTwoFormField([1.0, 0, 0, 0, 0, 0]).value(pts)
    fp, _ = sd_asd_split(gj, ORIENT, f)
    assert np.max(np.abs(hodge_star(gj, ORIENT, fp).six - fp.six)) < 1e-12


def test_split_conformal_invariance(rng):
    g = random_spd_metrics(rng, 200)
    f = random_forms(rng, 200)
    scale = rng.uniform(0.3, 3.0, size=200)
    fp1, fm1 = sd_asd_split(g, ORIENT, f)
    fp2, fm2 = sd_asd_split(scale[:, None, None] ** -2.0 * g, ORIENT, f)
    assert np.max(np.abs(fp1.six - fp2.six)) < 1e-12
    assert np.max(np.abs(fm1.six - fm2.six)) < 1e-12


def test_compose_self_dual_metric_multiple(rng):
    g = random_spd_metrics(rng, 250)
    fp, _ = sd_asd_split(g, ORIENT, random_forms(rng, 250))
    ginv = np.linalg.inv(g)
    co = compose(fp, fp, g)
    # F o F = -(1/4) (F_ab F^ab) g, i.e. -(1/2) |F|^2 g with |F|^2 = F_ab F^ab / 2
    full = np.einsum("...ab,...cd,...ac,...bd->...", fp.mat, fp.mat, ginv, ginv)
    assert np.max(np.abs(co + 0.25 * full[..., None, None] * g)) < 1e-12
    assert np.max(np.abs(co + 0.5 * (norm(fp, g) ** 2)[..., None, None] * g)) < 1e-12


def test_compose_mixed_commutes_symmetric_trace_free(rng):
    g = random_spd_metrics(rng, 250)
    f = random_forms(rng, 250)
    fp, fm = sd_asd_split(g, ORIENT, f)
    pm = compose(fp, fm, g)
    mp = compose(fm, fp, g)
    assert np.max(np.abs(pm - mp)) < 1e-12
    assert np.max(np.abs(pm - np.swapaxes(pm, -1, -2))) < 1e-12
    tr = np.einsum("...ab,...ab->...", np.linalg.inv(g), pm)
    assert np.max(np.abs(tr)) < 1e-12


def test_trace_free_square_identity(rng):
    # [F o F]_0 = 2 F+ o F- for arbitrary 2-forms
    g = random_spd_metrics(rng, 1000)
    f = random_forms(rng, 1000)
    fp, fm = sd_asd_split(g, ORIENT, f)
    ff = compose(f, f, g)
    tr = np.einsum("...ab,...ab->...", np.linalg.inv(g), ff)
    ff0 = ff - (tr / 4.0)[..., None, None] * g
    assert np.max(np.abs(ff0 - 2.0 * compose(fp, fm, g))) < 1e-12


def test_exterior_derivative_examples(chart12, rng):
    # constant components: exactly closed
    const = ConstantTwoFormField([0.3, -1.0, 0.5, 2.0, 0.7, 0.1])
    pts = np.zeros((3, 4))
    _, dmat = const.jet(pts)
    assert np.max(np.abs(exterior_derivative_from_jet(dmat).comps)) == 0.0
    # omega in Darboux coordinates: closed exactly
    _, dmat = chart12.omega.jet(chart12.interior_points(rng, 4))
    assert np.max(np.abs(exterior_derivative_from_jet(dmat).comps)) == 0.0
    # F = t du^dth2: dF = dt^du^dth2, component 1 in the (0,2,3) slot
    fld = CallableTwoFormField(lambda x: [0.0, 0.0, 0.0, 0.0, x[0], 0.0])
    w = exterior_derivative(fld, np.array([[1.4, 0.2, 0.1, 0.5]]))
    assert np.allclose(w.comps, [[0.0, 0.0, 1.0, 0.0]], atol=1e-15)
    assert np.isclose(three_form_norm(w, np.eye(4))[0], 1.0)


def test_codifferential_constant_flat():
    const = ConstantTwoFormField([0.3, -1.0, 0.5, 2.0, 0.7, 0.1])
    res = codifferential(const, FlatOracle(4), ORIENT, np.zeros((2, 4)))
    assert np.max(np.abs(res)) == 0.0


def test_closed_self_dual_form_coclosed(chart12, rng):
    # omega is closed and self-dual, hence co-closed, for g and for h alike
    pts = chart12.interior_points(rng, 8)
    for oracle in (chart12.g_oracle, chart12.h_oracle):
        delta = codifferential(chart12.omega, oracle, ORIENT, pts)
        assert np.max(norm_covector(delta, oracle.jet(pts).ginv)) < 1e-10


def test_codifferential_two_routes_agree(rng):
    def metric(x):
        e = 0.08
        return [
            [1.0 + e * x[0] * x[1], e * 0.2 * x[2], 0.0, 0.0],
            [e * 0.2 * x[2], 1.0 + e * x[1] * x[1], 0.0, e * 0.1 * x[0]],
            [0.0, 0.0, 1.0 + e * x[2] * x[3], 0.0],
            [0.0, e * 0.1 * x[0], 0.0, 1.0 - e * x[0] * x[3]],
        ]

    oracle = CallableMetricOracle(metric, 4)
    pts = rng.uniform(-0.5, 0.5, size=(20, 4))
    for _ in range(5):
        c = rng.uniform(-1, 1, size=(6, 4))
        fld = CallableTwoFormField(
            lambda x, c=c: [
                c[k, 0] + c[k, 1] * x[0] + c[k, 2] * x[1] * x[3] + c[k, 3] * x[2]
                for k in range(6)
            ]
        )
        via_star, via_nabla = codifferential_two_ways(fld, oracle, ORIENT, pts)
        ginv = oracle.jet(pts).ginv
        assert np.max(norm_covector(via_star - via_nabla, ginv)) < 1e-7


def test_star_field_jet_matches_fd(chart12, rng):
    # exact product-rule jet of p -> *F(p) against finite differences
    fld = CallableTwoFormField(
        lambda x: [x[0], 0.2, x[2] * x[0], 0.0, x[0] * x[0], x[2]]
    )
    pts = chart12.interior_points(rng, 6, pad=0.1)
    hj = chart12.h_oracle.jet(pts)
    f, dmat = fld.jet(pts)
    _, dstar = star_field_jet(hj, ORIENT, f, dmat)

    def star_six(q):
        return hodge_star(chart12.h_oracle.jet(q), ORIENT, fld.value(q)).six

    from emverify.chart import fd_first_derivatives

    fd = fd_first_derivatives(star_six, pts, chart12.domain.extents)
    dstar_six = np.stack([dstar[..., a, b] for a, b in SIX_PAIRS], axis=-1)
    assert np.max(np.abs(dstar_six - fd)) < 1e-7


def test_asd_from_jinvariant_roundtrip(chart12, rng):
    pts = chart12.interior_points(rng, 40)
    jm = chart12.j_matrix(pts)
    g = chart12.g_oracle.metric(pts)
    # build a J-invariant trace-free S = phi(., J.) from a random ASD form
    phi0, asd = sd_asd_split(g, ORIENT, random_forms(rng, 40))
    s_val = np.einsum("...al,...lb->...ab", asd.mat, jm)
    recovered = asd_from_jinvariant(g, jm, s_val)
    assert np.max(np.abs(recovered.six - asd.six)) < 1e-12
    # zero maps to zero
    assert np.max(np.abs(asd_from_jinvariant(g, jm, np.zeros_like(s_val)).six)) == 0.0


def test_asd_from_jinvariant_produces_asd(chart12, rng):
    pts = chart12.interior_points(rng, 12)
    hj = chart12.h_oracle.jet(pts)
    bundle = curvature(chart12.h_oracle, pts)
    jm = chart12.j_matrix(pts)
    phi = asd_from_jinvariant(chart12.g_oracle.metric(pts), jm, bundle.ric0)
    star_phi = hodge_star(hj, ORIENT, phi)
    assert np.max(np.abs(star_phi.six + phi.six)) < 1e-9
    # and the correspondence inverts: phi(., J.) = ric0
    back = np.einsum("...al,...lb->...ab", phi.mat, jm)
    assert np.max(np.abs(back - bundle.ric0)) < 1e-10


def test_asd_from_jinvariant_rejects_noninvariant(chart12, rng):
    pts = chart12.interior_points(rng, 4)
    jm = chart12.j_matrix(pts)
    g = chart12.g_oracle.metric(pts)
    bad = np.zeros_like(g)
    bad[..., 0, 0] = 1.0  # dt x dt alone is not J-invariant
    assert np.max(jinvariance_residual(bad, jm, np.linalg.inv(g))) > 0.1
    with pytest.raises(NotJInvariant):
        asd_from_jinvariant(g, jm, bad)


def test_j_matrix_is_almost_complex_isometry(chart12, rng):
    from emverify.forms import almost_complex_checks

    pts = chart12.interior_points(rng, 20)
    jm = chart12.j_matrix(pts)
    dev1, dev2 = almost_complex_checks(jm, chart12.g_oracle.metric(pts))
    assert dev1 < 1e-12 and dev2 < 1e-12
    # omega = g(J., .)
    g = chart12.g_oracle.metric(pts)
    om = np.einsum("...pj,...pm->...jm", jm, g)
    assert np.max(np.abs(om - chart12.omega.value(pts).mat)) < 1e-13
