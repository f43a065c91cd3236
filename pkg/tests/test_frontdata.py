import numpy as np
import pytest

from flatfront import catalog
from flatfront.errors import DegenerateMetric, ExcludedParameter, NotFiniteType
from flatfront.frontdata import Point, from_forms, from_G_omega, fundamental_forms_from
from flatfront.holo import evaluate, parse
from flatfront.holo.series import form_schwarzian, schwarzian


@pytest.fixture(scope="module")
def peach():
    return catalog.build(catalog.peach())


def test_peach_densities(peach):
    ff = peach.fundamental_forms(np.array([0j]))
    assert ff["ds2_11"][0, 0, 0] == pytest.approx(2.0)
    rng = np.random.default_rng(0)
    z = rng.uniform(-2, 2, 200) + 1j * rng.uniform(-2, 2, 200)
    dens = peach.fundamental_forms(z)["ds2_11"][:, 0, 0]
    assert np.all(dens >= 2 - 1e-12)


def test_theta_zero_forms():
    w = np.array([0.3 + 0.4j])
    ff = fundamental_forms_from(w, np.zeros(1))
    assert np.allclose(ff["ds2"][0], 0.25 * np.eye(2))
    assert np.allclose(ff["dh2"][0], -0.25 * np.eye(2))


def test_ds2_determinant_and_psd():
    rng = np.random.default_rng(1)
    w = rng.normal(size=50) + 1j * rng.normal(size=50)
    t = rng.normal(size=50) + 1j * rng.normal(size=50)
    g = fundamental_forms_from(w, t)["ds2"]
    assert np.allclose(np.linalg.det(g), (np.abs(w) ** 2 - np.abs(t) ** 2) ** 2)
    assert np.all(np.linalg.eigvalsh(g) > -1e-12)
    v = np.array([0.6, -0.8])
    assert np.allclose(v @ g @ v, np.abs(w * complex(*v) + np.conj(t * complex(*v))) ** 2)


def test_peach_singular_locus(peach):
    lines = peach.singular_locus(0.0, grid=96)
    pts = np.concatenate(lines)
    assert len(pts) > 20
    assert np.max(np.abs(pts.real)) < 1e-6
    rho = evaluate(peach.rho, pts)
    assert np.max(np.abs(np.abs(rho) - 1)) < 1e-6


def test_rotational_singular_circle():
    d = catalog.build(catalog.hourglass(b=0.5, k=2.0))
    for t in (0.0, 0.3):
        lines = d.singular_locus(t, grid=128)
        pts = np.concatenate(lines)
        assert np.allclose(np.abs(pts), np.exp(2 * t) / 2, atol=1e-6)
        assert d.parallel(t).singular_locus(0.0, grid=128)[0] == pytest.approx(lines[0])


def test_constant_rho_has_empty_locus():
    d = from_forms(parse("1"), parse("3"), 0.1)
    assert d.singular_locus(0.0, grid=32) == []


def test_dh2_changes_sign_across_locus(peach):
    ff = peach.fundamental_forms(np.array([-0.01, 0.01]))
    assert ff["dh2"][0, 0, 0] * ff["dh2"][1, 0, 0] < 0


def test_excluded_parameters():
    d = catalog.build(catalog.hourglass(b=0.5, k=2.0))
    assert d.excluded_parallel_params() == []
    e4 = from_forms(parse("1/z"), parse("exp(4)/z"), 0.5,
                    punctures=[Point(0, label="0")])
    (t, p), = e4.excluded_parallel_params()
    assert t == pytest.approx(2.0, abs=1e-8)
    with pytest.raises(ExcludedParameter):
        e4.check_parameter(2.0)
    e4.check_parameter(1.0)


def test_peach_not_finite_type(peach):
    with pytest.raises(NotFiniteType):
        peach.rho_limit(peach.punctures[0])
    assert peach.end_diagnostics(peach.punctures[0])["finiteType"] is False


def test_end_diagnostics():
    d = catalog.build(catalog.fournoid_genus_k(1))
    diag = d.end_diagnostics(d.punctures[0])
    assert diag["ord_Q"] == -2 and diag["weaklyComplete"]
    e = from_forms(parse("1"), parse("z^2"), 0.5, punctures=[Point(0)])
    diag = e.end_diagnostics(e.punctures[0])
    assert diag["ord_omega"] == pytest.approx(0, abs=1e-6)
    # order is the exponent mu in |theta|^2 = c |z|^(2 mu) |dz|^2
    assert diag["ord_theta"] == pytest.approx(2, abs=1e-6)
    assert not diag["weaklyComplete"] and not diag["cylindrical"]


def test_borderline_order_minus_one():
    e = from_forms(parse("1/z"), parse("2/z"), 0.5, punctures=[Point(0)])
    diag = e.end_diagnostics(e.punctures[0])
    assert diag["ord_omega"] == pytest.approx(-1, abs=1e-6)
    assert diag["cylindrical"] and diag["weaklyComplete"]
    e = from_forms(parse("z^(-0.5)"), parse("z^(-0.5)"), 0.5, punctures=[Point(0)])
    diag = e.end_diagnostics(e.punctures[0])
    assert diag["ord_omega"] == pytest.approx(-0.5, abs=1e-6)
    assert not diag["weaklyComplete"]


def test_prescribed_G_omega_examples():
    d = from_G_omega(parse("z"), parse("1"), 0.3)
    assert evaluate(d.theta, 0.7) == 0
    d = from_G_omega(parse("z"), parse("-exp(-2*z)"), 0.3)
    z = np.array([0.4 + 0.3j, -0.5j])
    assert np.allclose(d.values_at([d.theta], z)[0], np.exp(2 * z))
    assert np.allclose(d.values_at([d.Q], z)[0], -1)
    d = from_G_omega(parse("z^2"), parse("z"), 0.5)
    assert abs(evaluate(d.Q, 0.3 + 0.2j)) < 1e-12
    with pytest.raises(DegenerateMetric):
        from_G_omega(parse("z^2"), parse("z"), 0.5, check_window=(-1, 1, -1, 1))


def test_schwarzian_round_trip_for_prescribed_G_omega():
    d = from_G_omega(parse("z^3 + z"), parse("exp(z)"), 0.4)
    z = np.array([0.2 + 0.5j, 0.9 - 0.2j])
    sw, sg, Q = d.values_at([form_schwarzian(d.omega), schwarzian(d.G), d.Q], z)
    assert np.allclose(sw - 2 * Q - sg, 0, atol=1e-9)


def test_invariances(peach):
    z = np.array([0.3 + 0.4j, -0.7 + 0.2j])
    r0, Q0 = peach.values_at([peach.rho, peach.Q], z)
    g = peach.gauge(0.7)
    r1, Q1 = g.values_at([g.rho, g.Q], z)
    assert np.allclose(np.abs(r1), np.abs(r0)) and np.allclose(Q1, Q0)
    pt = peach.parallel(0.9)
    assert np.allclose(pt.values_at([pt.Q], z)[0], Q0, rtol=1e-9)
