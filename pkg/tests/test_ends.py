import numpy as np
import pytest

from flatfront import catalog
from flatfront.ends import (classify_end, degree, end_profile, expected_q0, gauss_ratio,
                            multiplicity_from_maps, osserman)
from flatfront.errors import NotRegularEnd
from flatfront.holo import parse
from flatfront.holo.series import ramification
from flatfront.legendrian import mobius_expr, random_sl2


def test_ramification_examples():
    assert ramification(parse("z"), 0)[0] == 1
    assert ramification(parse("3 + 2*z^2"), 0)[0] == 2
    k, v = ramification(parse("(z^2 + z/0.3)/(z + 0.3)"), 0)
    assert k == 1 and v == 0


@pytest.mark.parametrize("G,Gs,alpha", [
    ("z", "z", 1.0),
    ("2*z^3", "z^2", 0.0),
    ("-0.5*z + z^2", "z", -0.5),
    ("0.3*z + z^3", "z", 0.3),
    ("-z + z^2", "z", -1.0),
])
def test_gauss_ratio(G, Gs, alpha):
    a, _ = gauss_ratio(parse(G), parse(Gs), 0.2)
    assert a == pytest.approx(alpha, abs=1e-9)


def test_gauss_ratio_takes_reciprocal():
    a, _ = gauss_ratio(parse("z"), parse("4*z"), 0.2)
    assert a == pytest.approx(0.25)


def test_irregular_end_refused():
    with pytest.raises(NotRegularEnd):
        gauss_ratio(parse("1 + z"), parse("z"), 0.2)


@pytest.mark.parametrize("alpha,kind", [
    (1.0, "notFiniteType"), (0.0, "horospherical"), (0.5, "snowman"),
    (-0.5, "hourglass"), (-1.0, "cylindrical"),
])
def test_classify(alpha, kind):
    assert classify_end(alpha) == kind


def test_classify_hysteresis():
    assert classify_end(1.5e-6) == "indeterminate"
    with pytest.raises(ValueError):
        classify_end(1.5)


def test_q0_sign():
    assert expected_q0(0.3, 1) == pytest.approx(-0.3 / 0.49)
    assert expected_q0(-0.5, 2) > 0


def test_multiplicity_from_maps():
    assert multiplicity_from_maps(parse("1 + z^3"), parse("z^2"), 0.3) == 2


def test_alpha_invariant_under_motions():
    rng = np.random.default_rng(5)
    G, Gs = parse("0.3*z + z^2"), parse("z")
    for _ in range(5):
        a = random_sl2(rng, 0.4)
        val, _ = gauss_ratio(mobius_expr(a, G), mobius_expr(a, Gs), 0.05)
        assert val == pytest.approx(0.3, abs=1e-6)
    assert gauss_ratio(Gs, G, 0.2)[0] == pytest.approx(0.3)


def test_fournoid_ends_embedded():
    d = catalog.build(catalog.fournoid_genus_k(1))
    for p in d.punctures[1:]:
        prof = end_profile(d, p)
        assert prof.multiplicity == 1
        assert prof.type in ("snowman", "hourglass", "horospherical", "cylindrical")


def test_rotational_cylindrical_flag():
    for name, cyl in (("cylinder", True), ("hourglass", False), ("snowman", False)):
        d = catalog.build(catalog.builtin(name))
        assert d.end_diagnostics(d.punctures[0])["cylindrical"] == cyl


def test_degree_counting():
    assert degree(parse("z^3 + 1")) == 3
    assert degree(parse("(z^2 + 1)/(z - 2)")) == 2
    assert degree(parse("(z^2 + z/0.3)/(z + 0.3)")) == 2


def test_osserman_report():
    rep = osserman(5, 5, 0)
    assert rep.equality and rep.holds
    rep = osserman(2, 1, 2)
    assert rep.bound == 2 and rep.equality
    rep = osserman(3, 1, 0)
    assert rep.holds and not rep.equality
