import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flatfront.errors import BranchAmbiguous, EssentialOrIrregular, ParseError, PoleHit
from flatfront.holo import Contour, contour_integrate, evaluate, parse
from flatfront.holo.series import (form_schwarzian, local_series, metric_order, ramification,
                                   schwarzian, vanish_order)


def fd(e, z, h=1e-5):
    return (evaluate(e, z + h) - evaluate(e, z - h)) / (2 * h)


def test_evaluate_basic():
    assert evaluate(parse("z^2"), 1 + 1j) == pytest.approx(2j)
    assert evaluate(parse("exp(-2*z)"), 0) == pytest.approx(1)
    assert evaluate(parse("b*z", {"b": 3}), 2) == pytest.approx(6)


def test_parse_errors():
    with pytest.raises(ParseError):
        parse("z +* 2")
    with pytest.raises(ParseError):
        parse("")
    with pytest.raises(ParseError):
        parse("q*z")


def test_pole_and_sheet_refusal():
    with pytest.raises(PoleHit):
        evaluate(parse("1/z"), 0)
    with pytest.raises(BranchAmbiguous):
        evaluate(parse("sqrt(z)"), 1.0, strict=True)


def test_sqrt_monodromy_matches_brute_force():
    e = parse("sqrt(z*(z^2-1))")
    c = Contour.circle(0, 2, n=64)
    (vals,), _ = c.values([e])
    th = np.linspace(0, 2 * np.pi, 10001)
    z = 2 * np.exp(1j * th)
    w = np.sqrt(z * (z * z - 1))
    ref = [w[0]]
    for k in range(1, len(w)):
        ref.append(w[k] if abs(w[k] - ref[-1]) < abs(w[k] + ref[-1]) else -w[k])
    assert vals[0] == pytest.approx(ref[0], abs=1e-12)
    assert vals[-1] == pytest.approx(ref[-1], abs=1e-9)
    assert vals[-1] == pytest.approx(-vals[0], abs=1e-9)


@pytest.mark.parametrize("text,deriv", [
    ("z^3", lambda z: 3 * z ** 2),
    ("exp(2*z/1.5)", lambda z: (2 / 1.5) * np.exp(2 * z / 1.5)),
])
def test_diff_closed_forms(text, deriv):
    e = parse(text)
    for z in (0.3 + 0.2j, -1.1 + 0.7j):
        assert evaluate(e.diff(), z) == pytest.approx(deriv(z), rel=1e-12)


def test_diff_sqrt_finite_difference():
    e = parse("sqrt(z*(z^2-1))")
    z = 0.4 + 0.9j
    v = evaluate(e.diff(), z)
    ref = (3 * z * z - 1) / (2 * evaluate(e, z))
    assert v == pytest.approx(ref, rel=1e-12)
    assert v == pytest.approx(fd(e, z), rel=1e-7)


atoms = st.sampled_from(["z", "z^2", "exp(z/2)", "1/(z-3)", "sqrt(z+4)", "log(z+5)", "z^(1.5)"])


@st.composite
def exprs(draw):
    a, b, c = draw(atoms), draw(atoms), draw(atoms)
    op1 = draw(st.sampled_from(["+", "*", "-"]))
    op2 = draw(st.sampled_from(["+", "*", "/"]))
    return f"({a}){op1}({b}){op2}(2+{c})"


@settings(max_examples=60, deadline=None)
@given(exprs(), st.floats(0.5, 1.5), st.floats(-0.8, 0.8))
def test_diff_against_finite_difference(text, x, y):
    e = parse(text)
    z = complex(x, y)
    d = evaluate(e.diff(), z)
    assert abs(d - fd(e, z)) / (1 + abs(d)) < 1e-6


def test_schwarzian_of_mobius_and_power():
    assert abs(evaluate(schwarzian(parse("z")), 0.7)) < 1e-14
    assert abs(evaluate(schwarzian(parse("(2*z+1)/(z-3)")), 0.4 + 0.1j)) < 1e-10
    z = 0.37 - 0.2j
    assert evaluate(schwarzian(parse("z^2")), z) == pytest.approx(-1.5 / z ** 2, rel=1e-12)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_schwarzian_leading_law(m):
    ls = local_series(schwarzian(parse(f"1 + 2*z^{m}")), 0)
    assert ls.order == -2
    assert ls.leading() == pytest.approx((1 - m * m) / 2, abs=1e-8)


@pytest.mark.parametrize("mu", [-1.5, 0.5, 2.0])
def test_form_schwarzian_leading_law(mu):
    s = form_schwarzian(parse(f"z^({mu})"))
    z = 0.3 + 0.1j
    assert evaluate(s, z) * z * z == pytest.approx(-mu * (mu + 2) / 2, abs=1e-8)


def test_form_schwarzian_examples():
    assert abs(evaluate(form_schwarzian(parse("1")), 0.2)) < 1e-14
    assert evaluate(form_schwarzian(parse("exp(-2*z)")), 0.5 + 0.5j) == pytest.approx(-2, abs=1e-12)


def test_schwarzian_mobius_invariance():
    g = parse("z^3 + z")
    h = parse("(2*(z^3+z) - 1)/(z^3 + z + 4)")
    z = 0.2 + 0.6j
    assert evaluate(schwarzian(h), z) == pytest.approx(evaluate(schwarzian(g), z), rel=1e-9)


def test_contour_integrals():
    assert contour_integrate(parse("1/z"), Contour.circle(0, 1)) == pytest.approx(2j * np.pi, abs=1e-10)
    v = contour_integrate(parse("3/(2*z)"), Contour.circle(0, 1))
    assert v == pytest.approx(3j * np.pi, abs=1e-10)
    assert abs(v.real) < 1e-8
    assert contour_integrate(parse("exp(z)"), Contour.segment(0, 1)) == pytest.approx(np.e - 1, abs=1e-12)


def test_local_series_examples():
    ls = local_series(parse("z^2 + z^5"), 0, N=6)
    assert ls.order == 2
    assert ls.coeffs[2] == pytest.approx(1, abs=1e-10)
    assert ls.coeffs[5] == pytest.approx(1, abs=1e-10)
    h = parse("(2*z*(z^2-1) - z^2*(2*z))/3")
    ls = local_series(h, 0)
    assert ls.order == 1 and ls.leading() == pytest.approx(-2 / 3, abs=1e-10)
    with pytest.raises(EssentialOrIrregular):
        local_series(parse("exp(1/z)"), 0)


def test_orders():
    assert vanish_order(parse("z^3"), 0) == 3
    assert vanish_order(parse("1/z^2 + 1"), 0) == -2
    k, val = ramification(parse("5 + z^4"), 0)
    assert k == 4 and val == pytest.approx(5)
    assert metric_order(parse("z^(0.5)*(1+z)"), 0, 0.1) == pytest.approx(0.5, abs=1e-6)
