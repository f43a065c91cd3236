import numpy as np
import pytest

from flatfront import catalog
from flatfront import caustic as C
from flatfront import pfront as PF
from flatfront.verify import tau_path


@pytest.fixture(scope="module")
def pf():
    return catalog.build(catalog.pfront_3end())


def test_adjusted_lift(pf):
    ok, defect = PF.adjusted_lift_check(pf.frame, tau_path(pf))
    assert ok
    assert PF.classify_defect(defect) == "identity"


def test_unnormalized_lift_has_diagonal_defect():
    d = catalog.build(catalog.pfront_3end(c=1.0))
    ok, defect = PF.adjusted_lift_check(d.frame, tau_path(d))
    assert not ok
    # the defect is diag(lambda^2, lambda^-2) with lambda = sqrt(2)/c, up to sign
    assert np.allclose(np.abs(np.diag(defect)), [0.5, 2.0], atol=1e-8)
    assert PF.classify_defect(defect) == "diagonal"


def test_classify_defect_kinds():
    assert PF.classify_defect(np.diag([1j, -1j])) == "diagonal-unitary"
    assert PF.classify_defect(-np.eye(2)) == "identity"
    assert PF.classify_defect(np.array([[1, 1], [0, 1]])) == "general"


def test_tau_squared(pf):
    ok, dist = PF.tau_squared_check(pf.frame, tau_path(pf))
    assert ok and dist < 1e-9


@pytest.mark.parametrize("label,coor", [("0", False), ("inf", False), ("+1", True), ("-1", True)])
def test_end_coorientability(pf, label, coor):
    p = next(q for q in pf.punctures if q.label == label)
    rep = PF.end_action(pf, p)
    assert rep.coorientable == coor
    assert rep.fixes_Q
    if not coor:
        assert rep.swaps_forms and rep.swaps_maps


@pytest.mark.parametrize("m,coor", [(2, False), (3, True)])
def test_cover_data_on_caustic_ends(m, coor):
    d = catalog.build(catalog.uend_model(m=m))
    c = C.caustic_data(d)
    rep = PF.cover_data(c.front, PF.DoubleCoverChart(0j), 0.1)
    assert rep.coorientable == coor and rep.fixes_Q


def test_multiplicity_and_degree(pf):
    assert PF.total_degree(2, 2) == 2
    assert PF.total_degree(2, 1, on_cover=False) == 3
    p0 = next(q for q in pf.punctures if q.label == "0")
    assert PF.pfront_multiplicity(pf, p0, True) == 0.5


def test_complete_end_contradiction():
    assert PF.complete_end_contradiction(True, False)
    assert not PF.complete_end_contradiction(True, True)
    assert not PF.complete_end_contradiction(False, False)


def test_orientability(pf):
    assert PF.orientability_check(pf.G, pf.Gs, np.array([0.5 + 0.2j, 0.3 - 0.6j])) < 1e-6


@pytest.mark.parametrize("b,fires", [(0.3, True), (0.5, False), (2.0, False)])
def test_noncaustic_witness(b, fires):
    assert PF.noncaustic_witness(b)["obstructed"] == fires


def test_double_cover_chart():
    ch = PF.DoubleCoverChart(1.0)
    assert ch.to_base(2.0) == pytest.approx(5.0)
    loop = ch.base_loop(0.2)
    assert abs(loop.start - loop.end) < 1e-12
    assert PF.DoubleCoverChart(0j, at_infinity=True).to_base(0.5) == pytest.approx(4.0)
