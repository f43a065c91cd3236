import json

import numpy as np
import pytest

from flatfront import catalog
from flatfront.catalog import BUILTINS, SceneSpec
from flatfront.errors import InvalidSpec, UnknownFixture
from flatfront.holo import Contour, parse
from flatfront.legendrian import det2

CASES = [(name, {}) for name in BUILTINS] + [
    ("fournoid-genus-k", {"k": 2, "c": 2.0}),
    ("uend-model", {"m": 4}),
    ("eend-model", {"m": 2, "k": 0, "coeffs": (1.0, 0.0, 0.5)}),
]


@pytest.mark.parametrize("name,kw", CASES)
def test_spec_round_trip_and_frame(name, kw):
    spec = catalog.builtin(name, **kw)
    text = spec.dumps()
    assert SceneSpec.loads(text).dumps() == text
    json.loads(text)
    d = catalog.build(spec)
    E = d.frame.at(np.array([d.basepoint + 0.03 + 0.02j]))
    assert abs(det2(E[0]) - 1) < 1e-8


def test_peach_bound():
    d = catalog.build(catalog.builtin("peach", b=1, c=1))
    rng = np.random.default_rng(2)
    z = rng.uniform(-3, 3, 500) + 1j * rng.uniform(-3, 3, 500)
    dens = d.fundamental_forms(z)["ds2_11"][:, 0, 0]
    assert np.min(dens) >= 2 - 1e-12


def test_fournoid_ends():
    spec = catalog.builtin("fournoid-genus-k", k=1, c=0)
    assert len(spec.punctures) == 5
    zs = sorted({round(abs(p.z), 9) for p in spec.punctures if p.z != 0})
    assert zs == [pytest.approx(1 / np.sqrt(3))]
    assert spec.notes["deg_G"] + spec.notes["deg_Gs"] == 5


def test_fournoid_genus2_conditions():
    spec = catalog.builtin("fournoid-genus-k", k=2, c=2.0)
    assert len(spec.punctures) == 9


def test_hyperelliptic_sheet_flip():
    w = parse("sqrt(z*(z^2-1))")
    (v,), _ = Contour.circle(1.0, 0.3, theta0=np.pi).values([w])
    assert v[-1] == pytest.approx(-v[0])
    (v,), _ = Contour.circle(0, 2.0).values([w])
    assert v[-1] == pytest.approx(-v[0])
    (v,), _ = Contour.circle(0, 0.5).values([parse("sqrt(z*(z^2-1)*(z^2-9/4)*(z-3))")])
    assert v[-1] == pytest.approx(-v[0])


@pytest.mark.parametrize("name,kw", [
    ("peach", {"b": 0}), ("hourglass", {"b": 1.5}), ("uend-model", {"m": 1}),
    ("fournoid-genus-k", {"k": 0}), ("pfront-3end", {"b": 1.0}), ("peach", {"q": 1}),
])
def test_parameter_validation(name, kw):
    with pytest.raises(InvalidSpec):
        catalog.builtin(name, **kw)


def test_unknown_fixture():
    with pytest.raises(UnknownFixture):
        catalog.builtin("torus")


def test_spec_file(tmp_path):
    spec = catalog.builtin("uend-model", m=3)
    path = tmp_path / "u.json"
    path.write_text(spec.dumps())
    again = catalog.load(str(path))
    assert again.dumps() == spec.dumps()
    bad = tmp_path / "bad.json"
    bad.write_text('{"name": "x", "route": "nope"}')
    with pytest.raises(InvalidSpec):
        catalog.load(str(bad))
