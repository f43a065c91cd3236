"""Built-in scene specs and their JSON form.

A scene spec is plain data: expression strings, bound constants, marked
points and a sampling window.  :func:`build` turns it into
:class:`~flatfront.frontdata.FrontData`.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InvalidSpec, UnknownFixture
from .frontdata import Point, from_forms, from_G_omega, from_gauss_pair
from .holo import expr as X
from .holo.contour import Contour
from .holo.parse import parse

ROUTES = ("gauss-pair", "G-omega", "omega-theta")
INF = complex("inf")


# ---------------------------------------------------------------------------
# JSON helpers

def _enc(v):
    if isinstance(v, (complex, np.complexfloating)):
        v = complex(v)
        if np.isinf(v.real) or np.isinf(v.imag):
            return "inf"
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def _dec(v):
    if v == "inf":
        return INF
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    return v


def _point_json(p):
    return {"z": _enc(complex(p.z)), "cover": p.cover, "sheet": p.sheet,
            "radius": p.radius, "label": p.label}


def _point_from(obj):
    try:
        return Point(_dec(obj["z"]), bool(obj.get("cover", False)), int(obj.get("sheet", 1)),
                     float(obj.get("radius", 0.1)), str(obj.get("label", "")))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"bad point {obj!r}") from exc


@dataclass
class SceneSpec:
    name: str
    route: str
    sources: dict
    params: dict = field(default_factory=dict)
    basepoint: complex = 0.3 + 0.2j
    hyperelliptic: str | None = None
    punctures: list = field(default_factory=list)
    umbilics: list = field(default_factory=list)
    branch_points: list = field(default_factory=list)
    avoid: list = field(default_factory=list)
    euler: int | None = None
    window: tuple = (-2.0, 2.0, -2.0, 2.0)
    xi0: complex = 1.0
    deck: str | None = None
    notes: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "name": self.name, "route": self.route, "sources": dict(self.sources),
            "params": {k: _enc(complex(v)) if isinstance(v, complex) else _enc(v)
                       for k, v in self.params.items()},
            "basepoint": _enc(complex(self.basepoint)),
            "hyperelliptic": self.hyperelliptic,
            "punctures": [_point_json(p) for p in self.punctures],
            "umbilics": [_point_json(p) for p in self.umbilics],
            "branch_points": [_enc(complex(b)) for b in self.branch_points],
            "avoid": [_enc(complex(a)) for a in self.avoid],
            "euler": self.euler, "window": list(self.window),
            "xi0": _enc(complex(self.xi0)), "deck": self.deck, "notes": self.notes,
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise InvalidSpec("scene spec must be a JSON object")
        try:
            spec = cls(
                name=str(obj["name"]), route=str(obj["route"]), sources=dict(obj["sources"]),
                params={k: _dec(v) for k, v in obj.get("params", {}).items()},
                basepoint=complex(_dec(obj.get("basepoint", [0.3, 0.2]))),
                hyperelliptic=obj.get("hyperelliptic"),
                punctures=[_point_from(p) for p in obj.get("punctures", [])],
                umbilics=[_point_from(p) for p in obj.get("umbilics", [])],
                branch_points=[complex(_dec(b)) for b in obj.get("branch_points", [])],
                avoid=[complex(_dec(a)) for a in obj.get("avoid", [])],
                euler=obj.get("euler"), window=tuple(float(x) for x in obj.get("window", (-2, 2, -2, 2))),
                xi0=complex(_dec(obj.get("xi0", 1.0))), deck=obj.get("deck"),
                notes=dict(obj.get("notes", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed scene spec: {exc}") from exc
        spec.validate()
        return spec

    @classmethod
    def loads(cls, text):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"invalid JSON: {exc}") from exc
        return cls.from_json(obj)

    def names(self):
        out = {k: v for k, v in self.params.items() if isinstance(v, (int, float, complex))}
        if self.hyperelliptic is not None:
            out["w"] = X.sqrt(parse(self.hyperelliptic, out))
        return out

    def validate(self):
        if self.route not in ROUTES:
            raise InvalidSpec(f"unknown route {self.route!r}")
        need = {"gauss-pair": ("G", "Gs"), "G-omega": ("G", "omega"), "omega-theta": ("omega", "theta")}
        for key in need[self.route]:
            if key not in self.sources:
                raise InvalidSpec(f"route {self.route} needs source {key!r}")
        if len(self.window) != 4 or self.window[0] >= self.window[1] or self.window[2] >= self.window[3]:
            raise InvalidSpec("window must be (x0, x1, y0, y1) with x0 < x1, y0 < y1")
        names = self.names()
        for key, text in self.sources.items():
            parse(text, names)
        return self


def build(spec):
    """Front data for a scene spec."""
    spec.validate()
    names = spec.names()
    src = {k: parse(v, names) for k, v in spec.sources.items()}
    kw = dict(punctures=list(spec.punctures), umbilics=list(spec.umbilics),
              branch_points=list(spec.branch_points), avoid=list(spec.avoid),
              w=names.get("w"), window=tuple(spec.window), euler=spec.euler, name=spec.name)
    z0 = complex(spec.basepoint)
    if spec.route == "gauss-pair":
        return from_gauss_pair(src["G"], src["Gs"], z0, xi0=complex(spec.xi0), **kw)
    if spec.route == "G-omega":
        return from_G_omega(src["G"], src["omega"], z0, **kw)
    E0 = spec.params.get("E0")
    return from_forms(src["omega"], src["theta"], z0, E0=None if E0 is None else np.asarray(E0), **kw)


# ---------------------------------------------------------------------------
# helpers for the fixtures

def _roots(coeffs):
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    return np.roots(c) if len(c) > 1 else np.array([], dtype=complex)


def _simple(roots, tol=1e-6):
    r = np.asarray(roots)
    if len(r) < 2:
        return True
    d = np.abs(r[:, None] - r[None, :]) + np.eye(len(r)) * 1e9
    return bool(np.min(d) > tol)


def _pick_basepoint(special, window, prefer=0.3 + 0.2j):
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, 41)[1:-1]
    ys = np.linspace(y0, y1, 41)[1:-1]
    cand = (xs[None, :] + 1j * ys[:, None]).ravel()
    cand = cand[(np.abs(cand.real) > 1e-9) & (np.abs(cand.imag) > 1e-9)]
    sp = np.array([complex(p) for p in special if np.isfinite(complex(p))] or [1e9])
    clear = np.min(np.abs(cand[:, None] - sp[None, :]), axis=1)
    good = clear >= 0.5 * np.max(clear)
    z = cand[good][np.argmin(np.abs(cand[good] - prefer))]
    return complex(round(z.real, 6), round(z.imag, 6))


def _poly_text(coeffs):
    """``"(a)*z^n + ..."`` for coefficients in descending order."""
    c = np.asarray(coeffs, dtype=complex)
    n = len(c) - 1
    terms = []
    for j, a in enumerate(c):
        if a == 0:
            continue
        coef = repr(float(a.real)) if a.imag == 0 else f"({float(a.real)!r} + {float(a.imag)!r}*i)"
        e = n - j
        terms.append(coef if e == 0 else f"{coef}*z^{e}")
    return " + ".join(terms) or "0"


def _pts(zs, **kw):
    return [Point(complex(z), **kw) for z in zs]


def _num(name, v):
    try:
        return float(v)
    except (TypeError, ValueError):
        raise InvalidSpec(f"parameter {name} must be a real number") from None


# ---------------------------------------------------------------------------
# fixtures

def horosphere():
    return SceneSpec("horosphere", "G-omega", {"G": "z", "omega": "1"}, basepoint=0.3 + 0.2j,
                     punctures=[Point(INF, label="inf")], euler=1,
                     notes={"totally_umbilic": True})


def _rotational(name, eps, a, b, k, extra):
    k = _num("k", k)
    if k <= 0:
        raise InvalidSpec("k must be positive")
    params = {"a": a, "b": b, "k": k, "s": float(eps)}
    return SceneSpec(name, "omega-theta",
                     {"omega": "s*a*z^(-b-1)/(2*sqrt(k))", "theta": "sqrt(k)*a*z^(b-1)/2"},
                     params=params, basepoint=1.0 + 0.3j,
                     punctures=[Point(0, label="0"), Point(INF, label="inf")],
                     window=(-2.0, 2.0, -2.0, 2.0), euler=0, notes=extra)


def cylinder(k=2.0):
    return _rotational("cylinder", 1, 1.0, 0.0, k, {"caustic": "line"})


def snowman(c=1.5, k=1.0):
    c = _num("c", c)
    if c == 0:
        raise InvalidSpec("c must be nonzero")
    a = c * c / 4 - 1 / (c * c)
    b = 1 / (c * c) + c * c / 4
    return _rotational("snowman", -1, a, b, k, {"c": c, "caustic": "cylinder"})


def hourglass(b=0.5, k=1.0):
    b = _num("b", b)
    if not 0 < abs(b) < 1:
        raise InvalidSpec("hourglass needs 0 < |b| < 1")
    return _rotational("hourglass", 1, float(np.sqrt(1 - b * b)), b, k, {"caustic": "line"})


def peach(b=1.0, c=1.0):
    b, c = complex(b), complex(c)
    if b == 0 or c == 0:
        raise InvalidSpec("peach needs b != 0 and c != 0")
    z0 = 0.2 + 0.1j
    return SceneSpec("peach", "gauss-pair", {"G": "z", "Gs": "z - b"},
                     params={"b": b, "c": c}, basepoint=z0, xi0=c * np.exp(z0 / b),
                     punctures=[Point(INF, label="inf")], window=(-3.0, 3.0, -3.0, 3.0), euler=1,
                     notes={"ds2_11_lower_bound": 2 / abs(b) ** 2})


def _phi_coeffs(k, c):
    p = np.zeros(2 * k + 1, dtype=complex)
    p[0] = 1
    p[2 * k - (k - 1)] += -2 * c
    p[-1] += -1
    return p


def fournoid_genus_k(k=1, c=0.0):
    k = int(k)
    c = _num("c", c)
    if k < 1:
        raise InvalidSpec("k must be at least 1")
    phi = _phi_coeffs(k, c)
    if abs(phi[k + 1]) == 0 or abs(phi[-1]) == 0:
        raise InvalidSpec("the coefficients a_1 and a_k of phi must be nonzero")
    zphi = np.append(phi, 0)
    dzphi = np.polyder(zphi)
    r_phi, r_ends = _roots(phi), _roots(dzphi)
    if not (_simple(r_phi) and _simple(r_ends)):
        raise InvalidSpec("phi and (z phi)' must have simple roots")
    # h = (2k z phi - z^2 phi')/(2k+1); Q vanishes where h' phi - (h/z)(z phi)'/2 does
    h = np.polysub(2 * k * zphi, np.polymul([1, 0, 0], np.polyder(phi))) / (2 * k + 1)
    h = np.trim_zeros(h, "f")
    num = np.polysub(np.polymul(np.polyder(h), phi), 0.5 * np.polymul(h[:-1], dzphi))
    umb = _roots(num)
    punct = [Point(0, cover=True, label="0")]
    for s in (1, -1):
        punct += [Point(complex(r), sheet=s, label=f"e{j}{'+' if s > 0 else '-'}") for j, r in enumerate(r_ends)]
    umbs = [Point(complex(u), sheet=s) for u in umb for s in (1, -1)]
    branch = [complex(r) for r in r_phi]
    R = 1.5 * max(1.0, max(abs(r_phi).max(), abs(r_ends).max()))
    window = (-R, R, -R, R)
    special = [0j] + list(r_phi) + list(r_ends) + list(umb)
    z0 = 0.5 + 0.5j if (k == 1 and c == 0) else _pick_basepoint(special, window, 0.5 + 0.5j)
    return SceneSpec(
        f"fournoid-genus-{k}", "gauss-pair",
        {"G": "w", "Gs": f"({_poly_text(h)})/w"},
        params={"k": k, "c": c}, basepoint=z0, hyperelliptic=_poly_text(zphi),
        punctures=punct, umbilics=umbs, branch_points=branch,
        euler=2 - 2 * k - (4 * k + 1), window=window,
        notes={"ends": 4 * k + 1, "genus": k, "deg_G": 2 * k + 1, "deg_Gs": 2 * k},
    )


def genus2_10end():
    P = "z*(z^2 - 1)*(z^2 - 9/4)"
    dP = "5*z^4 - 39/4*z^2 + 9/4"
    r_ends = _roots([5, 0, -39 / 4, 0, 9 / 4])
    punct = [Point(0, cover=True, label="0"), Point(INF, cover=True, label="inf")]
    for s in (1, -1):
        punct += [Point(complex(r), sheet=s) for r in r_ends]
    return SceneSpec("genus2-10end", "gauss-pair", {"G": "w", "Gs": f"w - z*({dP})/(5*w)"},
                     basepoint=0.35 + 0.6j, hyperelliptic=P, punctures=punct,
                     branch_points=[1, -1, 1.5, -1.5], euler=2 - 4 - 10,
                     window=(-2.0, 2.0, -2.0, 2.0), notes={"ends": 10, "genus": 2})


def dihedral_caustic():
    roots = np.exp(2j * np.pi * np.arange(8) / 8)
    return SceneSpec("dihedral-caustic", "gauss-pair", {"G": "z^3", "Gs": "z^(-5)"},
                     basepoint=0.6 + 0.3j, punctures=_pts(roots),
                     umbilics=[Point(0, label="0")], window=(-1.5, 1.5, -1.5, 1.5),
                     notes={"ord_Q_at_0": 6})


def uend_model(m=2, a0=1.0, am=0.5):
    m = int(m)
    a0, am = complex(a0), complex(am)
    if m < 2 or a0 == 0 or am == 0:
        raise InvalidSpec("uend-model needs m >= 2 and a0, am nonzero")
    poly = np.zeros(m + 1, dtype=complex)
    poly[0] = am
    poly[-2] -= 1
    poly[-1] += a0
    ends = _roots(poly)
    window = (-2.0, 2.0, -2.0, 2.0)
    z0 = _pick_basepoint([0j] + list(ends), window, 0.3 + 0.2j)
    return SceneSpec("uend-model", "gauss-pair", {"G": "a0 + am*z^m", "Gs": "z"},
                     params={"m": m, "a0": a0, "am": am}, basepoint=z0,
                     punctures=_pts(ends) + [Point(INF, label="inf")],
                     umbilics=[Point(0, label="q")], window=window,
                     notes={"ord_Q": m - 1})


def eend_model(m=1, k=1, coeffs=(2.0,)):
    m, k = int(m), int(k)
    co = [complex(c) for c in (coeffs if np.ndim(coeffs) else [coeffs])]
    if m < 1 or k < 0 or not co or co[0] == 0:
        raise InvalidSpec("eend-model needs m >= 1, k >= 0 and a nonzero leading coefficient")
    # G = z^(m+k) p(z), p(z) = sum co[j] z^j
    p_desc = np.array(co[::-1], dtype=complex)
    gtxt = _poly_text(np.concatenate([p_desc, np.zeros(m + k)]))
    diff = np.polysub(np.polymul(p_desc, np.eye(1, k + 1, 0).ravel()), [1])  # z^k p(z) - 1
    ends = [r for r in _roots(diff) if abs(r) > 1e-8]
    # zeros of G' away from 0: (m+k) p + z p'
    gp = np.polyadd((m + k) * p_desc, np.polymul([1, 0], np.polyder(p_desc)) if len(p_desc) > 1 else [0])
    umb = [r for r in _roots(gp) if abs(r) > 1e-8]
    special = [0j] + ends + umb
    near = min([abs(z) for z in special if abs(z) > 0] + [2.0])
    window = (-2.0, 2.0, -2.0, 2.0)
    z0 = _pick_basepoint(special, (-near, near, -near, near), 0.3 * near * (1 + 0.7j))
    kind = "k>0" if k > 0 else ("a_m=1" if co[0] == 1 else "a_m!=1")
    return SceneSpec("eend-model", "gauss-pair", {"G": gtxt, "Gs": f"z^{m}"},
                     params={"m": m, "k": k}, basepoint=z0,
                     punctures=[Point(0, label="p")] + _pts(ends) + [Point(INF, label="inf")],
                     umbilics=_pts(umb), window=window,
                     notes={"case": kind, "coeffs": [[c.real, c.imag] for c in co]})


def pfront_xi0(b, c, z0):
    """Normalization of ``xi`` for which the deck map ``z -> -z`` acts as duality when ``c = sqrt 2``."""
    G = parse("(z^2 + z/b)/(z + b)", {"b": b})
    Gs = parse("(z^2 - z/b)/(b - z)", {"b": b})
    f = G.diff() / (G - Gs)
    r, th = abs(z0), np.angle(z0)
    half, _ = Contour.arc(0, r, th, th + np.pi, n=64).integrate(f, tol=1e-13)
    gap = complex(X.evaluate(G - Gs, z0))
    return complex(c / np.sqrt(2) * np.sqrt(1j * gap / np.exp(half)))


def pfront_3end(b=0.3, c=float(np.sqrt(2))):
    b, c = _num("b", b), _num("c", c)
    if b in (0.0, 1.0, -1.0) or c == 0:
        raise InvalidSpec("pfront-3end needs b outside {0, 1, -1} and c != 0")
    z0 = 0.4 + 0.1j
    if min(abs(abs(z0) - abs(b)), abs(abs(z0) - 1)) < 0.05:
        z0 = 0.7 * z0 if abs(b) > 0.5 else 1.4 * z0
    disc = np.sqrt(complex(b * b - 1))
    umb = [-b + disc, -b - disc, b + disc, b - disc]
    return SceneSpec("pfront-3end", "gauss-pair",
                     {"G": "(z^2 + z/b)/(z + b)", "Gs": "(z^2 - z/b)/(b - z)"},
                     params={"b": b, "c": c}, basepoint=z0, xi0=pfront_xi0(b, c, z0),
                     punctures=[Point(0, label="0"), Point(INF, label="inf"),
                                Point(1, label="+1"), Point(-1, label="-1")],
                     umbilics=_pts(umb), avoid=[b, -b], deck="-z",
                     window=(-2.0, 2.0, -2.0, 2.0),
                     notes={"noncoorientable_ends": ["0", "inf"], "coorientable_ends": ["+-1"]})


BUILTINS = {
    "horosphere": (horosphere, "totally umbilic; Q = 0"),
    "cylinder": (cylinder, "hyperbolic cylinder (k)"),
    "snowman": (snowman, "rotational front with cuspidal edge (c, k)"),
    "hourglass": (hourglass, "rotational front with cone point (b, k)"),
    "peach": (peach, "G = z, G* = z - b (b, c)"),
    "fournoid-genus-k": (fournoid_genus_k, "genus k, 4k+1 embedded ends (k, c)"),
    "genus2-10end": (genus2_10end, "genus 2, 10 embedded ends"),
    "dihedral-caustic": (dihedral_caustic, "G = z^3, G* = z^-5"),
    "uend-model": (uend_model, "G* = z, G = a0 + am z^m near an umbilic (m, a0, am)"),
    "eend-model": (eend_model, "G* = z^m, G = z^(m+k) p(z) near an end (m, k, coeffs)"),
    "pfront-3end": (pfront_3end, "three-ended p-front with deck map z -> -z (b, c)"),
}


def builtin(name, **params):
    if name not in BUILTINS:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(BUILTINS)}")
    fn = BUILTINS[name][0]
    try:
        return fn(**params)
    except TypeError as exc:
        raise InvalidSpec(f"bad parameters for {name}: {exc}") from None


def load(name_or_path, **params):
    """A builtin by name, or a scene spec read from a JSON file."""
    if name_or_path in BUILTINS:
        return builtin(name_or_path, **params)
    try:
        with open(name_or_path) as fh:
            text = fh.read()
    except OSError:
        raise UnknownFixture(f"{name_or_path!r} is neither a builtin nor a readable file") from None
    return SceneSpec.loads(text)
