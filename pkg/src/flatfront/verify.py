"""Verification suites: identities, ends, caustics and p-front symmetry as JSON reports."""
from __future__ import annotations

import math

import numpy as np

from . import caustic as C
from . import pfront as PF
from .ends import degree, end_profile, osserman
from .errors import DegenerateInput, FlatFrontError, NonRealAlpha, NotRegularEnd
from .frontdata import FrontData
from .holo import expr as X
from .holo.contour import Contour
from .holo.series import form_schwarzian, schwarzian
from .legendrian import det2, frame_from_G_omega, from_entries, front_point, inv2, minkowski, solve_ode

SUITES = ("core-identities", "ends", "caustic", "pfront")

TOL = {
    "det": 1e-8, "routes": 1e-6, "fundamental_form": 1e-5, "schwarzian": 1e-6,
    "hopf_parallel": 1e-9, "caustic_routes": 1e-8, "triple": 1e-8, "focal": 1e-6,
    "adjusted_lift": 1e-6, "tau_squared": 1e-6, "orientability": 1e-6,
}


class Report:
    """Ordered list of checks; ``status`` is ``pass``, ``fail``, ``skip`` or ``info``."""

    def __init__(self, name, suite):
        self.name, self.suite = name, suite
        self.checks = []

    def add(self, check, status, residual=None, tolerance=None, **detail):
        if isinstance(status, (bool, np.bool_)):
            status = "pass" if status else "fail"
        self.checks.append({"check": check, "status": status, "residual": _clean(residual),
                            "tolerance": tolerance, "detail": _clean(detail)})

    def measure(self, check, residual, tolerance, **detail):
        ok = residual is not None and np.isfinite(residual) and residual <= tolerance
        self.add(check, bool(ok), residual, tolerance, **detail)

    def guard(self, check, fn):
        """Run ``fn(self)``; a library error becomes a failed check."""
        try:
            fn(self)
        except FlatFrontError as exc:
            self.add(check, "fail", error=f"{type(exc).__name__}: {exc}")

    @property
    def passed(self):
        return all(c["status"] != "fail" for c in self.checks)

    def to_json(self):
        return {"spec": self.name, "suite": self.suite, "pass": self.passed, "checks": self.checks}


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (complex, np.complexfloating)):
        return [_clean(float(np.real(v))), _clean(float(np.imag(v)))]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    return v


# ---------------------------------------------------------------------------
# sampling

def _seg_dist(a, b, q):
    """Distance from ``q`` to the segments ``[a, b]`` (arrays)."""
    ab = b - a
    s = np.clip(np.real((q - a) * np.conj(ab)) / np.maximum(np.abs(ab) ** 2, 1e-300), 0, 1)
    return np.abs(a + s * ab - q)


def sample_points(d: FrontData, n, rng, clearance=0.05, extra=()):
    """``n`` random points of the window reachable from the basepoint by straight segments.

    Points and segments keep ``clearance`` (relative to the window) away
    from the marked points and ``extra``.
    """
    x0, x1, y0, y1 = d.window
    span = min(x1 - x0, y1 - y0)
    r = clearance * span
    special = list(d.special_points()) + [complex(e) for e in extra]
    out = []
    while len(out) < n:
        z = rng.uniform(x0, x1, 4 * n) + 1j * rng.uniform(y0, y1, 4 * n)
        ok = np.ones(z.shape, dtype=bool)
        for q in special:
            ok &= np.abs(z - q) > r
            ok &= _seg_dist(np.full(z.shape, d.basepoint), z, q) > 0.5 * r
        out.extend(z[ok].tolist())
    return np.array(out[:n])


# ---------------------------------------------------------------------------
# core identities

def _psl_dist(E, F):
    scale = np.maximum(np.max(np.abs(E), axis=(-1, -2)), 1.0)
    dp = np.max(np.abs(E - F), axis=(-1, -2))
    dm = np.max(np.abs(E + F), axis=(-1, -2))
    return float(np.max(np.minimum(dp, dm) / scale))


def route_residuals(d, pts):
    """PSL distances between the lift of ``d`` and the other constructions available.

    The integrated frame is always compared; the ``(G, omega)`` closed form
    is compared when ``G`` is known.  Frames are normalized to agree at the
    basepoint.
    """
    E = d.frame.at(pts)
    E0 = d.frame.at(d.basepoint)
    out = {}
    if d.route != "ode":
        out["ode"] = _psl_dist(E, solve_ode(d.omega, d.theta, d.basepoint, points=pts, E0=E0))
    if d.G is not None:
        ent = frame_from_G_omega(d.G, d.omega, d.basepoint)
        F = from_entries(*d.values_at(ent, pts))
        F0 = from_entries(*[v for v in d.values_at(ent, np.array([d.basepoint]))])[0]
        out["G-omega"] = _psl_dist(E, (E0 @ inv2(F0)) @ F)
    return out


def fundamental_form_residual(d, pts, h=1e-4):
    """Finite-difference first fundamental form against ``|omega + conj(theta)|^2``.

    Uses the fourth-order five-point stencil in each direction.
    """
    offs = np.array([2 * h, h, -h, -2 * h, 2j * h, 1j * h, -1j * h, -2j * h])
    allz = (pts[:, None] + offs[None, :]).ravel()
    f = front_point(d.frame.at(allz)).reshape(len(pts), 8, 4)
    fx = (-f[:, 0] + 8 * f[:, 1] - 8 * f[:, 2] + f[:, 3]) / (12 * h)
    fy = (-f[:, 4] + 8 * f[:, 5] - 8 * f[:, 6] + f[:, 7]) / (12 * h)
    g = np.stack([minkowski(fx, fx), minkowski(fx, fy), minkowski(fy, fy)], -1)
    w, t = d.values_at([d.omega, d.theta], pts)
    a = w + np.conj(t)
    b = 1j * (w - np.conj(t))
    ref = np.stack([np.abs(a) ** 2, np.real(a * np.conj(b)), np.abs(b) ** 2], -1)
    scale = np.abs(w) ** 2 + np.abs(t) ** 2
    return float(np.max(np.max(np.abs(g - ref), -1) / scale))


def schwarzian_residuals(d, pts):
    """Relative residuals of ``s(omega) - 2Q - S(G)`` and ``s(theta) - 2Q - S(G*)``."""
    out = {}
    for form, g, key in ((d.omega, d.G, "omega"), (d.theta, d.Gs, "theta")):
        if g is None:
            continue
        sw, Q, sg = d.values_at([form_schwarzian(form), d.Q, schwarzian(g)], pts)
        den = np.abs(sw) + 2 * np.abs(Q) + np.abs(sg)
        res = np.abs(sw - 2 * Q - sg) / np.maximum(den, 1e-300)
        out[key] = float(np.max(res))
    return out


def hopf_parallel_residual(d, pts, t):
    (Q,) = d.values_at([d.Q], pts)
    (Qt,) = d.parallel(t).values_at([d.parallel(t).Q], pts)
    return float(np.max(np.abs(Qt - Q) / np.maximum(np.abs(Q), 1e-300)))


def core_identities(d, rep, rng, n=50):
    pts = sample_points(d, n, rng)

    def det(rep):
        E = d.frame.at(pts)
        rep.measure("det", float(np.max(np.abs(det2(E) - 1))), TOL["det"], points=n)

    def routes(rep):
        res = route_residuals(d, pts)
        if not res:
            rep.add("routes", "skip", reason="a single construction is available")
        for k, v in res.items():
            rep.measure(f"routes_{k}", v, TOL["routes"], points=n)

    def ff(rep):
        rep.measure("fundamental_form", fundamental_form_residual(d, pts), TOL["fundamental_form"])

    def schw(rep):
        r = schwarzian_residuals(d, pts)
        if not r:
            rep.add("schwarzian", "skip", reason="no Gauss maps")
        for k, v in r.items():
            rep.measure(f"schwarzian_{k}", v, TOL["schwarzian"])

    def hopf(rep):
        t = float(rng.uniform(-1, 1))
        rep.measure("hopf_parallel", hopf_parallel_residual(d, pts, t), TOL["hopf_parallel"], t=t)

    for name, fn in (("det", det), ("routes", routes), ("fundamental_form", ff),
                     ("schwarzian", schw), ("hopf_parallel", hopf)):
        rep.guard(name, fn)


# ---------------------------------------------------------------------------
# ends

def surface_degree(d, g):
    """Degree of a meromorphic function of the surface (both sheets when hyperelliptic)."""
    sheets = None if d.w is None else [g, d.flip(g)]
    return degree(g, sheets=sheets)


def ends_suite(d, rep):
    if d.G is None or d.Gs is None:
        for p in d.punctures:
            rep.guard(f"end {_label(p)}", lambda rep, p=p: rep.add(
                f"end {_label(p)}", "info", **_diag_json(d.end_diagnostics(p))))
        return
    profiles = []
    for p in d.punctures:
        def one(rep, p=p):
            try:
                prof = end_profile(d, p)
            except (NonRealAlpha, NotRegularEnd) as exc:
                rep.add(f"end {_label(p)}", "info", regular=False, reason=f"{type(exc).__name__}: {exc}")
                return
            profiles.append(prof)
            rep.add(f"end {_label(p)}", "pass", **prof.to_json())
        rep.guard(f"end {_label(p)}", one)

    def oss(rep):
        dg, ds = surface_degree(d, d.G), surface_degree(d, d.Gs)
        r = osserman(dg + ds, len(d.punctures), 0)
        rep.add("osserman", bool(r.holds), deg_G=dg, deg_Gs=ds, ends=len(d.punctures), **r.to_json())

    rep.guard("osserman", oss)


def _diag_json(diag):
    out = dict(diag)
    p = out.pop("point", None)
    if p is not None:
        out["point"] = p.to_json()
    return out


# ---------------------------------------------------------------------------
# caustic

def caustic_suite(d, rep, rng, n=50):
    if X.is_zero(d.omega) or X.is_zero(d.theta):
        rep.add("caustic", "skip", reason="Q vanishes identically (totally umbilic); no caustic")
        return
    umb = [p.z for p in d.umbilics if p.finite]
    pts = sample_points(d, n, rng, extra=umb)

    def forms(rep):
        f = C.caustic_forms(d, pts, tol=np.inf)
        rep.measure("caustic_routes", f["route_residual"], TOL["caustic_routes"])
        rep.measure("triple_identity", f["triple_residual"], TOL["triple"])
        qc = float(np.max(np.abs(f["Q_c"])))
        rep.add("horospherical_caustic", "info", max_abs_Q_c=qc, horospherical=qc < 1e-8)

    def nz(rep):
        m, ok = C.no_common_zeros(d, pts)
        rep.add("no_common_zeros", ok, m)

    def focal(rep):
        err, _ = C.focal_residual(d, pts)
        rep.measure("focal_property", err, TOL["focal"])

    for name, fn in (("caustic_routes", forms), ("no_common_zeros", nz), ("focal_property", focal)):
        rep.guard(name, fn)
    if d.G is None or d.Gs is None:
        return
    for q in d.umbilics:
        def u(rep, q=q):
            try:
                r = C.uend_profile(d, q)
            except DegenerateInput as exc:
                rep.add(f"uend {_label(q)}", "skip", reason=str(exc))
                return
            rep.add(f"uend {_label(q)}", bool(r["agrees"]), **r)
        rep.guard(f"uend {_label(q)}", u)
    for p in d.punctures:
        def e(rep, p=p):
            try:
                r = C.eend_profile(d, p)
            except FlatFrontError as exc:
                rep.add(f"eend {_label(p)}", "skip", reason=f"{type(exc).__name__}: {exc}")
                return
            rep.add(f"eend {_label(p)}", bool(r["agrees"]), **r)
        rep.guard(f"eend {_label(p)}", e)


# ---------------------------------------------------------------------------
# p-front

def tau_path(d, n=64):
    """Half circle about 0 from the basepoint to its image under ``z -> -z``."""
    z0 = d.basepoint
    th = float(np.angle(z0))
    return Contour.arc(0, abs(z0), th, th + np.pi, n=n)


def pfront_suite(d, rep, deck, params):
    if deck is None:
        rep.add("deck", "skip", reason="no deck transformation declared")
        return
    path = tau_path(d)

    def lift(rep):
        ok, defect = PF.adjusted_lift_check(d.frame, path, TOL["adjusted_lift"])
        dist = float(np.min([np.max(np.abs(defect - s * np.eye(2))) for s in (1, -1)]))
        rep.add("adjusted_lift", bool(ok), dist, TOL["adjusted_lift"],
                defect=defect, defect_class=PF.classify_defect(defect))

    def tau2(rep):
        ok, dist = PF.tau_squared_check(d.frame, path, TOL["tau_squared"])
        rep.add("tau_squared", bool(ok), dist, TOL["tau_squared"])

    n_co = n_non = 0
    ends = []

    def end_actions(rep):
        nonlocal n_co, n_non
        seen = []
        for p in d.punctures:
            if any(_same(p.z, -q) for q in seen):
                continue
            seen.append(p.z)
            r = PF.end_action(d, p, deck)
            m = PF.pfront_multiplicity(d, p, not r.coorientable)
            ends.append(p)
            n_co += bool(r.coorientable)
            n_non += not r.coorientable
            rep.add(f"end {_label(p)}", "pass", multiplicity=m, **r.to_json())

    def oss(rep):
        dg, ds = degree(d.G), degree(d.Gs)
        r = osserman(PF.total_degree(dg, ds), n_co, n_non)
        rep.add("osserman", bool(r.holds), deg_G=dg, deg_Gs=ds, **r.to_json())

    def orient(rep):
        pts = np.array([0.5 + 0.5j, -0.7 + 0.2j, 0.3 - 0.6j])
        res = PF.orientability_check(d.G, d.Gs, pts)
        res = float(res[0] if isinstance(res, tuple) else res)
        rep.measure("orientability", res, TOL["orientability"])

    def witness(rep):
        b = params.get("b")
        if b is None:
            rep.add("noncaustic_witness", "skip", reason="no parameter b")
            return
        w = PF.noncaustic_witness(float(np.real(b)))
        rep.add("noncaustic_witness", "pass" if w["obstructed"] else "info", **w)

    for name, fn in (("adjusted_lift", lift), ("tau_squared", tau2), ("end_actions", end_actions),
                     ("osserman", oss), ("orientability", orient), ("noncaustic_witness", witness)):
        rep.guard(name, fn)


def _label(p):
    if p.label:
        return p.label
    z = "inf" if not p.finite else f"{p.z.real:.6g}{p.z.imag:+.6g}i"
    return f"{z}/{p.sheet:+d}" if p.sheet != 1 else z


def _same(a, b):
    if np.isinf(a) or np.isinf(b):
        return bool(np.isinf(a) and np.isinf(b))
    return abs(a - b) < 1e-9


# ---------------------------------------------------------------------------

def run(d, suite, name="", seed=0, deck=None, params=None, n=50):
    """Run one suite (or ``all``) on front data ``d``; returns a list of reports."""
    suites = SUITES if suite == "all" else (suite,)
    out = []
    for s in suites:
        if s not in SUITES:
            raise ValueError(f"unknown suite {s!r}")
        rng = np.random.default_rng(seed)
        rep = Report(name or d.name, s)
        if s == "core-identities":
            core_identities(d, rep, rng, n)
        elif s == "ends":
            if deck is not None:
                rep.add("ends", "skip", reason="p-front ends are checked by the pfront suite")
            else:
                ends_suite(d, rep)
        elif s == "caustic":
            caustic_suite(d, rep, rng, n)
        else:
            pfront_suite(d, rep, deck, params or {})
        out.append(rep)
    return out
