"""Non-co-orientable p-fronts: deck involutions, adjusted lifts, multiplicities."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotAnInvolution
from .holo import expr as X
from .holo.contour import Contour
from .holo.series import ramification
from .legendrian import J, inv2, psl_close


@dataclass(frozen=True)
class DoubleCoverChart:
    """Cover ``zeta -> center + zeta**2`` of a punctured disk (``zeta**-2`` at infinity).

    The deck map ``tau(zeta) = -zeta`` is realized by continuation along a
    half circle in ``zeta``, which is a full loop around the puncture
    downstairs.
    """

    center: complex
    at_infinity: bool = False

    def to_base(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        return 1 / zeta ** 2 if self.at_infinity else self.center + zeta ** 2

    def base_loop(self, radius, n=128, theta0=0.3):
        """Loop downstairs that lifts to the ``tau`` path from ``zeta0`` to ``-zeta0``."""
        if self.at_infinity:
            R = 1.0 / radius
            return Contour.arc(0, R, -theta0, -theta0 - 2 * np.pi, n=n)
        return Contour.arc(self.center, radius, theta0, theta0 + 2 * np.pi, n=n)


@dataclass
class TauReport:
    swaps_maps: bool | None
    swaps_forms: bool
    fixes_forms: bool
    fixes_Q: bool
    residuals: dict = field(default_factory=dict)

    @property
    def coorientable(self):
        # a unit factor is the gauge freedom; anything else means no global normal
        return self.fixes_forms

    def to_json(self):
        return {"swaps_maps": self.swaps_maps, "swaps_forms": self.swaps_forms,
                "fixes_forms": self.fixes_forms, "fixes_Q": self.fixes_Q,
                "coorientable": self.coorientable,
                "residuals": {k: float(v) for k, v in self.residuals.items()}}


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def loop_action(omega, theta, loop, G=None, Gs=None, Q=None, tol=1e-6, sheet=None):
    """Continue the data once around ``loop`` and compare with the start.

    ``omega``, ``theta`` (and optionally ``G``, ``G*``, ``Q``) are given in
    the base coordinate; forms are compared as ``dz`` coefficients, which is
    legitimate because the loop closes in the base chart.  Forms are
    compared up to a common unit factor (the gauge freedom of the lift).
    """
    exprs = [omega, theta] + [e for e in (G, Gs, Q) if e is not None]
    vals, _ = loop.values(exprs, sheet=sheet)
    start = [v[0] for v in vals]
    end = [v[-1] for v in vals]
    res = {}
    w0, t0, w1, t1 = start[0], start[1], end[0], end[1]
    # swap: w1 = u t0, t1 = w0 / u with |u| = 1
    u = w1 / t0
    res["swap_forms"] = max(abs(abs(u) - 1), abs(t1 * u - w0) / abs(w0))
    v = w1 / w0
    res["fix_forms"] = max(abs(abs(v) - 1), abs(t1 * v - t0) / abs(t0))
    swaps = bool(res["swap_forms"] < tol)
    fixes = bool(res["fix_forms"] < tol)
    k = 2
    swaps_maps = None
    if G is not None and Gs is not None:
        res["swap_maps"] = max(abs(end[2] - start[3]), abs(end[3] - start[2])) / max(abs(start[2]), abs(start[3]), 1.0)
        res["fix_maps"] = max(abs(end[2] - start[2]), abs(end[3] - start[3])) / max(abs(start[2]), abs(start[3]), 1.0)
        swaps_maps = bool(res["swap_maps"] < tol)
        k = 4
    fixes_Q = True
    if Q is not None:
        res["Q"] = abs(end[k] - start[k]) / abs(start[k])
        fixes_Q = bool(res["Q"] < tol)
    return TauReport(swaps_maps, swaps, fixes, fixes_Q, res)


def cover_data(d, chart, radius, tol=1e-6):
    """Action of the deck transformation on the data near a puncture.

    ``d`` carries the data on the cover (in the base coordinate of the
    cover surface); the loop around the puncture in ``chart`` realizes
    ``tau``.  Returns a :class:`TauReport`.
    """
    loop = chart.base_loop(radius)
    start = complex(loop.start)
    path = Contour([d.basepoint, start])
    res = path.march([d.omega, d.theta] + [e for e in (d.G, d.Gs) if e is not None] + [d.Q])
    return loop_action(d.omega, d.theta, loop, d.G, d.Gs, d.Q, tol, sheet=res.end)


DECKS = {"-z": (lambda z: -z, lambda z: -np.ones_like(z))}


def deck_action(d, tau, dtau, path, tol=1e-6):
    """Compare the data at the end of ``path`` with the pull-back by ``tau``.

    ``path`` runs from ``a`` to ``tau(a)``.  Forms pull back as
    ``(tau* omega)(a) = omega(tau a) tau'(a)``; swaps are detected up to the
    unit factor of the gauge freedom.
    """
    exprs = [d.omega, d.theta] + [e for e in (d.G, d.Gs) if e is not None] + [d.Q]
    lead = Contour([d.basepoint, path.start]).march(exprs)
    vals, _ = path.values(exprs, sheet=lead.end)
    a = complex(path.start)
    if abs(complex(path.end) - tau(a)) > 1e-9 * max(1.0, abs(a)):
        raise NotAnInvolution("path does not end at tau of its start")
    j = complex(dtau(np.array(a)))
    start = [v[0] for v in vals]
    end = [v[-1] for v in vals]
    w0, t0 = start[0], start[1]
    w1, t1 = end[0] * j, end[1] * j
    res = {}
    u = w1 / t0
    res["swap_forms"] = max(abs(abs(u) - 1), abs(t1 * u - w0) / abs(w0))
    v = w1 / w0
    res["fix_forms"] = max(abs(abs(v) - 1), abs(t1 * v - t0) / abs(t0))
    swaps_maps = None
    k = 2
    if d.G is not None and d.Gs is not None:
        sc = max(abs(start[2]), abs(start[3]), 1.0)
        res["swap_maps"] = max(abs(end[2] - start[3]), abs(end[3] - start[2])) / sc
        swaps_maps = bool(res["swap_maps"] < tol)
        k = 4
    res["Q"] = abs(end[k] * j * j - start[k]) / abs(start[k])
    return TauReport(swaps_maps, bool(res["swap_forms"] < tol), bool(res["fix_forms"] < tol),
                     bool(res["Q"] < tol), res)


def end_action(d, p, deck="-z", radius=None, tol=1e-6):
    """Co-orientability of an end of a p-front given on a global double cover.

    An end fixed by the deck map is circled by a half loop from ``a`` to
    ``tau(a)``; an end moved by it is circled by a closed loop around one lift.
    """
    tau, dtau = DECKS[deck]
    r = radius or 0.5 * min([abs(q - p.z) for q in d.special_points()
                             if p.finite and abs(q - p.z) > 0] + [1.0])
    if not p.finite:
        R = 2 * max([abs(q) for q in d.special_points()] + [1.0])
        half = Contour.arc(0, R, 0.3, 0.3 + np.pi, n=128)
        return deck_action(d, tau, dtau, half, tol)
    if abs(tau(p.z) - p.z) < 1e-12:
        half = Contour.arc(p.z, r, 0.3, 0.3 + np.pi, n=128)
        return deck_action(d, tau, dtau, half, tol)
    loop = Contour.circle(p.z, r, theta0=0.3, n=128)
    exprs = [d.omega, d.theta] + [e for e in (d.G, d.Gs) if e is not None] + [d.Q]
    lead = Contour([d.basepoint, loop.start]).march(exprs)
    return loop_action(d.omega, d.theta, loop, d.G, d.Gs, d.Q, tol, sheet=lead.end)


def adjusted_lift_check(frame, tau_path, tol=1e-6):
    """Whether continuation along the ``tau`` path turns the lift into its dual.

    ``tau_path`` runs from the basepoint ``z0`` to ``tau(z0)``.  Returns
    ``(ok, defect)`` with ``defect = (E(z0)^-1 E(tau z0)) J^-1`` (``+-I``
    when the lift is adjusted).
    """
    E = frame.on_path(tau_path)
    M = inv2(E[0]) @ E[-1]
    defect = M @ inv2(J)
    d, ok = psl_close(defect, np.eye(2), tol)
    return bool(ok), defect


def classify_defect(defect, tol=1e-6):
    """Describe a defect matrix: identity, diagonal unitary, diagonal or general."""
    D = defect / np.sqrt(np.linalg.det(defect))
    off = max(abs(D[0, 1]), abs(D[1, 0]))
    if off > tol * max(1.0, np.max(np.abs(D))):
        return "general"
    _, ident = psl_close(D, np.eye(2), tol)
    if ident:
        return "identity"
    if abs(abs(D[0, 0]) - 1) < tol and abs(abs(D[1, 1]) - 1) < tol:
        return "diagonal-unitary"
    return "diagonal"


def tau_squared_check(frame, tau_path, tol=1e-6):
    """Continuing along the ``tau`` path twice must return the frame up to sign."""
    v = tau_path.vertices
    z0 = v[0]
    second = -v[::-1][1:] if np.allclose(v[-1], -z0) else None
    if second is None:
        raise NotAnInvolution("tau path does not end at -z0")
    # second half: image of the first half under z -> -z, run from -z0 back to z0
    full = Contour(np.concatenate([v, -v[1:]]))
    E = frame.on_path(full)
    d, ok = psl_close(E[-1], E[0], tol)
    return bool(ok), d


def pfront_multiplicity(d, p, noncoorientable):
    """Multiplicity of an end from the data on the double cover; halved when non-co-orientable."""
    cd = d.chart_data(p)
    r = cd["radius"]
    m = min(ramification(cd["G"], 0, radius=r)[0], ramification(cd["Gs"], 0, radius=r)[0])
    return m / 2 if noncoorientable else m


def total_degree(deg_G_cover, deg_Gs_cover, on_cover=True):
    """Total degree; halved when computed on the orientable double cover."""
    tot = deg_G_cover + deg_Gs_cover
    return tot / 2 if on_cover else tot


def complete_end_contradiction(complete, coorientable):
    """Complete ends are co-orientable; a complete non-co-orientable end is contradictory."""
    return bool(complete and not coorientable)


def orientability_check(G, Gs, points, h=1e-5):
    """Cauchy-Riemann residual of the transition ``G* o G^-1`` at sample points.

    The transition is evaluated through a Newton inverse of ``G``; its
    ``d/d(conj w)`` derivative must vanish.
    """
    G1 = G.diff()
    res = []
    for z in np.atleast_1d(points):
        w0 = complex(X.evaluate(G, z))

        def inv(w, z=z):
            x = complex(z)
            for _ in range(40):
                step = (complex(X.evaluate(G, x)) - w) / complex(X.evaluate(G1, x))
                x -= step
                if abs(step) < 1e-15 * max(1, abs(x)):
                    break
            return x

        T = lambda w: complex(X.evaluate(Gs, inv(w)))
        tx = (T(w0 + h) - T(w0 - h)) / (2 * h)
        ty = (T(w0 + 1j * h) - T(w0 - 1j * h)) / (2 * h)
        dbar = 0.5 * (tx + 1j * ty)
        res.append(abs(dbar) / max(abs(0.5 * (tx - 1j * ty)), 1e-300))
    return float(np.max(res))


def noncaustic_witness(b, z0=0.4 + 0.1j, tol=1e-6):
    """Monodromy of ``sqrt(Q_orig)`` around the end ``z = 0`` of the three-ended p-front.

    ``4 sqrt(Q_orig) = i u^b {A(z) - B(z) u^(-2b)} dz`` with
    ``u = (z - 1)/(z + 1)``, ``A = (z^2 + 2bz + 1)/(z(z^2 - 1))`` and
    ``B = (z^2 - 2bz + 1)/(z(z^2 - 1))``.  The loop around the end lifts to
    the half circle from ``z0`` to ``-z0``; the pulled-back form is compared
    with the original.  A factor other than ``+-1`` obstructs the p-front
    from being a caustic.
    """
    Z = X.Z
    u = (Z - 1) / (Z + 1)
    ub = X.power(u, b) if float(b) != int(b) else X.power(u, int(b))
    den = Z * (Z * Z - 1)
    A = (Z * Z + 2 * b * Z + 1) / den
    B = (Z * Z - 2 * b * Z + 1) / den
    F = X.Const(1j) * ub * (A - B / (ub * ub))
    r = abs(z0)
    th = np.angle(z0)
    path = Contour.arc(0, r, th, th + np.pi, n=64)
    vals, _ = path.values([F])
    f0, f1 = vals[0][0], vals[0][-1]
    factor = -f1 / f0
    dist = min(abs(factor - 1), abs(factor + 1))
    return {"b": float(b), "factor": [factor.real, factor.imag],
            "obstructed": bool(dist > tol), "distance": float(dist)}
