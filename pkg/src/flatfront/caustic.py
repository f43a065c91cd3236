"""Caustics of flat fronts: frames, Gauss maps, forms, end profiles, inverse construction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ends import end_profile
from .errors import (BetaDegenerate, DegenerateInput, FlatFrontError, IrregularEnd, NoAdmissibleS, NotUmbilic,
                     QsVanishesAtBasepoint, RouteDisagreement, UmbilicInRegion)
from .frontdata import FrontData, Point, from_forms
from .holo import expr as X
from .holo.contour import Contour, detour
from .holo.series import local_series, ramification
from .legendrian import ExprSource, LegendrianFrame, dagger, inv2
from .pfront import loop_action

SQRT_I = np.exp(0.25j * np.pi)
GENERIC_E0 = np.array([[1.0, 1.0], [1.0j, 1.0 + 1.0j]])


@dataclass
class CausticData:
    parent: FrontData
    sign: int
    beta: X.Expr | None
    G_c: X.Expr | None
    Gs_c: X.Expr | None
    omega_c: X.Expr
    theta_c: X.Expr
    front: FrontData

    @property
    def Q_c(self):
        return self.omega_c * self.theta_c

    @property
    def rho_c(self):
        return self.theta_c / self.omega_c


def _dlog_rho(d):
    return d.theta.diff() / d.theta - d.omega.diff() / d.omega


def beta_expr(G, Gs, sign=1):
    """``beta = +-sqrt(dG/dG*)``; raises when it is constant ``+-1``."""
    b = X.Const(sign) * X.sqrt(G.diff() / Gs.diff())
    return b


def _beta_degenerate(beta):
    return isinstance(beta, X.Const) and min(abs(beta.value - 1), abs(beta.value + 1)) < 1e-14


def caustic_gauss(G, Gs, beta):
    """``((G + beta G*)/(1 + beta), (G - beta G*)/(1 - beta))``."""
    if _beta_degenerate(beta):
        raise BetaDegenerate("dG = +-dG* identically")
    one = X.Const(1)
    return (G + beta * Gs) / (one + beta), (G - beta * Gs) / (one - beta)


def caustic_entries(G, Gs, beta):
    """Entries of the caustic lift built from the Gauss maps and ``beta``."""
    pref = X.Const(SQRT_I) / X.sqrt(X.Const(2) * beta * (G - Gs))
    one = X.Const(1)
    A = pref * (G + beta * Gs) * X.Const(SQRT_I)
    B = pref * X.Const(1j / SQRT_I) * (G - beta * Gs)
    C = pref * (one + beta) * X.Const(SQRT_I)
    D = pref * X.Const(1j / SQRT_I) * (one - beta)
    return [A, B, C, D]


def forms_from_gauss(G, Gs, beta):
    """Caustic forms in terms of ``G``, ``G*`` and ``beta``."""
    G1, Gs1 = G.diff(), Gs.diff()
    L = G1.diff() / G1 - Gs1.diff() / Gs1
    one, two, q = X.Const(1), X.Const(2), X.Const(0.25)
    h = Gs1 / (G - Gs)
    w = q * (two * (beta + one) * (beta + one) * h - L)
    t = q * (two * (beta - one) * (beta - one) * h - L)
    return w, t


def forms_from_hopf(d, s0):
    """``i sqrt(Q) + dlog(rho)/4`` and ``-i sqrt(Q) + dlog(rho)/4`` with the sign ``s0``."""
    r = X.Const(s0) * X.sqrt(d.Q)
    dl = X.Const(0.25) * _dlog_rho(d)
    return X.Const(1j) * r + dl, X.Const(-1j) * r + dl


def frame_route_values(d, z, sign=1):
    """Caustic lift and forms at ``z`` from the frame of ``d`` (any route).

    Uses ``G' = -omega/C^2``, ``G*' = theta/D^2`` and ``G - G* = 1/(CD)``.
    Returns ``(E_c, omega_c, theta_c)``.  The construction commutes with
    rigid motions, so a generic motion is applied when ``C`` or ``D``
    vanishes and undone afterwards.
    """
    z = np.asarray(z, dtype=complex)
    w, t, r, w1, t1 = d.values_at([d.omega, d.theta, X.sqrt(-d.omega / d.theta),
                                   d.omega.diff(), d.theta.diff()], z)
    E = d.frame.at(z)
    scale = np.max(np.abs(E), axis=(-1, -2))
    if np.any(np.minimum(np.abs(E[..., 1, 0]), np.abs(E[..., 1, 1])) < 1e-8 * scale):
        E = GENERIC_E0 @ E
        Ec, wc, tc = _frame_route(E, w, t, r, w1, t1, sign)
        return inv2(GENERIC_E0) @ Ec, wc, tc
    return _frame_route(E, w, t, r, w1, t1, sign)


def _frame_route(E, w, t, r, w1, t1, sign):
    C, D = E[..., 1, 0], E[..., 1, 1]
    beta = sign * (D / C) * r
    h = t * C / D
    L = w1 / w - t1 / t - 2 * D * w / C + 2 * C * t / D
    wc = 0.25 * (2 * (beta + 1) ** 2 * h - L)
    tc = 0.25 * (2 * (beta - 1) ** 2 * h - L)
    # E_c = E diag(1/C, 1/D) [[1, i], [beta, -i beta]] diag(sqrt i, 1/sqrt i) * scalar
    K = np.zeros(C.shape + (2, 2), dtype=complex)
    K[..., 0, 0] = SQRT_I / C
    K[..., 0, 1] = 1j / SQRT_I / C
    K[..., 1, 0] = beta * SQRT_I / D
    K[..., 1, 1] = -1j * beta / SQRT_I / D
    s = SQRT_I * np.sqrt(C * D / (2 * beta))
    Ec = s[..., None, None] * (E @ K)
    return Ec, wc, tc


def _basepoint_sign(d, wa0, ta0):
    """Sign of ``sqrt(Q)`` at the basepoint that matches the Gauss-map route."""
    wb, tb = forms_from_hopf(d, 1)
    vb = d.values_at([wb, tb], d.basepoint)
    err_p = abs(vb[1] - ta0) + abs(vb[0] - wa0)
    wb, tb = forms_from_hopf(d, -1)
    vb = d.values_at([wb, tb], d.basepoint)
    err_m = abs(vb[1] - ta0) + abs(vb[0] - wa0)
    return 1 if err_p <= err_m else -1


def caustic_data(d, sign=1):
    """Caustic of ``d`` as a p-front.

    With both Gauss maps available the closed-form lift is used; otherwise
    the forms come from ``Q`` and ``rho`` and the lift is integrated.
    """
    if abs(complex(d.values_at([d.Q], d.basepoint)[0])) < 1e-12:
        raise UmbilicInRegion("the basepoint is an umbilic")
    if d.G is not None and d.Gs is not None:
        beta = beta_expr(d.G, d.Gs, sign)
        w, t = forms_from_gauss(d.G, d.Gs, beta)
        entries = caustic_entries(d.G, d.Gs, beta)
        try:
            Gc, Gsc = caustic_gauss(d.G, d.Gs, beta)
        except BetaDegenerate:
            Gc = entries[0] / entries[2]
            Gsc = None
        fr = LegendrianFrame(ExprSource(entries, d.basepoint), w, t, d.frame.left)
        front = FrontData(omega=w, theta=t, frame=fr, basepoint=d.basepoint, G=Gc, Gs=Gsc,
                          punctures=list(d.punctures), umbilics=list(d.umbilics),
                          branch_points=list(d.branch_points), w=d.w, sheet=d.sheet,
                          window=d.window, name=(d.name + " caustic").strip(),
                          avoid=list(d.avoid))
        return CausticData(d, sign, beta, Gc, Gsc, w, t, front)
    Ec0, wa0, ta0 = frame_route_values(d, np.array([d.basepoint]), sign)
    s0 = _basepoint_sign(d, complex(wa0[0]), complex(ta0[0]))
    w, t = forms_from_hopf(d, s0)
    front = from_forms(w, t, d.basepoint, E0=Ec0[0], punctures=list(d.punctures),
                       umbilics=list(d.umbilics), branch_points=list(d.branch_points),
                       w=d.w, sheet=d.sheet, window=d.window,
                       name=(d.name + " caustic").strip(), avoid=list(d.avoid))
    return CausticData(d, sign, None, None, None, w, t, front)


def caustic_forms(d, points, sign=1, tol=1e-8):
    """Caustic forms at ``points`` by both routes; they must agree to ``tol``.

    Returns a dict with the forms, ``Q_c``, ``rho_c``, the route residual,
    the triple-identity residual and the sign of ``sqrt(Q)`` used.
    """
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    if d.G is not None and d.Gs is not None:
        beta = beta_expr(d.G, d.Gs, sign)
        wa, ta = forms_from_gauss(d.G, d.Gs, beta)
        wa_v, ta_v = d.values_at([wa, ta], pts)
        w0, t0 = d.values_at([wa, ta], d.basepoint)
    else:
        _, wa_v, ta_v = frame_route_values(d, pts, sign)
        _, w0, t0 = frame_route_values(d, np.array([d.basepoint]), sign)
        w0, t0 = complex(w0[0]), complex(t0[0])
    s0 = _basepoint_sign(d, complex(w0), complex(t0))
    wb, tb = forms_from_hopf(d, s0)
    wb_v, tb_v, Q, dl = d.values_at([wb, tb, d.Q, _dlog_rho(d)], pts)
    scale = np.maximum(np.abs(wa_v) + np.abs(ta_v), 1e-300)
    route = float(np.max((np.abs(wa_v - wb_v) + np.abs(ta_v - tb_v)) / scale))
    if route > tol:
        raise RouteDisagreement(f"caustic routes differ by {route:.3g}")
    Qc = wa_v * ta_v
    rhs = Q + (dl / 4) ** 2
    triple = float(np.max(np.abs(Qc - rhs) / np.maximum(np.abs(Q) + np.abs(dl / 4) ** 2, 1e-300)))
    with np.errstate(all="ignore"):
        rho_c = ta_v / wa_v
    return {"omega_c": wa_v, "theta_c": ta_v, "Q_c": Qc, "rho_c": rho_c,
            "route_residual": route, "triple_residual": triple, "sqrtQ_sign": s0}


def no_common_zeros(d, points, sign=1, rel=1e-10):
    """Minimum over ``points`` of ``max(|omega_c|, |theta_c|)`` relative to the sample scale."""
    f = caustic_forms(d, points, sign)
    m = np.maximum(np.abs(f["omega_c"]), np.abs(f["theta_c"]))
    return float(np.min(m) / max(np.max(m), 1e-300)), bool(np.min(m) > rel * np.max(m))


def caustic_points(d, z, sign=1):
    """``C_f = E_c E_c*`` at ``z`` as Hermitian matrices."""
    c = caustic_data(d, sign) if d.G is not None and d.Gs is not None else None
    if c is not None:
        Ec = c.front.frame.at(z)
    else:
        Ec, _, _ = frame_route_values(d, np.asarray(z, dtype=complex), sign)
    return Ec @ dagger(Ec)


def focal_residual(d, z, sign=1):
    """Distance between the caustic and the parallel front ``f_t`` with ``|rho| = e^{2t}``."""
    z = np.asarray(z, dtype=complex)
    Cf = caustic_points(d, z, sign)
    E = d.frame.at(z)
    (rho,) = d.values_at([d.rho], z)
    t = 0.5 * np.log(np.abs(rho))
    Dg = np.zeros(z.shape + (2, 2))
    Dg[..., 0, 0] = np.exp(t)
    Dg[..., 1, 1] = np.exp(-t)
    ft = E @ Dg @ dagger(E)
    err = np.max(np.abs(ft - Cf), axis=(-1, -2)) / np.maximum(np.max(np.abs(ft), axis=(-1, -2)), 1.0)
    return float(np.max(err)), t


def point_invariants(F):
    """Hermitian residual, determinant and trace of matrices representing points of H^3."""
    herm = float(np.max(np.abs(F - dagger(F))))
    det = np.real(F[..., 0, 0] * F[..., 1, 1] - F[..., 0, 1] * F[..., 1, 0])
    tr = np.real(F[..., 0, 0] + F[..., 1, 1])
    return herm, det, tr


# ---------------------------------------------------------------------------
# caustic ends

def _not_exact_cylinder(w, t, radius, n=64):
    """Residual of the best fit ``theta_c = k omega_c`` on two circles."""
    zs = np.concatenate([radius * 0.5 * np.exp(2j * np.pi * np.arange(n) / n),
                         radius * 0.25 * np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)])
    c = Contour(np.concatenate([[radius * 0.5], zs]))
    vals, _ = c.values([w, t])
    wv, tv = vals[0][1:], vals[1][1:]
    k = np.vdot(wv, tv) / np.vdot(wv, wv)
    return float(np.linalg.norm(tv - k * wv) / np.linalg.norm(tv)), complex(k)


def _gauss_multiplicity(front, p, half):
    cd = front.chart_data(p)
    r = cd["radius"]
    if cd["G"] is None or cd["Gs"] is None:
        raise BetaDegenerate("caustic Gauss maps are not both defined")
    kg = ramification(cd["G"], 0, radius=r)[0]
    ks = ramification(cd["Gs"], 0, radius=r)[0]
    m = min(kg, ks)
    return (m / 2 if half else m), {"r_Gc": kg, "r_Gsc": ks}


def _caustic_end(d, p, c, cover):
    """Measured data of the caustic end over ``p``.

    ``cover`` asks for the double cover of the surface chart (odd order of
    ``Q``); it cannot be combined with an end that already sits over a
    branch point of the projection.
    """
    if cover and p.cover:
        raise IrregularEnd("odd order of Q at a branch point of the projection")
    q = Point(p.z, cover=cover or p.cover, sheet=p.sheet, radius=p.radius, label=p.label)
    m, ram = _gauss_multiplicity(c.front, q, cover)
    diag = c.front.end_diagnostics(q)
    rho_lim = c.front.rho_limit(q)
    loop_r = c.front.chart_data(Point(p.z, sheet=p.sheet))["radius"]
    center = p.z if p.finite else 0.0
    if not p.finite:
        loop_r = 1.0 / loop_r
    loop = Contour.circle(center, loop_r, theta0=0.3, turns=2 if p.cover else 1, n=128)
    lead = Contour(detour(c.front.basepoint, loop.start, c.front.special_points(), clearance=0.02))
    lead = lead.march([c.omega_c, c.theta_c])
    act = loop_action(c.omega_c, c.theta_c, loop, c.G_c, c.Gs_c, tol=1e-6, sheet=lead.end)
    cd = c.front.chart_data(q)
    resid, k = _not_exact_cylinder(cd["omega"], cd["theta"], cd["radius"])
    return {
        "multiplicity": m, **ram,
        "coOrientable": act.coorientable,
        "tau_swaps_forms": act.swaps_forms,
        "tau_swaps_maps": act.swaps_maps,
        "ord_omega_c": diag["ord_omega"], "ord_theta_c": diag["ord_theta"],
        "cylindrical": diag["cylindrical"], "weaklyComplete": diag["weaklyComplete"],
        "rho_c_limit": rho_lim,
        "singularAccumulation": bool(np.isfinite(rho_lim) and abs(rho_lim - 1) < 1e-6),
        "cylinder_fit_residual": resid, "cylinder_fit_k": [k.real, k.imag],
    }


def _order_of_Q(d, p):
    cd = d.chart_data(Point(p.z, cover=p.cover, sheet=p.sheet))
    return local_series(cd["Q"], 0, radius=cd["radius"]).order


def uend_profile(d, q, sign=1):
    """Caustic end over the umbilic ``q``; compares with the predicted values."""
    oq = _order_of_Q(d, q)
    if oq <= 0:
        raise NotUmbilic(f"Q does not vanish at {q.z}")
    cd = d.chart_data(Point(q.z, cover=q.cover, sheet=q.sheet))
    rg = ramification(cd["G"], 0, radius=cd["radius"])[0]
    rs = ramification(cd["Gs"], 0, radius=cd["radius"])[0]
    if rg > 1 and rs > 1:
        raise DegenerateInput(f"both Gauss maps ramify at {q.z} ({rg}, {rs}); "
                              "the lift is not an immersion there")
    c = caustic_data(d, sign)
    got = _caustic_end(d, q, c, cover=bool(oq % 2))
    expected = {"multiplicity": oq / 2, "coOrientable": oq % 2 == 0, "endType": "cylindrical",
                "singularAccumulation": True}
    got["endType"] = "cylindrical" if got["cylindrical"] else "noncylindrical"
    got["exactCylinder"] = got["cylinder_fit_residual"] < 1e-6
    return {"point": q.to_json(), "ord_Q": oq, "measured": got, "expected": expected,
            "agrees": _agrees(got, expected) and not got["exactCylinder"]}


def eend_profile(d, p, sign=1):
    """Caustic end over the end ``p`` of ``d``; compares with the predicted values."""
    try:
        prof = end_profile(d, p)
    except FlatFrontError as exc:
        raise IrregularEnd(str(exc)) from exc
    try:
        oq = _order_of_Q(d, p)
    except FlatFrontError as exc:
        raise IrregularEnd(f"order of Q at the end is undefined: {exc}") from exc
    mf = prof.multiplicity
    if oq >= -2:
        expected = {"multiplicity": oq / 2 + mf + 1, "coOrientable": oq % 2 == 0,
                    "endType": "cylindrical", "singularAccumulation": prof.type != "snowman"}
    else:
        expected = {"multiplicity": mf, "coOrientable": True, "endType": "noncylindrical",
                    "singularAccumulation": False}
    c = caustic_data(d, sign)
    got = _caustic_end(d, p, c, cover=bool(oq % 2))
    got["endType"] = "cylindrical" if got["cylindrical"] else "noncylindrical"
    return {"point": p.to_json(), "ord_Q": oq, "m_f": mf, "type_f": prof.type,
            "measured": got, "expected": expected, "agrees": _agrees(got, expected)}


def _agrees(got, expected):
    for k, v in expected.items():
        g = got[k]
        if isinstance(v, float) or isinstance(g, float):
            if abs(float(g) - float(v)) > 1e-9:
                return False
        elif g != v:
            return False
    return True


# ---------------------------------------------------------------------------
# inverse construction

def hopf_s(omega_c, theta_c, s):
    d = X.Const(np.exp(1j * s)) * omega_c - X.Const(np.exp(-1j * s)) * theta_c
    return X.Const(-0.25) * d * d


def admissible_s(omega_c, theta_c, z0, samples=16, tol=1e-10):
    """Values ``s`` in ``[0, 2 pi)`` with ``Q_s(z0) != 0``."""
    ss = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    w, t = (complex(v) for v in X.evaluate([omega_c, theta_c], z0))
    ok = [s for s in ss if abs(np.exp(1j * s) * w - np.exp(-1j * s) * t) > tol * max(abs(w) + abs(t), 1e-300)]
    if not ok:
        raise NoAdmissibleS("Q_s vanishes at the basepoint for every sampled s")
    return ok


def inverse_caustic(omega_c, theta_c, s, z0, E0=None, **kw):
    """A front whose caustic has the forms ``omega_c``, ``theta_c``.

    ``rho = exp(2 int (e^{is} omega_c + e^{-is} theta_c))`` from ``z0`` and
    ``omega theta = Q_s``; the lift is integrated.  The default initial
    lift has four nonzero entries so that both Gauss maps are finite and
    distinct at ``z0``.
    """
    if E0 is None:
        E0 = GENERIC_E0
    Xf = X.Const(np.exp(1j * s)) * omega_c
    Yf = X.Const(np.exp(-1j * s)) * theta_c
    z0 = complex(z0)
    xv, yv = (complex(v) for v in X.evaluate([Xf, Yf], z0))
    if abs(xv - yv) < 1e-12 * max(abs(xv) + abs(yv), 1e-300):
        raise QsVanishesAtBasepoint(f"Q_s(z0) = 0 for s = {s}")
    P = X.Primitive(Xf + Yf, z0)
    h = X.Const(0.5j) * (Xf - Yf)
    theta = h * X.exp(P)
    omega = h * X.exp(-P)
    return from_forms(omega, theta, z0, E0=E0, **kw)


def roundtrip(omega_c, theta_c, s, z0, points, **kw):
    """Invariants of the input caustic against those of the caustic of the inverse construction.

    The lift sign ``beta -> -beta`` exchanges the caustic forms; the sign is
    chosen at ``z0`` to match ``|rho_c|`` (either choice gives the same
    ``Q_c`` and ``|omega_c|^2 + |theta_c|^2``).
    """
    f = inverse_caustic(omega_c, theta_c, s, z0, **kw)
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    c = Contour(np.stack([np.full(pts.shape, complex(z0)), pts]))
    vals, _ = c.values([omega_c, theta_c])
    w, t = vals[0][-1], vals[1][-1]
    w0, t0 = (complex(v) for v in X.evaluate([omega_c, theta_c], z0))
    best = None
    for sg in (1, -1):
        f0 = caustic_forms(f, np.array([z0]), sign=sg)
        r0 = abs(f0["rho_c"][0])
        e = abs(np.log(r0) - np.log(abs(t0 / w0)))
        if best is None or e < best[0]:
            best = (e, sg)
    sg = best[1]
    out = caustic_forms(f, pts, sign=sg)
    wc, tc = out["omega_c"], out["theta_c"]
    rel = lambda a, b: float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
    return {
        "front": f, "sign": sg,
        "Q_c": rel(wc * tc, w * t),
        "ds2_11": rel(np.abs(wc) ** 2 + np.abs(tc) ** 2, np.abs(w) ** 2 + np.abs(t) ** 2),
        "abs_rho_c": rel(np.abs(tc / wc), np.abs(t / w)),
        "route_residual": out["route_residual"],
    }
