"""Front data on a chart: forms, invariants, singular locus, end diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field, replace as dc_replace

import numpy as np

from .errors import (DegenerateMetric, EssentialOrIrregular, ExcludedParameter,
                     NotFiniteType, ZeroForm)
from .holo import expr as X
from .holo.contour import Contour, detour
from .holo.series import Chart, is_inf, local_series, metric_order, modulus_limit, schwarzian, form_schwarzian
from .legendrian import ExprSource, LegendrianFrame, OdeSource, frame_from_G_omega, frame_from_gauss_pair


@dataclass(frozen=True)
class Point:
    """A marked point of the surface in the chart ``z``.

    ``cover`` means the surface coordinate there is ``zeta`` with
    ``z = z0 + zeta**2`` (branch point of the ``z`` projection).  ``sheet``
    selects the sign of the hyperelliptic coordinate.  ``radius`` is the
    radius of the end disk in the base plane (``1/R`` at infinity).
    """

    z: complex
    cover: bool = False
    sheet: int = 1
    radius: float = 0.1
    label: str = ""

    @property
    def chart(self):
        return Chart(self.z, self.cover)

    @property
    def finite(self):
        return not is_inf(self.z)

    def to_json(self):
        z = "inf" if not self.finite else [self.z.real, self.z.imag]
        return {"z": z, "cover": self.cover, "sheet": self.sheet,
                "radius": self.radius, "label": self.label}


@dataclass
class FrontData:
    omega: X.Expr
    theta: X.Expr
    frame: LegendrianFrame
    basepoint: complex
    G: X.Expr | None = None
    Gs: X.Expr | None = None
    punctures: list = field(default_factory=list)
    umbilics: list = field(default_factory=list)
    branch_points: list = field(default_factory=list)
    w: X.Expr | None = None
    sheet: int = 1
    window: tuple = (-2.0, 2.0, -2.0, 2.0)
    euler: int | None = None
    name: str = ""
    avoid: list = field(default_factory=list)

    # ------------------------------------------------------------------
    @property
    def Q(self):
        return self.omega * self.theta

    @property
    def rho(self):
        return self.theta / self.omega

    @property
    def route(self):
        return self.frame.route

    def special_points(self):
        pts = [p.z for p in self.punctures + self.umbilics if p.finite]
        return pts + [complex(b) for b in self.branch_points] + [complex(a) for a in self.avoid]

    def flip(self, e):
        """``e`` with the hyperelliptic coordinate negated."""
        if self.w is None or e is None:
            return e
        return X.replace(e, {self.w: -self.w})

    def other_sheet(self):
        """The same data continued from the basepoint on the opposite sheet."""
        if self.w is None:
            return self
        f = self.flip
        src = self.frame.source
        if isinstance(src, ExprSource):
            nsrc = ExprSource([f(e) for e in src.entries], src.basepoint)
        else:
            nsrc = OdeSource(f(src.omega), f(src.theta), src.basepoint, src.E0)
        fr = LegendrianFrame(nsrc, f(self.frame.omega), f(self.frame.theta),
                             self.frame.left, self.frame.right)
        return dc_replace(self, omega=f(self.omega), theta=f(self.theta), frame=fr,
                          G=f(self.G), Gs=f(self.Gs), sheet=-self.sheet)

    def with_frame(self, frame):
        return dc_replace(self, frame=frame, omega=frame.omega, theta=frame.theta)

    def parallel(self, t):
        return self.with_frame(self.frame.parallel(t))

    def dual(self):
        out = self.with_frame(self.frame.dual())
        return dc_replace(out, G=self.Gs, Gs=self.G)

    def gauge(self, s):
        return self.with_frame(self.frame.gauge(s))

    def moved(self, a):
        from .legendrian import mobius_expr
        out = self.with_frame(self.frame.moved(a))
        G = mobius_expr(a, self.G) if self.G is not None else None
        Gs = mobius_expr(a, self.Gs) if self.Gs is not None else None
        return dc_replace(out, G=G, Gs=Gs)

    # evaluation ------------------------------------------------------
    def values_at(self, exprs, z):
        """Values of ``exprs`` at ``z`` continued along straight segments from the basepoint."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        c = Contour(np.stack([np.full(flat.shape, self.basepoint), flat]))
        vals, _ = c.values(list(exprs), sheet=None)
        return [v[-1].reshape(z.shape) for v in vals]

    def grid_values(self, exprs, xs, ys):
        """Values on the grid ``xs + i ys`` (shape ``(len(ys), len(xs))``) and the grid sheet."""
        return grid_values(list(exprs), self.basepoint, xs, ys, self.special_points())

    def fundamental_forms(self, z):
        """``ds^2``, ``dh^2`` and ``ds^2_{1,1}`` as 2x2 real matrices in ``(x, y)``."""
        w, t = self.values_at([self.omega, self.theta], z)
        return fundamental_forms_from(w, t)

    def singular_locus(self, t=0.0, window=None, grid=256, refine=40, nodes=False):
        """Polylines where ``|rho| = e^{2t}`` (singular set of the parallel front at ``t``).

        With ``nodes`` each polyline comes with the grid indices ``(row, col)``
        of the node its points were refined from.
        """
        return singular_locus(self, t, window or self.window, grid, refine, nodes)

    def chart_data(self, p):
        """``omega``, ``theta``, ``Q``, ``G``, ``G*`` pulled back to the chart at ``p``."""
        src = self if p.sheet == self.sheet else self.other_sheet()
        ch = p.chart
        d = min([abs(q - p.z) for q in self.special_points() if p.finite and abs(q - p.z) > 0] + [1.0])
        if not p.finite:
            d = max([abs(q) for q in self.special_points()] + [1.0])
            d = 2 * d
        rz = ch.zeta_radius(d) * 0.5
        anchor = complex(rz)
        out = {"radius": rz, "chart": ch}
        for key, e, deg in (("omega", src.omega, 1), ("theta", src.theta, 1), ("Q", src.Q, 2),
                            ("G", src.G, 0), ("Gs", src.Gs, 0)):
            out[key] = None if e is None else ch.pull(e, deg, anchor=anchor)
        return out

    def end_diagnostics(self, p):
        """Orders of ``|omega|^2``, ``|theta|^2`` and ``Q`` at ``p`` in the surface coordinate."""
        cd = self.chart_data(p)
        r = cd["radius"]
        out = {"point": p}
        try:
            mw = metric_order(cd["omega"], 0, r)
            mt = metric_order(cd["theta"], 0, r)
        except EssentialOrIrregular:
            out.update(finiteType=False, weaklyComplete=None, cylindrical=None,
                       ord_omega=None, ord_theta=None, ord_Q=None)
            return out
        try:
            oq = local_series(cd["Q"], 0, radius=r).order
        except Exception:
            oq = None
        lo = min(mw, mt)
        if abs(lo + 1) < 1e-6:
            wc = _radial_divergence(cd["omega"], cd["theta"], r)
        else:
            wc = lo < -1
        out.update(finiteType=True, weaklyComplete=bool(wc), cylindrical=bool(abs(mw - mt) < 1e-6),
                   ord_omega=mw, ord_theta=mt, ord_Q=oq)
        return out

    def rho_limit(self, p):
        """Limit of ``|rho|`` at ``p`` (``0``, ``inf`` or a positive number)."""
        cd = self.chart_data(p)
        r = cd["radius"]
        try:
            mw = metric_order(cd["omega"], 0, r)
            mt = metric_order(cd["theta"], 0, r)
        except EssentialOrIrregular:
            raise NotFiniteType(f"end {p.label or p.z} is not of finite type") from None
        k = mt - mw
        if abs(k) > 1e-6:
            return 0.0 if k > 0 else np.inf
        rho = cd["theta"] / cd["omega"]
        try:
            lim, _ = modulus_limit(rho, 0, r, order=0.0)
        except EssentialOrIrregular:
            raise NotFiniteType(f"end {p.label or p.z} is not of finite type") from None
        return lim

    def excluded_parallel_params(self):
        """Parameters ``t`` at which some end has ``|rho| -> e^{2t}``.

        Ends that are not of finite type have no limit and exclude nothing.
        """
        out = []
        for p in self.punctures:
            try:
                lim = self.rho_limit(p)
            except NotFiniteType:
                continue
            if 0 < lim < np.inf:
                out.append((0.5 * float(np.log(lim)), p))
        return sorted(out, key=lambda x: x[0])

    def check_parameter(self, t, tol=1e-6):
        for te, p in self.excluded_parallel_params():
            if abs(t - te) < tol:
                raise ExcludedParameter(f"t={t} is excluded by the end {p.label or p.z}")


def fundamental_forms_from(w, t):
    w = np.asarray(w, dtype=complex)
    t = np.asarray(t, dtype=complex)
    a = w + np.conj(t)
    b = 1j * (w - np.conj(t))
    g11 = np.abs(a) ** 2
    g22 = np.abs(b) ** 2
    g12 = np.real(a * np.conj(b))
    ds2 = np.stack([np.stack([g11, g12], -1), np.stack([g12, g22], -1)], -2)
    eye = np.eye(2)
    dh2 = (np.abs(t) ** 2 - np.abs(w) ** 2)[..., None, None] * eye
    ds11 = (np.abs(t) ** 2 + np.abs(w) ** 2)[..., None, None] * eye
    return {"ds2": ds2, "dh2": dh2, "ds2_11": ds11}


def _radial_divergence(w, t, r, rays=8):
    """Length of rays into the puncture for ``ds^2_{1,1}``: diverges like ``log``?"""
    dens = lambda z: np.sqrt(np.abs(X.evaluate(w, z, check=False)) ** 2
                             + np.abs(X.evaluate(t, z, check=False)) ** 2)
    lengths = []
    for eps in (1e-2, 1e-4, 1e-6):
        s = np.exp(np.linspace(np.log(eps * r), np.log(r), 400))
        tot = 0.0
        for k in range(rays):
            z = s * np.exp(2j * np.pi * k / rays + 0.1j)
            f = dens(z)
            tot += np.trapezoid(f, s)
        lengths.append(tot / rays)
    inc1 = lengths[1] - lengths[0]
    inc2 = lengths[2] - lengths[1]
    return inc1 > 0 and inc2 > 0.5 * inc1


# ---------------------------------------------------------------------------

def grid_values(exprs, basepoint, xs, ys, avoid=()):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    return sweep_values(exprs, basepoint, xs[:, None] + 1j * ys[None, :], avoid, transpose=True)


def sweep_values(exprs, basepoint, P, avoid=(), transpose=False):
    """Values of ``exprs`` on ``P`` continued like ``LegendrianFrame.sweep``.

    With ``transpose`` the results are laid out as ``P.T``.
    """
    P = np.asarray(P, dtype=complex)
    lead = detour(basepoint, P[0, 0], avoid, clearance=0.02)
    col = Contour(np.concatenate([lead[:-1], P[0]]))
    res = col.march(exprs)
    from .legendrian import _stack_sheets
    start = _stack_sheets(res.vertex_sheets[len(lead) - 1:]) if exprs and any(e.multivalued for e in exprs) else None
    Zg = P.T if transpose else P
    if start is None:
        return X.evaluate(exprs, Zg, check=False), None
    sheets = Contour(P).march(exprs, sheet=start).vertex_sheets
    ax = 1 if transpose else 0
    big = X.Sheet(Zg)
    big.state = {k: np.stack([s.state[k] for s in sheets], axis=ax) for k in sheets[0].state}
    big.args = {k: np.stack([s.args[k] for s in sheets], axis=ax) for k in sheets[0].args}
    return X.evaluate(exprs, Zg, sheet=big, check=False), big


def branch_mask(sheet, shape):
    """Grid nodes next to a branch cut of the continuation (values jump between neighbours)."""
    bad = np.zeros(shape, dtype=bool)
    if sheet is None:
        return bad
    for node, st in sheet.state.items():
        st = np.asarray(st)
        for ax in (0, 1):
            a = np.take(st, range(st.shape[ax] - 1), axis=ax)
            b = np.take(st, range(1, st.shape[ax]), axis=ax)
            if isinstance(node, X.Sqrt):
                jump = np.abs(a - b) > np.abs(a + b)
            elif isinstance(node, (X.Log, X.RealPow)):
                jump = np.abs(np.imag(a - b)) > np.pi / 2
            else:
                jump = np.abs(a - b) > 1.0
            sl_a = [slice(None)] * 2
            sl_b = [slice(None)] * 2
            sl_a[ax] = slice(0, -1)
            sl_b[ax] = slice(1, None)
            bad[tuple(sl_a)] |= jump
            bad[tuple(sl_b)] |= jump
    return bad


def singular_locus(d, t, window, grid, refine, nodes=False):
    from skimage.measure import find_contours

    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, grid)
    ys = np.linspace(y0, y1, grid)
    rho = d.rho
    (vals,), sheet = grid_values([rho], d.basepoint, xs, ys, d.special_points())
    with np.errstate(all="ignore"):
        g = np.log(np.abs(vals)) - 2 * t
    bad = ~np.isfinite(g) | branch_mask(sheet, g.shape)
    for p in d.special_points():
        bad |= np.abs(xs[None, :] + 1j * ys[:, None] - p) < 2 * max(xs[1] - xs[0], ys[1] - ys[0])
    g = np.where(np.isfinite(g), g, 0.0)
    lines = find_contours(g, 0.0, mask=~bad)
    out = []
    for ln in lines:
        pts, ri, ci = _refine(rho, t, ln, xs, ys, sheet, refine)
        if len(pts) >= 2:
            out.append((pts, ri, ci) if nodes else pts)
    return out


def _refine(rho, t, ln, xs, ys, sheet, iters):
    r, c = ln[:, 0], ln[:, 1]
    r0 = np.clip(np.floor(r).astype(int), 0, len(ys) - 2)
    c0 = np.clip(np.floor(c).astype(int), 0, len(xs) - 2)
    on_row = np.abs(r - np.round(r)) < 1e-9  # horizontal edge (fixed row)
    ri = np.where(on_row, np.round(r).astype(int), r0)
    ci = np.where(on_row, c0, np.round(c).astype(int))
    za = xs[ci] + 1j * ys[ri]
    zb = np.where(on_row, xs[np.minimum(ci + 1, len(xs) - 1)] + 1j * ys[ri],
                  xs[ci] + 1j * ys[np.minimum(ri + 1, len(ys) - 1)])
    sh = sheet.take((ri, ci)) if sheet is not None else None

    def g(z):
        v = X.evaluate(rho, z, sheet=sh, check=False)
        with np.errstate(all="ignore"):
            return np.log(np.abs(v)) - 2 * t

    ga = g(za)
    lo, hi = np.zeros(len(za)), np.ones(len(za))
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        gm = g(za + mid * (zb - za))
        same = np.sign(gm) == np.sign(ga)
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    s = 0.5 * (lo + hi)
    z = za + s * (zb - za)
    ok = np.isfinite(g(z))
    return z[ok], ri[ok], ci[ok]


# ---------------------------------------------------------------------------
# constructors

def from_gauss_pair(G, Gs, basepoint, xi0=1.0, **kw):
    """Front data from Gauss maps with ``G != G*`` (closed-form route)."""
    entries, xi, omega, theta = frame_from_gauss_pair(G, Gs, basepoint, xi0)
    fr = LegendrianFrame(ExprSource(entries, basepoint), omega, theta)
    return FrontData(omega=omega, theta=theta, frame=fr, basepoint=complex(basepoint), G=G, Gs=Gs, **kw)


def from_G_omega(G, omega, basepoint, check_window=None, **kw):
    """Front data from a Gauss map and a 1-form.

    The second form is ``theta = Q/omega`` with ``2Q = s(omega) - S(G)``.
    """
    Q = X.Const(0.5) * (form_schwarzian(omega) - schwarzian(G))
    theta = Q / omega
    entries = frame_from_G_omega(G, omega, basepoint)
    fr = LegendrianFrame(ExprSource(entries, basepoint), omega, theta)
    d = FrontData(omega=omega, theta=theta, frame=fr, basepoint=complex(basepoint), G=G,
                  Gs=None, **kw)
    d.Gs = _gs_from_entries(entries)
    if check_window is not None:
        xs = np.linspace(check_window[0], check_window[1], 17)
        ys = np.linspace(check_window[2], check_window[3], 17)
        (wv, tv), _ = grid_values([omega, theta], basepoint, xs, ys)
        dens = np.abs(wv) ** 2 + (0 if X.is_zero(theta) else np.abs(tv) ** 2)
        if np.nanmin(dens) < 1e-14:
            raise DegenerateMetric("|omega|^2 + |theta|^2 vanishes in the window")
    return d


def _gs_from_entries(entries):
    if X.is_zero(entries[3]):
        return None  # G* is constant at infinity
    return entries[1] / entries[3]


def from_forms(omega, theta, basepoint, E0=None, **kw):
    """Front data from the two forms (frame by integration)."""
    if X.is_zero(omega) or X.is_zero(theta):
        raise ZeroForm("both forms must be nonzero")
    fr = LegendrianFrame(OdeSource(omega, theta, basepoint, E0=E0), omega, theta)
    return FrontData(omega=omega, theta=theta, frame=fr, basepoint=complex(basepoint), **kw)
