"""Ends of fronts: the ratio alpha, type classification, multiplicities, degrees."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantInput, InconsistentClassification, NonRealAlpha, NotRegularEnd
from .holo import expr as X
from .holo.series import local_series, ramification

TYPES = ("notFiniteType", "horospherical", "snowman", "hourglass", "cylindrical")


@dataclass
class EndProfile:
    point: object
    alpha: float | None
    type: str
    multiplicity: int | None = None
    ord_Q: int | None = None
    q0: complex | None = None
    q0_expected: complex | None = None
    coorientable: bool | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self):
        p = self.point
        return {
            "point": p.to_json() if hasattr(p, "to_json") else str(p),
            "alpha": self.alpha, "type": self.type, "multiplicity": self.multiplicity,
            "ord_Q": self.ord_Q,
            "q0": None if self.q0 is None else [self.q0.real, self.q0.imag],
            "coorientable": self.coorientable,
            **{k: v for k, v in self.extra.items() if isinstance(v, (int, float, str, bool, type(None)))},
        }


def _series(e, r):
    return local_series(e, 0, radius=r)


def gauss_ratio(G, Gs, radius, tol=1e-6):
    """``alpha = lim dG/dG*`` (or its reciprocal, whichever is at most 1) at ``zeta = 0``.

    ``G`` and ``Gs`` are functions of the chart variable.  Both maps must
    take the same value at the end.
    """
    sg, ss = _series(G, radius), _series(Gs, radius)
    if sg.order < 0 and ss.order < 0:
        g, gs = X.Const(1) / G, X.Const(1) / Gs
    elif sg.order >= 0 and ss.order >= 0:
        a0 = sg.coeffs.get(0, 0) if sg.order == 0 else 0
        b0 = ss.coeffs.get(0, 0) if ss.order == 0 else 0
        if abs(a0 - b0) > 1e-6 * max(1.0, abs(a0)):
            raise NotRegularEnd(f"G and G* differ at the end ({a0} vs {b0})")
        g, gs = G - X.Const(a0), Gs - X.Const(a0)
    else:
        raise NotRegularEnd("only one of G, G* has a pole at the end")
    kg, cg = ramification(g, 0, radius=radius)
    ks, cs = ramification(gs, 0, radius=radius)
    lg = local_series(g, 0, radius=radius)
    ls = local_series(gs, 0, radius=radius)
    if lg.order > ls.order:
        ratio = 0j
    elif lg.order < ls.order:
        ratio = 0j
    else:
        ratio = lg.leading() / ls.leading()
        if abs(ratio) > 1:
            ratio = 1 / ratio
    if abs(ratio.imag) > tol * max(1.0, abs(ratio)):
        raise NonRealAlpha(f"alpha = {ratio} is not real")
    return float(ratio.real), {"r_G": kg, "r_Gs": ks}


def classify_end(alpha, tol=1e-6):
    """Type of a regular end from ``alpha`` in ``[-1, 1]``.

    Values within ``tol`` of ``1``, ``0`` or ``-1`` snap to the boundary
    types; the band between ``tol`` and ``2 tol`` is ``indeterminate``.
    """
    a = float(alpha)
    for target, name in ((1.0, "notFiniteType"), (0.0, "horospherical"), (-1.0, "cylindrical")):
        dist = abs(a - target)
        if dist <= tol:
            return name
        if dist <= 2 * tol:
            return "indeterminate"
    if a > 1 or a < -1:
        raise ValueError("alpha must lie in [-1, 1]")
    return "snowman" if a > 0 else "hourglass"


def expected_q0(alpha, m):
    return -alpha * m * m / (1 - alpha) ** 2


def multiplicity_from_maps(G, Gs, radius):
    """``min(r(G), r(G*))`` at ``zeta = 0``."""
    return min(ramification(G, 0, radius=radius)[0], ramification(Gs, 0, radius=radius)[0])


def multiplicity_from_orders(ord_omega, ord_theta):
    """``min(|1 + ord|omega|^2|, |1 + ord|theta|^2|)``; valid when ``ord Q >= -1``."""
    return int(round(min(abs(1 + ord_omega), abs(1 + ord_theta))))


def end_profile(d, p, tol=1e-6):
    """Classify the end ``p`` of the front data ``d`` (which must carry ``G``, ``G*``)."""
    cd = d.chart_data(p)
    r = cd["radius"]
    if cd["G"] is None or cd["Gs"] is None:
        raise ConstantInput("end classification needs both Gauss maps")
    alpha, ram = gauss_ratio(cd["G"], cd["Gs"], r, tol)
    kind = classify_end(alpha, tol)
    m = min(ram["r_G"], ram["r_Gs"])
    diag = d.end_diagnostics(p) if kind != "notFiniteType" else {}
    oq = diag.get("ord_Q")
    q0 = None
    q0e = None
    if oq == -2:
        ls = local_series(cd["Q"], 0, radius=r)
        q0 = complex(ls.coeffs[-2])
    if kind in ("snowman", "hourglass"):
        q0e = expected_q0(alpha, m)
        if q0 is None or abs(q0 - q0e) > 1e-5 * max(1.0, abs(q0e)):
            raise InconsistentClassification(f"q0 = {q0} but alpha predicts {q0e}")
    extra = {"r_G": ram["r_G"], "r_Gs": ram["r_Gs"]}
    if diag:
        extra.update(ord_omega=diag.get("ord_omega"), ord_theta=diag.get("ord_theta"),
                     weaklyComplete=diag.get("weaklyComplete"))
        if oq is not None and oq >= -1 and diag.get("ord_omega") is not None:
            extra["m_from_orders"] = multiplicity_from_orders(diag["ord_omega"], diag["ord_theta"])
    return EndProfile(p, alpha, kind, m, oq, q0, q0e, True, extra)


# ---------------------------------------------------------------------------
# degrees

def _edge_winding(F, pts):
    """Sum of argument increments of ``F`` along sampled edges (last axis)."""
    v = F(pts)
    ratio = v[..., 1:] / v[..., :-1]
    inc = np.angle(ratio)
    return np.sum(inc, -1), np.max(np.abs(inc))


def count_zeros(F, R=4.0, nr=160, nt=256, sub=6):
    """Number of zeros of ``F`` on the Riemann sphere from cell windings.

    The disk ``|z| <= R`` and the chart ``u = 1/z``, ``|u| < 1/R`` are
    split into polar cells; each cell contributes its positive winding.
    """
    total = 0
    for chart, Rc in ((lambda z: z, R), (lambda u: 1.0 / u, 1.0 / R)):
        rs = np.linspace(0, Rc, nr + 1)
        rs[0] = Rc * 1e-9
        ts = np.linspace(0, 2 * np.pi, nt + 1) + 0.0123
        Fc = lambda z, chart=chart: F(chart(z))
        sub_k = sub
        for k in range(4):
            s = np.linspace(0, 1, sub_k + 1)
            rr = rs[:-1, None, None] + (rs[1:] - rs[:-1])[:, None, None] * s[None, None, :]
            wr, mr = _edge_winding(Fc, rr * np.exp(1j * ts[None, :, None]))  # (nr, nt+1)
            tt = ts[:-1, None] + (ts[1:] - ts[:-1])[:, None] * s[None, :]
            wa, ma = _edge_winding(Fc, rs[:, None, None] * np.exp(1j * tt[None, :, :]))  # (nr+1, nt)
            if max(mr, ma) < 1.0:
                break
            sub_k *= 2
        # counter-clockwise boundary of the cell [r_k, r_k+1] x [t_j, t_j+1]
        cell = wr[:, :-1] + wa[1:, :] - wr[:, 1:] - wa[:-1, :]
        wind = np.round(cell / (2 * np.pi)).astype(int)
        total += int(np.sum(wind[wind > 0]))
    return total


def degree(G, v=None, rng=None, sheets=None, **kw):
    """Degree of a meromorphic function on the Riemann sphere or a two-sheeted cover.

    ``sheets`` is an optional list of trees (the function on each sheet);
    preimages of a random value are counted through the product over sheets.
    Two values are used and must agree.
    """
    rng = np.random.default_rng(12345) if rng is None else rng
    fs = sheets or [G]
    counts = []
    for _ in range(2):
        val = complex(rng.normal(), rng.normal()) if v is None else v

        def F(z, val=val):
            with np.errstate(all="ignore"):
                out = np.ones(np.shape(z), dtype=complex)
                for f in fs:
                    out = out * (X.evaluate(f, z, check=False) - val)
            return out

        counts.append(count_zeros(F, **kw))
    if counts[0] != counts[1]:
        raise ValueError(f"degree counts disagree: {counts}")
    return counts[0]


@dataclass
class OssermanReport:
    degree: float
    ends_coorientable: int
    ends_noncoorientable: int
    bound: float

    @property
    def equality(self):
        return abs(self.degree - self.bound) < 1e-9

    @property
    def holds(self):
        return self.degree >= self.bound - 1e-9

    def to_json(self):
        return {"degree": self.degree, "coorientable_ends": self.ends_coorientable,
                "noncoorientable_ends": self.ends_noncoorientable, "bound": self.bound,
                "holds": self.holds, "equality": self.equality}


def osserman(deg_total, n_coor, n_noncoor):
    return OssermanReport(deg_total, n_coor, n_noncoor, n_noncoor / 2 + n_coor)
