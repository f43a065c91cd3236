"""Polygonal paths, analytic continuation along them, and contour integrals."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import BranchPointOnPath, ClearanceViolation, ToleranceNotMet
from .expr import Primitive, Sheet, _run, as_expr, evaluate

_ARG_STEP = 0.25


@dataclass
class MarchResult:
    vertex_sheets: list
    knots: list = field(default_factory=list)

    @property
    def start(self):
        return self.vertex_sheets[0]

    @property
    def end(self):
        return self.vertex_sheets[-1]


class Contour:
    """Piecewise linear path through ``vertices``.

    ``vertices`` may carry trailing batch dimensions, in which case every
    batch member is a separate path sharing the same parametrization.  The
    parameter runs over ``[0, nseg]`` with one unit per segment.
    """

    def __init__(self, vertices, avoid=(), clearance=0.0):
        v = np.asarray(vertices, dtype=complex)
        if v.ndim == 0 or v.shape[0] < 2:
            raise ValueError("a contour needs at least two vertices")
        self.vertices = v
        self.avoid = [complex(p) for p in avoid]
        self.clearance = float(clearance)
        if self.avoid and self.clearance > 0:
            self.check_clearance()

    # constructors ---------------------------------------------------------
    @classmethod
    def segment(cls, a, b, n=1, **kw):
        s = np.linspace(0.0, 1.0, n + 1)
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        s = s.reshape((-1,) + (1,) * np.broadcast(a, b).ndim)
        return cls(a + s * (b - a), **kw)

    @classmethod
    def polyline(cls, points, **kw):
        return cls(np.asarray(points, dtype=complex), **kw)

    @classmethod
    def arc(cls, center, radius, theta0, theta1, n=None, **kw):
        if n is None:
            n = max(8, int(np.ceil(abs(theta1 - theta0) / (2 * np.pi) * 64)))
        th = np.linspace(theta0, theta1, n + 1)
        return cls(complex(center) + radius * np.exp(1j * th), **kw)

    @classmethod
    def circle(cls, center, radius, theta0=0.0, turns=1, n=64, **kw):
        return cls.arc(center, radius, theta0, theta0 + 2 * np.pi * turns, n=n * abs(turns), **kw)

    def __add__(self, other):
        a, b = self.vertices, other.vertices
        if not np.allclose(a[-1], b[0], atol=1e-12):
            raise ValueError("contours do not join")
        return Contour(np.concatenate([a, b[1:]]), avoid=self.avoid + other.avoid,
                       clearance=max(self.clearance, other.clearance))

    def reversed(self):
        return Contour(self.vertices[::-1], avoid=self.avoid, clearance=self.clearance)

    # geometry -------------------------------------------------------------
    @property
    def nseg(self):
        return self.vertices.shape[0] - 1

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def length(self):
        return np.sum(np.abs(np.diff(self.vertices, axis=0)), axis=0)

    def point(self, s):
        k = min(int(np.floor(s)), self.nseg - 1)
        t = s - k
        return self.vertices[k] + t * (self.vertices[k + 1] - self.vertices[k])

    def check_clearance(self):
        a, b = self.vertices[:-1], self.vertices[1:]
        for p in self.avoid:
            d = b - a
            t = np.clip(np.real((p - a) * np.conj(d)) / np.maximum(np.abs(d) ** 2, 1e-300), 0, 1)
            dist = np.abs(a + t * d - p)
            if np.min(dist) < self.clearance:
                raise ClearanceViolation(f"path passes within {np.min(dist):.3g} of {p}")

    # continuation ---------------------------------------------------------
    def march(self, exprs, sheet=None, tol=1e-12, record=False, max_steps=200000):
        """Continue the multivalued nodes of ``exprs`` along the path.

        Returns the sheet at every vertex and, with ``record``, every
        accepted intermediate knot as ``(s, sheet)``.
        """
        roots = [as_expr(e) for e in exprs]
        nodes = []
        seen = set()
        for r in roots:
            for n in r.branch_nodes():
                if id(n) not in seen:
                    seen.add(id(n))
                    nodes.append(n)
        v = self.vertices
        if not nodes:
            sheets = [Sheet(v[k]) for k in range(v.shape[0])]
            knots = [(float(k), s) for k, s in enumerate(sheets)] if record else []
            return MarchResult(sheets, knots)
        sh = _initial(nodes, v[0], sheet)
        sheets = [sh]
        knots = [(0.0, sh)] if record else []
        total = float(np.max(self.length())) or 1.0
        rate = tol / total
        steps = 0
        for k in range(self.nseg):
            a, b = v[k], v[k + 1]
            seglen = float(np.max(np.abs(b - a)))
            s, h = 0.0, 1.0
            while s < 1.0:
                h = min(h, 1.0 - s)
                nxt = _try_step(nodes, sh, a, b, s, h, seglen, rate)
                if nxt is None:
                    h *= 0.5
                    if h * seglen < 1e-13 * max(1.0, total):
                        raise BranchPointOnPath(f"continuation stalled near {a + s * (b - a)}")
                    continue
                sh = nxt
                s = s + h if s + h < 1.0 else 1.0
                h *= 2.0
                steps += 1
                if steps > max_steps:
                    raise ToleranceNotMet("continuation exceeded its step budget")
                if record:
                    knots.append((k + s, sh))
            sh.point = b
            sheets.append(sh)
        return MarchResult(sheets, knots)

    def integrate(self, form, tol=1e-10, sheet=None):
        """Integral of ``form`` (the coefficient of ``dz``) along the path.

        Returns ``(value, end_sheet)``; the end sheet also carries the
        branch state of the integrand.
        """
        f = as_expr(form)
        v0 = self.vertices[0]
        P = Primitive(f, complex(np.ravel(v0)[0]))
        sh0 = _initial(f.branch_nodes(), v0, sheet).with_state(P, np.zeros(np.shape(v0), dtype=complex))
        sh0.args[P] = sh0.state[P]
        res = self.march([P], sheet=sh0, tol=tol)
        return res.end.state[P], res.end

    def values(self, exprs, sheet=None, tol=1e-12):
        """Values of ``exprs`` at every vertex, continued along the path."""
        res = self.march(exprs, sheet=sheet, tol=tol)
        out = [[] for _ in exprs]
        for k, sh in enumerate(res.vertex_sheets):
            vals = evaluate(list(exprs), self.vertices[k], sheet=sh, check=False)
            for j, x in enumerate(vals):
                out[j].append(x)
        return [np.array(o) for o in out], res


def _initial(nodes, point, sheet):
    ctx = _run(nodes, np.asarray(point, dtype=complex), sheet)
    st = {n: ctx.state[n] for n in nodes}
    ar = {n: ctx.args[n] for n in nodes}
    for n in nodes:
        if not np.all(np.isfinite(st[n])):
            raise BranchPointOnPath(f"branch point or pole at the start point {point}")
    return Sheet(point, st, ar)


def _try_step(nodes, sh, a, b, s, h, seglen, rate):
    z_mid = a + (s + 0.5 * h) * (b - a)
    z_new = a + (s + h) * (b - a)
    ctx = _run(nodes, z_new, sh)
    plain = [n for n in nodes if not isinstance(n, Primitive)]
    if plain:
        mid = _run(plain, z_mid, sh)
    for n in nodes:
        val = ctx.state[n]
        if not np.all(np.isfinite(val)):
            return None
        if isinstance(n, Primitive):
            allow = rate * h * seglen + 1e-15 * np.abs(val)
            if np.any(ctx.err[n] > allow):
                return None
        else:
            u0 = sh.args[n]
            u1 = ctx.args[n]
            um = mid.args[n]
            r = np.abs(u0)
            if np.any(r == 0) or not np.all(np.isfinite(u1)):
                return None
            if np.any(np.abs(u1 - u0) > _ARG_STEP * r) or np.any(np.abs(um - u0) > _ARG_STEP * r):
                return None
            if np.any(np.abs(um - 0.5 * (u0 + u1)) > 0.1 * r):
                return None
    return Sheet(z_new, {n: ctx.state[n] for n in nodes}, {n: ctx.args[n] for n in nodes})


def detour(a, b, avoid, clearance=1e-2, max_iter=32):
    """Polyline from ``a`` to ``b`` keeping ``clearance`` away from ``avoid``."""
    pts = [complex(a), complex(b)]
    avoid = [complex(p) for p in avoid]
    for _ in range(max_iter):
        hit = None
        for k in range(len(pts) - 1):
            u, v = pts[k], pts[k + 1]
            d = v - u
            for p in avoid:
                t = np.clip(((p - u) * np.conj(d)).real / max(abs(d) ** 2, 1e-300), 0, 1)
                if abs(u + t * d - p) < clearance and 0 < t < 1:
                    hit = (k, p, d)
                    break
            if hit:
                break
        if hit is None:
            return pts
        k, p, d = hit
        n = 1j * d / abs(d)
        pts.insert(k + 1, p + 3 * clearance * n)
    raise ClearanceViolation("could not route a path around the special points")


def contour_integrate(form, contour, tol=1e-10, sheet=None):
    """Integral of a holomorphic 1-form (given by its ``dz`` coefficient) along ``contour``."""
    value, _ = contour.integrate(form, tol=tol, sheet=sheet)
    return value
