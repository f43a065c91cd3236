"""SL(2,C) frames of Legendrian immersions and the associated points of H^3.

Hyperbolic space is realized as ``{X in Herm(2): det X = 1, tr X > 0}`` with
``(x0, x1, x2, x3) <-> [[x0 + x3, x1 + i x2], [x1 - i x2, x0 - x3]]``.  A
frame ``E`` gives the front ``f = E E*`` and unit normal ``nu = E e3 E*``.
"""
from __future__ import annotations

import bisect

import numpy as np

from .errors import BranchPointOnPath, ToleranceNotMet
from .holo import expr as X
from .holo.contour import Contour, detour
from .ode import dopri5

E3 = np.array([[1, 0], [0, -1]], dtype=complex)
J = np.array([[0, 1j], [1j, 0]])
I2 = np.eye(2, dtype=complex)


# ---------------------------------------------------------------------------
# linear algebra on stacks of 2x2 matrices

def dagger(M):
    return np.conj(np.swapaxes(M, -1, -2))


def det2(M):
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def inv2(M):
    out = np.empty_like(M)
    d = det2(M)
    out[..., 0, 0] = M[..., 1, 1] / d
    out[..., 1, 1] = M[..., 0, 0] / d
    out[..., 0, 1] = -M[..., 0, 1] / d
    out[..., 1, 0] = -M[..., 1, 0] / d
    return out


def from_entries(A, B, C, D):
    A, B, C, D = np.broadcast_arrays(*(np.asarray(x, dtype=complex) for x in (A, B, C, D)))
    return np.stack([np.stack([A, B], -1), np.stack([C, D], -1)], -2)


def herm_to_vec(F):
    """Coordinates ``(x0, x1, x2, x3)`` of a Hermitian matrix (last axis)."""
    x0 = 0.5 * np.real(F[..., 0, 0] + F[..., 1, 1])
    x3 = 0.5 * np.real(F[..., 0, 0] - F[..., 1, 1])
    return np.stack([x0, np.real(F[..., 0, 1]), np.imag(F[..., 0, 1]), x3], -1)


def vec_to_herm(x):
    x = np.asarray(x, dtype=float)
    return from_entries(x[..., 0] + x[..., 3], x[..., 1] + 1j * x[..., 2],
                        x[..., 1] - 1j * x[..., 2], x[..., 0] - x[..., 3])


def minkowski(x, y):
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], -1)


def front_point(E):
    return herm_to_vec(E @ dagger(E))


def unit_normal(E):
    return herm_to_vec(E @ E3 @ dagger(E))


def parallel_point(E, t):
    """Point of the parallel front at signed distance ``t``: ``cosh t f + sinh t nu``."""
    return np.cosh(t) * front_point(E) + np.sinh(t) * unit_normal(E)


def hyperbolic_distance(x, y):
    return np.arccosh(np.maximum(-minkowski(x, y), 1.0))


def ball(x):
    """Poincare ball image of points of the hyperboloid.

    ``x0`` is recomputed from the spatial part so that rounding can never
    push a point onto or outside the unit sphere.
    """
    v = np.asarray(x, dtype=float)[..., 1:]
    n2 = np.sum(v * v, -1)
    x0 = np.sqrt(1.0 + n2)
    return v / (1.0 + x0)[..., None]


def mobius(a, w):
    """Action of ``a`` in SL(2,C) on the Riemann sphere (``inf`` allowed)."""
    a = np.asarray(a, dtype=complex)
    w = np.asarray(w, dtype=complex)
    with np.errstate(all="ignore"):
        out = (a[0, 0] * w + a[0, 1]) / (a[1, 0] * w + a[1, 1])
        out = np.where(np.isinf(w), a[0, 0] / a[1, 0] if a[1, 0] != 0 else np.inf, out)
    return out


def mobius_expr(a, g):
    a = np.asarray(a, dtype=complex)
    return (X.Const(a[0, 0]) * g + X.Const(a[0, 1])) / (X.Const(a[1, 0]) * g + X.Const(a[1, 1]))


def random_sl2(rng, scale=1.0):
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    M = np.eye(2) + scale * M
    return M / np.sqrt(det2(M))


def psl_close(M, N, tol):
    """Distance of ``M`` to ``+-N`` (relative) and whether it is below ``tol``."""
    scale = max(np.max(np.abs(N)), 1.0)
    d = min(np.max(np.abs(M - N)), np.max(np.abs(M + N))) / scale
    return d, d <= tol


def matrix_sqrt_sign(M, ref):
    """Flip ``M`` to the sign nearest ``ref``."""
    return M if np.max(np.abs(M - ref)) <= np.max(np.abs(M + ref)) else -M


# ---------------------------------------------------------------------------
# frame sources

def _stack_sheets(sheets):
    out = X.Sheet(np.array([s.point for s in sheets]))
    keys = sheets[0].state.keys()
    out.state = {k: np.array([s.state[k] for s in sheets]) for k in keys}
    out.args = {k: np.array([s.args[k] for s in sheets]) for k in keys}
    return out


class ExprSource:
    """Frame given by closed-form entries ``[A, B, C, D]``."""

    route = "closed-form"

    def __init__(self, entries, basepoint):
        self.entries = list(entries)
        self.basepoint = complex(basepoint)

    def start_state(self):
        return None

    def propagate(self, contour, state):
        vals, res = contour.values(self.entries, sheet=state)
        E = from_entries(*vals)
        return E, res.vertex_sheets


class OdeSource:
    """Frame obtained by integrating ``dE = E [[0, theta], [omega, 0]]``."""

    route = "ode"

    def __init__(self, omega, theta, basepoint, E0=None, rtol=1e-12, atol=1e-14, det_tol=1e-10):
        self.omega = omega
        self.theta = theta
        self.basepoint = complex(basepoint)
        self.E0 = I2.copy() if E0 is None else np.asarray(E0, dtype=complex)
        self.rtol, self.atol, self.det_tol = rtol, atol, det_tol

    def start_state(self):
        return (self.E0, None)

    def propagate(self, contour, state):
        E_start, sheet = state
        forms = [self.omega, self.theta]
        multi = any(f.multivalued for f in forms)
        res = contour.march(forms, sheet=sheet, record=multi)
        knots = res.knots
        ks = [k[0] for k in knots]
        v = contour.vertices
        batch = v.shape[1:]
        Y = np.broadcast_to(np.asarray(E_start, dtype=complex), batch + (2, 2)).reshape(batch + (4,)).copy()
        out = [Y.copy()]
        det_tol = self.det_tol

        for k in range(contour.nseg):
            a, b = v[k], v[k + 1]
            dz = b - a

            def rhs(s, y, a=a, dz=dz, k=k):
                z = a + s * dz
                sh = None
                if multi:
                    j = bisect.bisect_right(ks, k + s) - 1
                    sh = knots[max(j, 0)][1]
                w, t = X.evaluate(forms, z, sheet=sh, check=False)
                w = w * dz
                t = t * dz
                return np.stack([y[..., 1] * w, y[..., 0] * t, y[..., 3] * w, y[..., 2] * t], -1)

            def accept(y):
                d = y[..., 0] * y[..., 3] - y[..., 1] * y[..., 2]
                size = np.maximum(1.0, np.abs(y[..., 0] * y[..., 3]) + np.abs(y[..., 1] * y[..., 2]))
                return bool(np.all(np.abs(d - 1) <= det_tol * size))

            try:
                Y, _ = dopri5(rhs, Y, 0.0, 1.0, rtol=self.rtol, atol=self.atol, accept=accept)
            except ToleranceNotMet as exc:
                raise BranchPointOnPath(f"frame integration failed near {a}: {exc}") from None
            out.append(Y.copy())
        E = np.stack(out).reshape((len(out),) + batch + (2, 2))
        states = [(E[i], res.vertex_sheets[i] if multi else None) for i in range(len(out))]
        return E, states


class LegendrianFrame:
    """Lift ``E = L E_src R`` with forms ``omega``, ``theta`` (coefficients of ``dz``).

    ``L`` is a rigid motion acting from the left, ``R`` a constant right
    factor (parallel shift, duality, gauge).
    """

    def __init__(self, source, omega, theta, left=None, right=None):
        self.source = source
        self.omega = omega
        self.theta = theta
        self.left = I2 if left is None else np.asarray(left, dtype=complex)
        self.right = I2 if right is None else np.asarray(right, dtype=complex)

    @property
    def basepoint(self):
        return self.source.basepoint

    @property
    def route(self):
        return self.source.route

    def _wrap(self, E):
        return self.left @ E @ self.right

    def _from_base(self, contour):
        return self.source.propagate(contour, self.source.start_state())

    def along(self, points):
        """Frame at each of ``points`` continued along the polyline from the basepoint."""
        pts = np.asarray(points, dtype=complex)
        c = Contour(np.concatenate([[self.basepoint], np.ravel(pts)]))
        E, _ = self._from_base(c)
        return self._wrap(E[1:]).reshape(pts.shape + (2, 2))

    def at(self, z):
        """Frame at ``z`` (scalar or array) continued along straight segments from the basepoint."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        c = Contour(np.stack([np.full(flat.shape, self.basepoint), flat]))
        E, _ = self._from_base(c)
        return self._wrap(E[-1]).reshape(z.shape + (2, 2))

    def on_path(self, contour):
        """Frame at every vertex of a contour starting at the basepoint."""
        E, _ = self._from_base(contour)
        return self._wrap(E)

    def near(self, z, offsets):
        """Frame at ``z + offsets``, continued from ``z`` along short segments."""
        c = Contour([self.basepoint, complex(z)])
        _, states = self._from_base(c)
        offs = np.asarray(offsets, dtype=complex)
        c2 = Contour(np.stack([np.full(offs.shape, complex(z)), complex(z) + offs]))
        st = states[-1]
        if isinstance(self.source, OdeSource):
            st = (np.broadcast_to(st[0], offs.shape + (2, 2)), _broadcast_sheet(st[1], offs.shape))
        else:
            st = _broadcast_sheet(st, offs.shape)
        E, _ = self.source.propagate(c2, st)
        return self._wrap(E[-1])

    def grid(self, xs, ys, avoid=()):
        """Frames on the grid ``xs + i ys`` (shape ``(len(ys), len(xs), 2, 2)``).

        Continuation runs from the basepoint to the first column, down the
        column, then along all rows at once.
        """
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        E = self.sweep(xs[:, None] + 1j * ys[None, :], avoid)
        return np.swapaxes(E, 0, 1)

    def sweep(self, P, avoid=(), raw=False):
        """Frames on a 2-d array of points ``P`` swept along its first axis.

        The first row ``P[0]`` is reached from the basepoint (around
        ``avoid``) and walked in order; every column ``P[:, j]`` is then
        continued from ``P[0, j]`` simultaneously.  ``raw`` skips the
        constant left and right factors.
        """
        P = np.asarray(P, dtype=complex)
        col = P[0]
        lead = detour(self.basepoint, col[0], avoid, clearance=0.02)
        c = Contour(np.concatenate([lead[:-1], col]))
        Ecol, states = self._from_base(c)
        n0 = len(lead) - 1
        states = states[n0:]
        if isinstance(self.source, OdeSource):
            sh = [s[1] for s in states]
            start = (Ecol[n0:], _stack_sheets(sh) if sh[0] is not None else None)
        else:
            start = _stack_sheets(states)
        E, _ = self.source.propagate(Contour(P), start)
        return E if raw else self._wrap(E)

    # derived frames ------------------------------------------------------
    def parallel(self, t):
        """Lift of the parallel front at distance ``t``."""
        R = np.diag([np.exp(t / 2), np.exp(-t / 2)]).astype(complex)
        return LegendrianFrame(self.source, X.Const(np.exp(t)) * self.omega,
                               X.Const(np.exp(-t)) * self.theta, self.left, self.right @ R)

    def dual(self):
        """Dual lift ``E J``: the forms swap."""
        return LegendrianFrame(self.source, self.theta, self.omega, self.left, self.right @ J)

    def gauge(self, s):
        """``E diag(e^{is/2}, e^{-is/2})``: ``omega -> e^{is} omega``, ``theta -> e^{-is} theta``."""
        R = np.diag([np.exp(0.5j * s), np.exp(-0.5j * s)])
        return LegendrianFrame(self.source, X.Const(np.exp(1j * s)) * self.omega,
                               X.Const(np.exp(-1j * s)) * self.theta, self.left, self.right @ R)

    def moved(self, a):
        """Image under the rigid motion ``a`` in SL(2,C)."""
        return LegendrianFrame(self.source, self.omega, self.theta,
                               np.asarray(a, dtype=complex) @ self.left, self.right)

    def monodromy(self, loop):
        """``E(start)^-1 E(end)`` for a loop given as a contour starting at the basepoint."""
        E = self.on_path(loop)
        return inv2(E[0]) @ E[-1]


def _broadcast_sheet(sh, shape):
    if sh is None:
        return None
    out = X.Sheet(np.broadcast_to(sh.point, shape).copy())
    out.state = {k: np.broadcast_to(v, shape).copy() for k, v in sh.state.items()}
    out.args = {k: np.broadcast_to(v, shape).copy() for k, v in sh.args.items()}
    return out


def solve_ode(omega, theta, basepoint, contour=None, points=None, E0=None, tol=1e-12):
    """Integrate the frame equation from ``basepoint``.

    Either a contour starting at the basepoint or a set of endpoints (reached
    along straight segments) must be given; returns the frames there.
    """
    src = OdeSource(omega, theta, basepoint, E0=E0, rtol=tol)
    fr = LegendrianFrame(src, omega, theta)
    if contour is not None:
        return fr.on_path(contour)
    return fr.at(points)


# ---------------------------------------------------------------------------
# closed-form frames

def frame_from_G_omega(G, omega, basepoint):
    """Closed-form lift from a Gauss map ``G`` and a 1-form ``omega``.

    ``C = i sqrt(omega/G')``, ``A = G C``, ``B = A'/omega``, ``D = C'/omega``.
    The returned entries satisfy ``det = 1`` and ``E^-1 dE`` is off-diagonal
    with lower entry ``omega``.
    """
    C = X.Const(1j) * X.sqrt(omega / G.diff())
    A = G * C
    B = A.diff() / omega
    D = C.diff() / omega
    return [A, B, C, D]


def frame_from_gauss_pair(G, Gs, basepoint, xi0=1.0):
    """Lift from the Gauss maps ``G != G*``.

    ``xi = xi0 exp(int_{z0}^z G'/(G - G*) dz)`` and
    ``E = [[G/xi, xi G*/(G - G*)], [1/xi, xi/(G - G*)]]``.
    Returns entries, ``xi`` and the forms ``omega = -G'/xi^2``,
    ``theta = xi^2 G*'/(G - G*)^2``.
    """
    diff = G - Gs
    P = X.Primitive(G.diff() / diff, basepoint)
    xi = X.Const(xi0) * X.exp(P)
    A = G / xi
    B = xi * Gs / diff
    C = X.Const(1) / xi
    D = xi / diff
    omega = -G.diff() / (xi * xi)
    theta = xi * xi * Gs.diff() / (diff * diff)
    return [A, B, C, D], xi, omega, theta


def forms_from_entries(entries):
    """``omega = dA/B`` and ``theta = dB/A`` recovered from frame entries."""
    A, B, C, D = entries
    return C.diff() / D, D.diff() / C
