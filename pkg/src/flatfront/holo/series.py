"""Local expansions, vanishing orders, Schwarzian derivatives and charts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConstantInput, EssentialOrIrregular, NonSingleValued, ZeroForm
from . import expr as E
from .contour import Contour

INF = complex("inf")


def is_inf(p):
    return p is None or (isinstance(p, (complex, float)) and not np.isfinite(abs(p)))


@dataclass(frozen=True)
class Chart:
    """Local coordinate ``zeta`` near ``center`` (possibly infinity).

    ``cover=True`` uses the double cover ``z = center + zeta**2``
    (``z = zeta**-2`` at infinity), which uniformizes square-root branching.
    """

    center: complex
    cover: bool = False

    @property
    def at_infinity(self):
        return is_inf(self.center)

    def map(self):
        zt = E.Z
        if self.at_infinity:
            return E.power(zt, -2) if self.cover else E.power(zt, -1)
        return E.Const(self.center) + (zt * zt if self.cover else zt)

    def to_z(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if self.at_infinity:
            return 1 / zeta ** 2 if self.cover else 1 / zeta
        return self.center + (zeta ** 2 if self.cover else zeta)

    def zeta_radius(self, dist):
        """Chart radius corresponding to distance ``dist`` in the base plane (or radius ``1/dist`` at infinity)."""
        r = 1.0 / dist if self.at_infinity else dist
        return np.sqrt(r) if self.cover else r

    def pull(self, e, degree=0, anchor=None):
        """Pull back a function (degree 0), a 1-form (1) or a quadratic differential (2)."""
        g = self.map()
        out = E.compose(e, g, anchor=anchor)
        if degree:
            out = out * E.power(g.diff(), degree)
        return out

    def order_to_base(self, k):
        """Convert a vanishing order in ``zeta`` of a function to the base coordinate."""
        k = k / 2 if self.cover else k
        return -k if self.at_infinity else k


@dataclass
class LocalSeries:
    center: complex
    radius: float
    order: int
    coeffs: dict
    error: float

    def leading(self):
        return self.coeffs[self.order]

    def __call__(self, dz):
        return sum(c * dz ** k for k, c in self.coeffs.items())


def _circle_values(e, center, r, M, sheet_start=None):
    c = Contour.circle(center, r, n=M)
    vals, res = c.values([e], sheet=sheet_start)
    v = vals[0]
    if e.multivalued:
        rel = abs(v[-1] - v[0]) / max(np.max(np.abs(v)), 1e-300)
        if rel > 1e-8:
            raise NonSingleValued(f"{e.to_str()[:50]} does not close around {center}")
    return v[:-1]


def _fft_coeffs(v, r):
    M = len(v)
    c = np.fft.fft(v) / M
    ks = np.fft.fftfreq(M, 1.0 / M).astype(int)
    with np.errstate(over="ignore"):
        return {int(k): c[j] / r ** k for j, k in enumerate(ks)}


def _lead(coeffs, r, thr, skip_const=False):
    items = sorted(coeffs.items())
    with np.errstate(over="ignore", invalid="ignore"):
        scale = max(abs(c) * r ** k for k, c in items if not (skip_const and k == 0))
    if scale == 0:
        return None, 0.0
    for k, c in items:
        if skip_const and k == 0:
            continue
        if abs(c) * r ** k > thr * scale:
            return k, scale
    return None, scale


SHRINK = (1, 4, 16, 64)


def _shrinking(fn, radius):
    """Call ``fn(r)`` on shrinking radii until the expansion is consistent.

    Zeros or poles of unrelated factors inside the first disk spoil the
    fit; a genuine essential singularity fails at every radius.
    """
    for k, f in enumerate(SHRINK):
        try:
            return fn(radius / f)
        except EssentialOrIrregular:
            if k == len(SHRINK) - 1:
                raise


def local_series(e, center, N=12, radius=None, avoid=(), M=128, thr=1e-7):
    """Laurent expansion of a single-valued function about ``center``.

    Coefficients come from samples on a circle (continued around it) by FFT.
    The leading order is the first coefficient above ``thr`` relative to the
    largest scaled coefficient, and must be stable over three radii.
    """
    center = complex(center)
    if radius is None:
        d = min([abs(complex(p) - center) for p in avoid if abs(complex(p) - center) > 0] + [1.0])
        radius = 0.5 * d
    return _shrinking(lambda r: _local_series(e, center, N, r, M, thr), radius)


def _local_series(e, center, N, radius, M, thr):
    orders, sets = [], []
    for r in (radius, radius / 2, radius / 4):
        v = _circle_values(e, center, r, M)
        if not np.all(np.isfinite(v)):
            raise EssentialOrIrregular(f"{e.to_str()[:50]} overflows near {center}")
        co = _fft_coeffs(v, r)
        k, scale = _lead(co, r, thr)
        if not np.isfinite(scale):
            raise EssentialOrIrregular(f"{e.to_str()[:50]} overflows near {center}")
        if k is None:
            raise ZeroForm(f"{e.to_str()[:50]} vanishes near {center}")
        orders.append(k)
        sets.append(co)
    if len(set(orders)) != 1 or orders[0] <= -M // 4:
        raise EssentialOrIrregular(f"unstable leading order {orders} at {center}")
    k0 = orders[0]
    a, b = sets[0], sets[1]
    err = max(abs(a[k] - b[k]) / max(abs(a[k0]), 1e-300) for k in range(k0, k0 + 3))
    if err > 1e-4:
        raise EssentialOrIrregular(f"coefficients unstable at {center}")
    coeffs = {k: sets[1][k] for k in range(k0, k0 + N) if k in sets[1]}
    return LocalSeries(center, radius, k0, coeffs, err)


def vanish_order(e, center, **kw):
    return local_series(e, center, **kw).order


def ramification(e, center, **kw):
    """Local degree of ``e`` at ``center``: order of ``e - e(center)``, or of the pole."""
    ls = local_series(e, center, **kw)
    if ls.order < 0:
        return -ls.order, INF
    if ls.order > 0:
        return ls.order, 0j
    r = ls.radius / 2
    co = ls.coeffs
    k, _ = _lead({k: c for k, c in co.items()}, r, 1e-7, skip_const=True)
    if k is None:
        raise ConstantInput("function is locally constant")
    return k, co[0]


def metric_order(e, center, radius, M=128, sheet=None):
    """Real exponent ``mu`` with ``|e| ~ |zeta|**mu`` at ``center``.

    Uses the circle mean of ``log|e|`` at three radii (mean value property).
    The oscillation of ``log|e| - mu log r`` must shrink, which rules out
    essential behaviour; otherwise :class:`EssentialOrIrregular` is raised.
    """
    center = complex(center)
    return _shrinking(lambda r: _metric_order(e, center, r, M, sheet), radius)


def _metric_order(e, center, radius, M, sheet):
    means, oscs, rs = [], [], [radius, radius / 2, radius / 4]
    for r in rs:
        c = Contour.circle(center, r, n=M)
        vals, _ = c.values([e], sheet=sheet)
        with np.errstate(divide="ignore"):
            la = np.log(np.abs(vals[0][:-1]))
        if not np.all(np.isfinite(la)):
            raise EssentialOrIrregular(f"zero or pole on sampling circle at {center}")
        means.append(np.mean(la))
        oscs.append(np.max(la) - np.min(la))
    m1 = (means[0] - means[1]) / np.log(2)
    m2 = (means[1] - means[2]) / np.log(2)
    if abs(m1 - m2) > 1e-6 * max(1.0, abs(m1)):
        raise EssentialOrIrregular(f"inconsistent growth {m1:.6g} vs {m2:.6g} at {center}")
    if oscs[2] > 0.75 * oscs[0] + 1e-9:
        raise EssentialOrIrregular(f"no finite-order limit at {center}")
    return float(m2)


def modulus_limit(e, center, radius, order=None, M=128):
    """Limit of ``|e| / |zeta|**order`` at ``center``.

    ``log|e| - order log|zeta|`` is harmonic near ``center``, so its circle
    means are constant once the disk holds no other zeros or poles.
    """
    if order is None:
        order = metric_order(e, center, radius, M=M)

    def fit(r0):
        means = []
        for r in (r0, r0 / 2):
            c = Contour.circle(center, r, n=M)
            v, _ = c.values([e])
            means.append(np.mean(np.log(np.abs(v[0][:-1]))) - order * np.log(r))
        if abs(means[0] - means[1]) > 1e-8 * max(1.0, abs(means[1])):
            raise EssentialOrIrregular(f"modulus has no limit at {center}")
        return float(np.exp(means[1]))

    return _shrinking(fit, radius), order


def schwarzian(g):
    """``(g''/g')' - (g''/g')**2 / 2`` as a tree."""
    g1 = g.diff()
    if E.is_zero(g1):
        raise ConstantInput("Schwarzian of a constant")
    r = g1.diff() / g1
    return r.diff() - E.Const(0.5) * r * r


def form_schwarzian(w):
    """Schwarzian of a 1-form with coefficient ``w``: same formula with ``w'/w``."""
    if E.is_zero(w):
        raise ZeroForm("Schwarzian of the zero form")
    r = w.diff() / w
    return r.diff() - E.Const(0.5) * r * r
