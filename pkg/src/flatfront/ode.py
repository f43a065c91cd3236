"""Dormand-Prince 5(4) integrator for complex systems with an invariant check."""
from __future__ import annotations

import numpy as np

from .errors import ToleranceNotMet

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def dopri5(f, y0, s0, s1, rtol=1e-12, atol=1e-14, accept=None, h0=None, max_steps=100000):
    """Integrate ``y' = f(s, y)`` from ``s0`` to ``s1``.

    ``accept(y)`` may veto a step (used to keep ``det`` close to one); a
    vetoed step is retried with half the size.  Returns ``(y1, nsteps)``.
    """
    y = np.array(y0, dtype=complex)
    s = float(s0)
    span = float(s1) - s
    if span == 0:
        return y, 0
    direction = np.sign(span)
    h = abs(span) if h0 is None else min(abs(h0), abs(span))
    k1 = f(s, y)
    steps = 0
    while direction * (s1 - s) > 1e-15 * abs(span):
        h = min(h, abs(s1 - s))
        hs = direction * h
        ks = [k1]
        for i in range(1, 7):
            yi = y + hs * sum(a * k for a, k in zip(_A[i], ks) if a != 0)
            ks.append(f(s + _C[i] * hs, yi))
        y_new = yi  # seventh stage equals the fifth order solution (FSAL)
        err = hs * sum(e * k for e, k in zip(_E, ks) if e != 0)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        with np.errstate(invalid="ignore"):
            en = float(np.max(np.abs(err) / scale)) if err.size else 0.0
        ok = np.isfinite(en) and en <= 1.0
        if ok and accept is not None and not accept(y_new):
            ok = False
            en = max(en, 1.0)
        if ok:
            s = s + hs if direction * (s1 - (s + hs)) > 0 else float(s1)
            y = y_new
            k1 = ks[6]
            steps += 1
            if steps > max_steps:
                raise ToleranceNotMet("step budget exhausted")
            fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
            h *= fac
        else:
            fac = 0.5 if not np.isfinite(en) or en <= 1.0 else max(0.1, 0.9 * en ** -0.2)
            h *= fac
            if h < 1e-14 * abs(span):
                raise ToleranceNotMet(f"step size underflow at s={s:.6g}")
    return y, steps
