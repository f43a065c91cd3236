"""Triangle meshes of fronts and caustics in the Poincare ball."""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ExcludedParameter, InvalidPoint
from .frontdata import FrontData, branch_mask, sweep_values
from .holo import expr as X
from .holo.contour import Contour
from .legendrian import ExprSource, OdeSource, ball, front_point, from_entries, parallel_point

X0_MAX = 1e8          # points farther out than this are dropped
NORMAL_LENGTH = 0.25
RANK_TOL = 1e-9


def ball_project(x, tol=1e-8):
    """``(x1, x2, x3) / (1 + x0)`` for points of the hyperboloid ``-x0^2 + |x|^2 = -1``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (4,):
        raise InvalidPoint("points need four coordinates")
    if not np.all(np.isfinite(x)):
        raise InvalidPoint("non-finite coordinates")
    q = -x[..., 0] ** 2 + np.sum(x[..., 1:] ** 2, -1)
    if np.any(x[..., 0] <= 0) or np.any(np.abs(q + 1) > tol * np.maximum(1.0, x[..., 0] ** 2)):
        raise InvalidPoint("not on the upper sheet of the hyperboloid")
    return ball(x)


@dataclass
class Mesh:
    """Surface layer plus polyline layers, all in ball coordinates."""

    name: str
    vertices: np.ndarray
    triangles: np.ndarray
    scalars: dict
    singular: list = field(default_factory=list)
    singular_rho: list = field(default_factory=list)
    normals: np.ndarray = field(default_factory=lambda: np.zeros((0, 2, 3)))
    meta: dict = field(default_factory=dict)

    @property
    def degenerate(self):
        return bool(self.meta.get("degenerate", False))

    def areas(self):
        if len(self.triangles) == 0:
            return np.zeros(0)
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=-1)


def span_rank(h, tol=RANK_TOL):
    """Rank of the linear span of hyperboloid points: 2 for a geodesic, 3 for a plane."""
    sv = np.linalg.svd(h, compute_uv=False)
    return int(np.sum(sv > tol * sv[0])) if len(sv) else 0


class _Parts:
    def __init__(self):
        self.v, self.f, self.rho, self.sgn, self.nrm, self.h = [], [], [], [], [], []
        self.count = 0

    def add(self, x, ok, w, t, E, step):
        """Append a sampled 2-d patch; ``ok`` marks usable nodes."""
        n0, n1 = ok.shape
        idx = -np.ones(ok.shape, dtype=np.int64)
        idx[ok] = self.count + np.arange(int(ok.sum()))
        self.count += int(ok.sum())
        self.v.append(ball(x[ok]))
        self.h.append(x[ok] / np.linalg.norm(x[ok], axis=-1)[:, None])
        with np.errstate(all="ignore"):
            self.rho.append(np.abs(t[ok] / w[ok]))
        self.sgn.append(np.sign(np.abs(t[ok]) ** 2 - np.abs(w[ok]) ** 2))
        a, b = idx[:-1, :-1], idx[1:, :-1]
        c, d = idx[1:, 1:], idx[:-1, 1:]
        for tri in (np.stack([a, b, c], -1), np.stack([a, c, d], -1)):
            tri = tri.reshape(-1, 3)
            self.f.append(tri[np.all(tri >= 0, axis=1)])
        sel = np.zeros(ok.shape, dtype=bool)
        sel[::step, ::step] = True
        sel &= ok
        if sel.any():
            Es = E[sel]
            p0 = ball(front_point(Es))
            p1 = ball(parallel_point(Es, NORMAL_LENGTH))
            good = np.all(np.isfinite(p1), -1)
            self.nrm.append(np.stack([p0[good], p1[good]], 1))


def _values(S, P, avoid):
    """Frames, forms and the continuation sheet on the 2-d array ``P``."""
    fr = S.frame
    if isinstance(fr.source, ExprSource):
        vals, sheet = sweep_values(list(fr.source.entries) + [S.omega, S.theta], S.basepoint, P, avoid)
        E = fr._wrap(from_entries(*vals[:4]))
        return E, None, vals[4], vals[5], sheet
    vals, sheet = sweep_values([S.omega, S.theta], S.basepoint, P, avoid)
    raw = fr.sweep(P, avoid, raw=True)
    return fr._wrap(raw), raw, vals[0], vals[1], sheet


def _usable(x, sheet):
    with np.errstate(all="ignore"):
        ok = np.all(np.isfinite(x), -1) & (x[..., 0] < X0_MAX) & (x[..., 0] > 0)
    return ok & ~branch_mask(sheet, ok.shape)


def _sample_grid(S, parts, window, n, clear, step):
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    P = xs[:, None] + 1j * ys[None, :]
    avoid = S.special_points()
    with np.errstate(all="ignore"):
        E, raw, w, t, sheet = _values(S, P, avoid)
        x = front_point(E)
    ok = _usable(x, sheet)
    for c, r in clear:
        ok &= np.abs(P - c) >= r
    parts.add(x, ok, w, t, E, step)
    return xs, ys, E, raw, sheet


def _sample_polar(S, parts, center, r_from, r_to, turns, nr, nt, step):
    radii = np.exp(np.linspace(np.log(r_from), np.log(r_to), nr))
    phi = 0.123 + 2 * np.pi * turns * np.arange(nt * turns + 1) / nt
    P = center + radii[None, :] * np.exp(1j * phi[:, None])
    with np.errstate(all="ignore"):
        E, _, w, t, sheet = _values(S, P, S.special_points())
        x = front_point(E)
    parts.add(x, _usable(x, sheet), w, t, E, step)


def _end_disks(S, ends, window):
    """``(center, radius, turns)`` for the finite ends and the end at infinity."""
    special = S.special_points()
    span = min(window[1] - window[0], window[3] - window[2])
    out, seen = [], []
    for p in ends:
        if not p.finite:
            continue
        if any(abs(p.z - q) < 1e-9 for q in seen):
            continue
        seen.append(p.z)
        others = [abs(q - p.z) for q in special if abs(q - p.z) > 1e-9]
        r = min(0.45 * min(others), 0.1 * span) if others else 0.1 * span
        out.append((p.z, r, 2 if p.cover else 1))
    return out


def _singular(S, xs, ys, E, raw, sheet, n, refine=40):
    """Singular-locus polylines in the ball and ``|rho|`` along them."""
    window = (xs[0], xs[-1], ys[0], ys[-1])
    lines, rhos = [], []
    src = S.frame.source
    for z, ri, ci in S.singular_locus(0.0, window, n, refine, nodes=True):
        sh = sheet.take((ci, ri)) if sheet is not None else None
        if isinstance(src, ExprSource):
            vals = X.evaluate(list(src.entries), z, sheet=sh, check=False)
            Ez = S.frame._wrap(from_entries(*vals))
        else:
            za = xs[ci] + 1j * ys[ri]
            Ez, _ = src.propagate(Contour(np.stack([za, z])), (raw[ci, ri], sh))
            Ez = S.frame._wrap(Ez[-1])
        (rho,) = X.evaluate([S.rho], z, sheet=sh, check=False)
        with np.errstate(all="ignore"):
            v = ball(front_point(Ez))
        good = np.all(np.isfinite(v), -1)
        if good.sum() >= 2:
            lines.append(v[good])
            rhos.append(np.abs(rho[good]))
    return lines, rhos


def target_data(d: FrontData, target="front", t=0.0):
    """The front data to mesh: the parallel front at ``t`` or the caustic."""
    if target == "caustic":
        from .caustic import caustic_data
        c = caustic_data(d)
        F = c.front
        # umbilics of the front are ends of its caustic
        return F, list(F.punctures) + list(F.umbilics)
    if target != "front":
        raise ValueError(f"unknown target {target!r}")
    if t:
        refuse_excluded(d, t)
        return d.parallel(t), list(d.punctures)
    return d, list(d.punctures)


def refuse_excluded(d, t, tol=1e-6):
    try:
        d.check_parameter(t, tol)
    except ExcludedParameter as exc:
        raise ExcludedParameter(
            f"{exc}: the parallel front at this distance has an end with |rho| -> e^(2t), "
            "so it is not a front of finite type there; no mesh is produced") from None


def sample_surface(d: FrontData, target="front", t=0.0, grid=256, window=None, polar=True):
    """Mesh of the front at distance ``t`` (or of the caustic) on the chart window.

    A nonzero ``t`` at which some end has ``|rho| -> e^{2t}`` is refused;
    the given front (``t = 0``) is always meshed.

    Nodes near marked points are dropped; each finite end gets a log-polar
    patch (two turns around branch points of the projection) and an end at
    infinity a log-polar collar.  Both sheets are sampled for hyperelliptic
    data.
    """
    F, ends = target_data(d, target, t)
    window = tuple(window or F.window)
    n = int(grid)
    step = max(1, n // 16)
    sheets = [F] if F.w is None else [F, F.other_sheet()]
    parts = _Parts()
    singular, srho = [], []
    everywhere = False
    h = max((window[1] - window[0]) / (n - 1), (window[3] - window[2]) / (n - 1))
    disks = _end_disks(F, ends, window)
    for S in sheets:
        clear = [(c, max(r, 2 * h)) for c, r, _ in disks]
        clear += [(q, 2 * h) for q in S.special_points()]
        xs, ys, E, raw, sheet = _sample_grid(S, parts, window, n, clear, step)
        with np.errstate(all="ignore"):
            dev = np.abs(np.log(parts.rho[-1]))
        if len(dev) and np.nanmax(dev) < 1e-9:
            # |rho| = 1 identically: every point is singular
            everywhere = True
        else:
            lines, rhos = _singular(S, xs, ys, E, raw, sheet, n)
            singular += lines
            srho += rhos
        if not polar:
            continue
        nr, nt = max(8, n // 4), max(16, n // 2)
        for c, r, turns in disks:
            _sample_polar(S, parts, c, 1.1 * r, 1e-4 * r, turns, nr, nt, step)
        if any(not p.finite for p in ends):
            R0 = max([abs(q) for q in S.special_points()] + [abs(window[0]), abs(window[1]),
                                                             abs(window[2]), abs(window[3])])
            _sample_polar(S, parts, 0.0, 1.05 * R0, 1e4 * R0, 1, nr, nt, step)
    V = np.concatenate(parts.v) if parts.v else np.zeros((0, 3))
    T = np.concatenate(parts.f) if parts.f else np.zeros((0, 3), dtype=np.int64)
    nrm = np.concatenate(parts.nrm) if parts.nrm else np.zeros((0, 2, 3))
    scal = {"abs_rho": np.concatenate(parts.rho) if parts.rho else np.zeros(0),
            "dh2_sign": np.concatenate(parts.sgn) if parts.sgn else np.zeros(0)}
    m = Mesh("caustic" if target == "caustic" else "front", V, T, scal, singular, srho, nrm)
    areas = m.areas()
    rank = span_rank(np.concatenate(parts.h)) if parts.h else 0
    m.meta = {"target": target, "t": float(t), "grid": n, "window": list(window),
              "vertices": int(len(V)), "triangles": int(len(T)),
              "max_area": float(areas.max()) if len(areas) else 0.0,
              "span_rank": rank, "degenerate": bool(rank <= 2),
              "singular_polylines": len(singular), "singular_everywhere": everywhere,
              "singular_rho_deviation": max([float(np.max(np.abs(r - 1))) for r in srho] or [0.0])}
    return m


# ---------------------------------------------------------------------------
# writers

def _fmt(v):
    return " ".join(f"{c:.10f}" for c in v)


def write_mesh(mesh: Mesh, out_dir, stem):
    """OBJ per layer (``<stem>_<layer>.obj``) plus a CSV of vertex scalars; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    p = os.path.join(out_dir, f"{stem}_{mesh.name}.obj")
    with open(p, "w", newline="\n") as fh:
        fh.write(f"o {mesh.name}\n")
        for v in mesh.vertices:
            fh.write(f"v {_fmt(v)}\n")
        for f in mesh.triangles:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
    paths.append(p)
    p = os.path.join(out_dir, f"{stem}_singular.obj")
    with open(p, "w", newline="\n") as fh:
        fh.write("o singular\n")
        base = 1
        for ln in mesh.singular:
            for v in ln:
                fh.write(f"v {_fmt(v)}\n")
            fh.write("l " + " ".join(str(base + k) for k in range(len(ln))) + "\n")
            base += len(ln)
    paths.append(p)
    p = os.path.join(out_dir, f"{stem}_normals.obj")
    with open(p, "w", newline="\n") as fh:
        fh.write("o normals\n")
        for k, (a, b) in enumerate(mesh.normals):
            fh.write(f"v {_fmt(a)}\nv {_fmt(b)}\nl {2 * k + 1} {2 * k + 2}\n")
    paths.append(p)
    p = os.path.join(out_dir, f"{stem}_scalars.csv")
    with open(p, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["vertex", "abs_rho", "dh2_sign"])
        for i, (r, s) in enumerate(zip(mesh.scalars["abs_rho"], mesh.scalars["dh2_sign"])):
            wr.writerow([i, f"{r:.10g}", int(s)])
    paths.append(p)
    return paths
