"""Expression trees for holomorphic data in one complex chart variable.

Trees are immutable and compared by identity.  Derivatives are exact and
cached per node.  Evaluation is vectorized over numpy arrays; multivalued
nodes (``Sqrt``, ``Log``, ``RealPow``, ``Primitive``) pick their branch from
a :class:`Sheet` when one is supplied and fall back to principal values
otherwise.
"""
from __future__ import annotations

import math
import numbers

import numpy as np

from ..errors import BranchAmbiguous, PoleHit

TWO_PI = 2.0 * math.pi

# Gauss-Kronrod 15 point rule (7 point Gauss embedded).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
G_WEIGHTS = np.zeros(15)
G_WEIGHTS[[1, 3, 5, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[-2::-1]])
G_WEIGHTS[7] = _WG[-1]


class Sheet:
    """Branch reference for the multivalued nodes of a tree at ``point``.

    ``state`` maps each multivalued node to its tracked quantity: the value
    for ``Sqrt`` and ``Primitive``, the logarithm of the argument for ``Log``
    and ``RealPow``.  ``args`` keeps the argument values used for step control
    during continuation.
    """

    __slots__ = ("point", "state", "args")

    def __init__(self, point, state=None, args=None):
        self.point = point
        self.state = dict(state or {})
        self.args = dict(args or {})

    def take(self, index):
        """Sub-sheet of a batched sheet."""
        pick = lambda v: np.asarray(v)[index]
        return Sheet(pick(self.point), {k: pick(v) for k, v in self.state.items()},
                     {k: pick(v) for k, v in self.args.items()})

    def with_state(self, node, value):
        out = Sheet(self.point, self.state, self.args)
        out.state[node] = value
        return out

    def __repr__(self):
        return f"Sheet(point={self.point!r}, nodes={len(self.state)})"


class _Ctx:
    __slots__ = ("z", "sheet", "state", "args", "err", "vals")

    def __init__(self, z, sheet):
        self.z = z
        self.sheet = sheet
        self.state = {}
        self.args = {}
        self.err = {}
        self.vals = {}


def _ordered(roots):
    seen = set()
    out = []
    for r in roots:
        for n in r.postorder():
            if id(n) not in seen:
                seen.add(id(n))
                out.append(n)
    return out


def _run(roots, z, sheet):
    ctx = _Ctx(z, sheet)
    with np.errstate(all="ignore"):
        for n in _ordered(roots):
            ctx.vals[n] = n._apply(ctx)
    return ctx


class Expr:
    """Base node."""

    __slots__ = ("_deriv", "_post", "__weakref__")
    branchy = False
    prec = 100

    def __init__(self):
        self._deriv = None
        self._post = None

    children = ()

    # construction helpers -------------------------------------------------
    def __add__(self, o):
        return add(self, as_expr(o))

    def __radd__(self, o):
        return add(as_expr(o), self)

    def __sub__(self, o):
        return add(self, neg(as_expr(o)))

    def __rsub__(self, o):
        return add(as_expr(o), neg(self))

    def __mul__(self, o):
        return mul(self, as_expr(o))

    def __rmul__(self, o):
        return mul(as_expr(o), self)

    def __truediv__(self, o):
        return div(self, as_expr(o))

    def __rtruediv__(self, o):
        return div(as_expr(o), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p):
        return power(self, p)

    __hash__ = object.__hash__

    # structure ------------------------------------------------------------
    def postorder(self):
        if self._post is None:
            out, seen, stack = [], set(), [(self, False)]
            while stack:
                node, done = stack.pop()
                if done:
                    if id(node) not in seen:
                        seen.add(id(node))
                        out.append(node)
                    continue
                if id(node) in seen:
                    continue
                stack.append((node, True))
                for c in reversed(node.children):
                    stack.append((c, False))
            self._post = out
        return self._post

    @property
    def multivalued(self):
        return any(n.branchy for n in self.postorder())

    def branch_nodes(self):
        return [n for n in self.postorder() if n.branchy]

    def is_const(self):
        return isinstance(self, Const)

    def diff(self):
        if self._deriv is None:
            self._deriv = self._diff()
        return self._deriv

    def __call__(self, z, sheet=None, strict=False):
        return evaluate(self, z, sheet=sheet, strict=strict)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"Expr<{self.to_str()}>"

    def _wrap(self, child, prec):
        s = child.to_str()
        return f"({s})" if child.prec < prec else s


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        self.value = complex(value)

    def _diff(self):
        return Const(0)

    def _apply(self, ctx):
        return self.value

    def rebuild(self, ch):
        return self

    def to_str(self):
        v = self.value
        if v.imag == 0:
            r = v.real
            if r == int(r) and abs(r) < 1e15:
                s = str(int(r))
            else:
                s = repr(r)
            return s if r >= 0 else f"({s})"
        if v.real == 0:
            return f"({v.imag!r}j)"
        sign = "+" if v.imag >= 0 else "-"
        return f"({v.real!r}{sign}{abs(v.imag)!r}j)"


class Var(Expr):
    __slots__ = ()

    def _diff(self):
        return Const(1)

    def _apply(self, ctx):
        return ctx.z

    def rebuild(self, ch):
        return self

    def to_str(self):
        return "z"


Z = Var()


class Add(Expr):
    __slots__ = ("a", "b")
    prec = 10

    def __init__(self, a, b):
        super().__init__()
        self.a, self.b = a, b

    @property
    def children(self):
        return (self.a, self.b)

    def _diff(self):
        return add(self.a.diff(), self.b.diff())

    def _apply(self, ctx):
        return ctx.vals[self.a] + ctx.vals[self.b]

    def rebuild(self, ch):
        return add(*ch)

    def to_str(self):
        return f"{self.a.to_str()} + {self._wrap(self.b, 11)}"


class Mul(Expr):
    __slots__ = ("a", "b")
    prec = 20

    def __init__(self, a, b):
        super().__init__()
        self.a, self.b = a, b

    @property
    def children(self):
        return (self.a, self.b)

    def _diff(self):
        return add(mul(self.a.diff(), self.b), mul(self.a, self.b.diff()))

    def _apply(self, ctx):
        return ctx.vals[self.a] * ctx.vals[self.b]

    def rebuild(self, ch):
        return mul(*ch)

    def to_str(self):
        return f"{self._wrap(self.a, 20)}*{self._wrap(self.b, 21)}"


class Div(Expr):
    __slots__ = ("a", "b")
    prec = 20

    def __init__(self, a, b):
        super().__init__()
        self.a, self.b = a, b

    @property
    def children(self):
        return (self.a, self.b)

    def _diff(self):
        a, b = self.a, self.b
        return add(div(a.diff(), b), neg(div(mul(a, b.diff()), power(b, 2))))

    def _apply(self, ctx):
        return ctx.vals[self.a] / ctx.vals[self.b]

    def rebuild(self, ch):
        return div(*ch)

    def to_str(self):
        return f"{self._wrap(self.a, 20)}/{self._wrap(self.b, 21)}"


class IntPow(Expr):
    __slots__ = ("a", "n")
    prec = 30

    def __init__(self, a, n):
        super().__init__()
        self.a, self.n = a, int(n)

    @property
    def children(self):
        return (self.a,)

    def _diff(self):
        return mul(mul(Const(self.n), power(self.a, self.n - 1)), self.a.diff())

    def _apply(self, ctx):
        u = ctx.vals[self.a]
        if self.n >= 0:
            return u ** self.n
        return 1.0 / (u ** (-self.n))

    def rebuild(self, ch):
        return power(ch[0], self.n)

    def to_str(self):
        n = str(self.n) if self.n >= 0 else f"({self.n})"
        return f"{self._wrap(self.a, 31)}^{n}"


def _nearest_log(L, ref):
    k = np.round((np.imag(ref) - np.imag(L)) / TWO_PI)
    return L + 1j * TWO_PI * k


class RealPow(Expr):
    """``a**mu`` for real non-integer ``mu``; the branch follows ``log a``."""

    __slots__ = ("a", "mu")
    prec = 30
    branchy = True

    def __init__(self, a, mu):
        super().__init__()
        self.a, self.mu = a, float(mu)

    @property
    def children(self):
        return (self.a,)

    def _diff(self):
        return mul(Const(self.mu), mul(self, div(self.a.diff(), self.a)))

    def _apply(self, ctx):
        u = ctx.vals[self.a]
        L = np.log(np.asarray(u, dtype=complex))
        sh = ctx.sheet
        if sh is not None and self in sh.state:
            L = _nearest_log(L, sh.state[self])
        ctx.state[self] = L
        ctx.args[self] = u
        return np.exp(self.mu * L)

    def rebuild(self, ch):
        return power(ch[0], self.mu)

    def to_str(self):
        return f"{self._wrap(self.a, 31)}^({self.mu!r})"


class Exp(Expr):
    __slots__ = ("a",)
    prec = 40

    def __init__(self, a):
        super().__init__()
        self.a = a

    @property
    def children(self):
        return (self.a,)

    def _diff(self):
        return mul(self, self.a.diff())

    def _apply(self, ctx):
        return np.exp(ctx.vals[self.a])

    def rebuild(self, ch):
        return exp(ch[0])

    def to_str(self):
        return f"exp({self.a.to_str()})"


class Log(Expr):
    __slots__ = ("a",)
    prec = 40
    branchy = True

    def __init__(self, a):
        super().__init__()
        self.a = a

    @property
    def children(self):
        return (self.a,)

    def _diff(self):
        return div(self.a.diff(), self.a)

    def _apply(self, ctx):
        u = ctx.vals[self.a]
        L = np.log(np.asarray(u, dtype=complex))
        sh = ctx.sheet
        if sh is not None and self in sh.state:
            L = _nearest_log(L, sh.state[self])
        ctx.state[self] = L
        ctx.args[self] = u
        return L

    def rebuild(self, ch):
        return log(ch[0])

    def to_str(self):
        return f"log({self.a.to_str()})"


class Sqrt(Expr):
    __slots__ = ("a",)
    prec = 40
    branchy = True

    def __init__(self, a):
        super().__init__()
        self.a = a

    @property
    def children(self):
        return (self.a,)

    def _diff(self):
        return div(self.a.diff(), mul(Const(2), self))

    def _apply(self, ctx):
        u = ctx.vals[self.a]
        s = np.sqrt(np.asarray(u, dtype=complex))
        sh = ctx.sheet
        if sh is not None and self in sh.state:
            ref = sh.state[self]
            s = np.where(np.abs(s - ref) <= np.abs(s + ref), s, -s)
        ctx.state[self] = s
        ctx.args[self] = u
        return s

    def rebuild(self, ch):
        return sqrt(ch[0])

    def to_str(self):
        return f"sqrt({self.a.to_str()})"


class Primitive(Expr):
    """Antiderivative of ``f`` vanishing at ``z0`` (path dependent).

    With a sheet the value is the tracked value at ``sheet.point`` plus a
    15 point Gauss-Kronrod integral over the straight segment to ``z``.
    Without one it is obtained by continuation along the straight segment
    from ``z0``.
    """

    __slots__ = ("f", "z0")
    prec = 40
    branchy = True

    def __init__(self, f, z0):
        super().__init__()
        self.f, self.z0 = f, complex(z0)

    @property
    def children(self):
        return (self.f,)

    def _diff(self):
        return self.f

    def _apply(self, ctx):
        sh = ctx.sheet
        if sh is not None and self in sh.state:
            val, err = gk15(self.f, sh.point, ctx.z, sh)
            val = sh.state[self] + val
            ctx.err[self] = err
        else:
            val = _principal_primitive(self, ctx.z)
            ctx.err[self] = np.zeros(np.shape(val))
        ctx.state[self] = val
        ctx.args[self] = val
        return val

    def rebuild(self, ch):
        return Primitive(ch[0], self.z0)

    def to_str(self):
        return f"prim({self.f.to_str()}, {self.z0!r})"


def gk15(f, a, b, sheet=None):
    """Integrate ``f`` over the straight segment(s) from ``a`` to ``b``.

    Returns the Kronrod value and ``|K15 - G7|`` as error estimate.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    shape = np.broadcast(a, b).shape
    half = (b - a) / 2.0
    mid = (a + b) / 2.0
    x = GK_NODES.reshape((15,) + (1,) * len(shape))
    zs = mid + half * x
    fz = _run([f], zs, sheet).vals[f]
    fz = np.broadcast_to(fz, (15,) + shape)
    wk = GK_WEIGHTS.reshape(x.shape)
    wg = G_WEIGHTS.reshape(x.shape)
    k = np.sum(wk * fz, axis=0) * half
    g = np.sum(wg * fz, axis=0) * half
    return k, np.abs(k - g)


def _principal_primitive(node, z):
    from .contour import Contour

    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        if z == node.z0:
            return np.complex128(0)
        path = Contour([node.z0, complex(z)])
        return path.march([node]).end.state[node]
    flat = z.ravel()
    out = np.zeros(flat.shape, dtype=complex)
    mask = flat != node.z0
    if mask.any():
        path = Contour(np.stack([np.full(mask.sum(), node.z0), flat[mask]]))
        out[mask] = path.march([node]).end.state[node]
    return out.reshape(z.shape)


# ---------------------------------------------------------------------------
# folding constructors

def as_expr(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (numbers.Number, np.number)):
        return Const(x)
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


def _c(e, v):
    return isinstance(e, Const) and e.value == v


def add(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _c(a, 0):
        return b
    if _c(b, 0):
        return a
    return Add(a, b)


def neg(a):
    return mul(Const(-1), a)


def mul(a, b):
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _c(a, 0) or _c(b, 0):
        return Const(0)
    if _c(a, 1):
        return b
    if _c(b, 1):
        return a
    if isinstance(b, Const) and not isinstance(a, Const):
        a, b = b, a
    if isinstance(a, Const) and isinstance(b, Mul) and isinstance(b.a, Const):
        return mul(Const(a.value * b.a.value), b.b)
    return Mul(a, b)


def div(a, b):
    if isinstance(b, Const):
        if b.value == 0:
            raise ZeroDivisionError("division by the zero constant")
        return mul(Const(1 / b.value), a)
    if _c(a, 0):
        return Const(0)
    return Div(a, b)


def power(a, p):
    if isinstance(p, Expr):
        if not isinstance(p, Const):
            raise TypeError("exponent must be constant")
        p = p.value
    p = complex(p)
    if p.imag != 0:
        raise ValueError("only real exponents are supported")
    p = p.real
    if float(p).is_integer():
        n = int(p)
        if n == 0:
            return Const(1)
        if n == 1:
            return a
        if isinstance(a, Const):
            return Const(a.value ** n)
        if isinstance(a, IntPow):
            return power(a.a, a.n * n)
        return IntPow(a, n)
    if p == 0.5:
        return sqrt(a)
    if isinstance(a, Const):
        return Const(a.value ** p)
    return RealPow(a, p)


def exp(a):
    a = as_expr(a)
    if isinstance(a, Const):
        return Const(np.exp(a.value))
    return Exp(a)


def log(a):
    a = as_expr(a)
    if isinstance(a, Const):
        return Const(np.log(a.value))
    return Log(a)


def sqrt(a):
    a = as_expr(a)
    if isinstance(a, Const):
        return Const(np.sqrt(a.value))
    return Sqrt(a)


def primitive(f, z0):
    return Primitive(as_expr(f), z0)


# ---------------------------------------------------------------------------

def evaluate(e, z, sheet=None, strict=False, check=True):
    """Evaluate ``e`` (or a list of trees) at ``z``.

    ``strict`` refuses multivalued trees without a sheet.  ``check`` raises
    :class:`PoleHit` on non-finite output.
    """
    many = isinstance(e, (list, tuple))
    roots = list(e) if many else [e]
    if strict and sheet is None and any(r.multivalued for r in roots):
        raise BranchAmbiguous("multivalued expression needs a sheet")
    z = np.asarray(z, dtype=complex)
    ctx = _run(roots, z, sheet)
    shape = np.broadcast(z, sheet.point).shape if sheet is not None else z.shape
    out = []
    for r in roots:
        v = np.broadcast_to(np.asarray(ctx.vals[r], dtype=complex), shape).copy()
        if check and not np.all(np.isfinite(v)):
            raise PoleHit(f"non-finite value of {r.to_str()[:60]}")
        out.append(v if v.ndim else v[()])
    return out if many else out[0]


def run(roots, z, sheet=None):
    """Low level evaluation returning the internal context (values, branch state, errors)."""
    return _run(roots, np.asarray(z, dtype=complex), sheet)


def replace(root, mapping):
    """Rebuild ``root`` with nodes in ``mapping`` swapped for new subtrees."""
    new = {}
    for n in root.postorder():
        if n in mapping:
            new[n] = mapping[n]
        elif n.children:
            new[n] = n.rebuild([new[c] for c in n.children])
        else:
            new[n] = n
    return new[root]


def compose(root, g, anchor=None):
    """``root(g(zeta))`` as a tree in the new variable.

    Antiderivatives are re-based at ``anchor`` (a point in the new variable),
    their value there being fixed by continuation from their own base point.
    """
    g = as_expr(g)
    cache = {}
    out = {}
    for n in root.postorder():
        if n is Z:
            out[n] = g
        elif isinstance(n, Primitive):
            if anchor is None:
                raise ValueError("composition through an antiderivative needs an anchor")
            za = complex(evaluate(g, anchor))
            if n not in cache:
                cache[n] = complex(evaluate(n, za))
            out[n] = add(Const(cache[n]), Primitive(mul(out[n.f], g.diff()), anchor))
        elif n.children:
            out[n] = n.rebuild([out[c] for c in n.children])
        else:
            out[n] = n
    return out[root]


def is_zero(e, samples=None, tol=1e-12):
    """Numerical test for an identically vanishing tree."""
    if isinstance(e, Const):
        return e.value == 0
    if samples is None:
        samples = np.array([0.31 + 0.27j, -0.53 + 0.71j, 0.87 - 0.45j, -0.22 - 0.64j])
    try:
        v = evaluate(e, samples, check=False)
    except Exception:
        return False
    v = np.asarray(v)
    return bool(np.all(np.isfinite(v)) and np.max(np.abs(v)) <= tol)
