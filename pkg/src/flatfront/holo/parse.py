"""Text grammar for expressions such as ``"exp(-2*z/b)"`` or ``"z^3 - 1"``."""
from __future__ import annotations

import ast
import cmath
import math

from ..errors import ParseError
from . import expr as E

_FUNCS = {"exp": E.exp, "log": E.log, "sqrt": E.sqrt}
_CONSTS = {"i": 1j, "I": 1j, "j": 1j, "pi": math.pi, "e": math.e}


def parse(text, names=None):
    """Parse ``text`` into an expression tree in the variable ``z``.

    ``names`` binds extra identifiers to numbers or trees (for instance
    parameters ``b``, ``c`` or the hyperelliptic coordinate ``w``).  Both
    ``^`` and ``**`` denote powers; exponents must reduce to real constants.
    """
    names = dict(names or {})
    if not isinstance(text, str):
        raise ParseError("expression must be a string")
    src = text.replace("^", "**").strip()
    if not src:
        raise ParseError("empty expression")
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None
    return _walk(tree.body, names, text)


def _walk(node, names, text):
    w = lambda n: _walk(n, names, text)
    if isinstance(node, ast.BinOp):
        a, b = w(node.left), w(node.right)
        op = node.op
        if isinstance(op, ast.Add):
            return a + b
        if isinstance(op, ast.Sub):
            return a - b
        if isinstance(op, ast.Mult):
            return a * b
        if isinstance(op, ast.Div):
            if isinstance(b, E.Const) and b.value == 0:
                raise ParseError(f"division by zero in {text!r}")
            return a / b
        if isinstance(op, ast.Pow):
            if not isinstance(b, E.Const):
                raise ParseError(f"non-constant exponent in {text!r}")
            try:
                return E.power(a, b)
            except ValueError as exc:
                raise ParseError(str(exc)) from None
        raise ParseError(f"unsupported operator in {text!r}")
    if isinstance(node, ast.UnaryOp):
        a = w(node.operand)
        if isinstance(node.op, ast.USub):
            return -a
        if isinstance(node.op, ast.UAdd):
            return a
        raise ParseError(f"unsupported unary operator in {text!r}")
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ParseError(f"unknown function in {text!r}")
        if len(node.args) != 1 or node.keywords:
            raise ParseError(f"{node.func.id} takes one argument")
        return _FUNCS[node.func.id](w(node.args[0]))
    if isinstance(node, ast.Name):
        key = node.id
        if key == "z":
            return E.Z
        if key in names:
            return E.as_expr(names[key])
        if key in _CONSTS:
            return E.Const(_CONSTS[key])
        raise ParseError(f"unknown name {key!r} in {text!r}")
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float, complex)) \
            and not isinstance(node.value, bool):
        v = complex(node.value)
        if not cmath.isfinite(v):
            raise ParseError("non-finite constant")
        return E.Const(v)
    raise ParseError(f"unsupported syntax in {text!r}")
