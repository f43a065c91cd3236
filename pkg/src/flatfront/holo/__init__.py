"""Holomorphic data layer: expression trees, continuation, local expansions."""
from .expr import (Const, Expr, Primitive, Sheet, Z, compose, evaluate, exp, log,
                   power, primitive, replace, sqrt)
from .contour import Contour, contour_integrate
from .parse import parse

__all__ = ["Const", "Contour", "Expr", "Primitive", "Sheet", "Z", "compose",
           "contour_integrate", "evaluate", "exp", "log", "parse", "power",
           "primitive", "replace", "sqrt"]
