"""Exact scalar towers: rationals, multi-quadratic fields, polynomial and
exponential fractions."""

from .field import FieldScalar, parse_scalar, ONE, ZERO
from .poly import DivisibilityError, Poly, invert_scalar
from .ratfunc import RatFunc
from .expfunc import ExpFunc, ExpPoly, coth_half, sinh_half_inv_sq

__all__ = [
    "FieldScalar",
    "parse_scalar",
    "ONE",
    "ZERO",
    "DivisibilityError",
    "Poly",
    "invert_scalar",
    "RatFunc",
    "ExpFunc",
    "ExpPoly",
    "coth_half",
    "sinh_half_inv_sq",
]
