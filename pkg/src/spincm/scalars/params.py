"""Symbolic parameter fields: rational functions in named parameters over the
multi-quadratic scalar field.

Multiplicities, frequencies, and base-point coordinates that stay symbolic are
elements of a ParamField: RatFunc objects in the field's variables with
FieldScalar coefficients.
"""

from __future__ import annotations

from fractions import Fraction

from .field import FieldScalar
from .poly import Poly
from .ratfunc import RatFunc


class ParamField:
    """A fixed tuple of parameter names with constructors for its elements."""

    def __init__(self, names: tuple[str, ...] | list[str]):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate parameter names")
        self._fs_one = FieldScalar.rational(1)

    @property
    def nvars(self) -> int:
        return len(self.names)

    @property
    def one(self) -> RatFunc:
        return RatFunc.const(self.nvars, self._fs_one, self._fs_one)

    @property
    def zero(self) -> RatFunc:
        return RatFunc.const(self.nvars, FieldScalar(), self._fs_one)

    def sym(self, name: str) -> RatFunc:
        try:
            i = self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown parameter {name!r}; field has {self.names}")
        return RatFunc.variable(i, self.nvars, self._fs_one)

    def const(self, value) -> RatFunc:
        return RatFunc.const(self.nvars, FieldScalar.coerce(value), self._fs_one)

    def lift(self, value) -> RatFunc:
        """Coerce a Fraction/int/FieldScalar/element into this field."""
        if isinstance(value, RatFunc):
            if value.nvars != self.nvars:
                raise ValueError("parameter-field arity mismatch")
            return value
        if isinstance(value, FieldScalar):
            return RatFunc.const(self.nvars, value, self._fs_one)
        return self.const(Fraction(value))

    def evaluate(self, element: RatFunc, values: dict[str, FieldScalar]) -> FieldScalar:
        point = [FieldScalar.coerce(values[n]) for n in self.names]
        return element.evaluate(point)
