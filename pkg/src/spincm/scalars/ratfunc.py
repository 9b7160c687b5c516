"""Fractions of sparse multivariate polynomials, with equality by cross-multiplication.

No gcd reduction is performed; normalisation only cancels a common monomial
factor and rescales so the denominator's lex-leading coefficient is one.  This
keeps every operation exact over any coefficient ring (including nested
RatFunc coefficients for symbolic parameters).
"""

from __future__ import annotations

from fractions import Fraction

from .poly import Poly, invert_scalar


def _common_monomial(a: Poly, b: Poly) -> tuple | None:
    """Largest monomial dividing every term of both polynomials."""
    keys = list(a.coeffs) + list(b.coeffs)
    if not keys:
        return None
    mins = list(keys[0])
    for k in keys[1:]:
        for i, e in enumerate(k):
            if e < mins[i]:
                mins[i] = e
    if not any(mins):
        return None
    return tuple(mins)


class RatFunc:
    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly, normalize: bool = True):
        if num.nvars != den.nvars:
            raise ValueError("numerator/denominator variable count mismatch")
        if den.is_zero:
            raise ZeroDivisionError("zero denominator in RatFunc")
        if normalize:
            m = _common_monomial(num, den)
            if m is not None:
                shift = lambda d: {tuple(e - me for e, me in zip(k, m)): c
                                   for k, c in d.items()}
                num = Poly(num.nvars, shift(num.coeffs))
                den = Poly(den.nvars, shift(den.coeffs))
            lc_key = max(den.coeffs)
            lc = den.coeffs[lc_key]
            inv = invert_scalar(lc)
            one = lc * inv
            if num.is_zero:
                den = Poly.const(den.nvars, one)
            elif not (inv == one):
                num = num.map_coeffs(lambda c: c * inv)
                den = den.map_coeffs(lambda c: c * inv)
        self.num = num
        self.den = den

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_poly(cls, p: Poly, one) -> "RatFunc":
        return cls(p, Poly.const(p.nvars, one), normalize=False)

    @classmethod
    def const(cls, nvars: int, c, one) -> "RatFunc":
        return cls(Poly.const(nvars, c), Poly.const(nvars, one), normalize=False)

    @classmethod
    def variable(cls, i: int, nvars: int, one) -> "RatFunc":
        return cls(Poly.variable(i, nvars, one), Poly.const(nvars, one),
                   normalize=False)

    @property
    def nvars(self) -> int:
        return self.num.nvars

    @property
    def one_coeff(self):
        """The ring one, recovered from the normalised denominator."""
        lc_key = max(self.den.coeffs)
        return self.den.coeffs[lc_key]

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __bool__(self) -> bool:
        return not self.num.is_zero

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            return other
        # ring scalar (Fraction, int, FieldScalar, nested RatFunc coefficient)
        return RatFunc.const(self.nvars, other, self.one_coeff)

    def __add__(self, other) -> "RatFunc":
        other = self._coerce(other)
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den, normalize=False)

    def __sub__(self, other) -> "RatFunc":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RatFunc":
        return (-self) + other

    def __mul__(self, other) -> "RatFunc":
        if isinstance(other, RatFunc):
            return RatFunc(self.num * other.num, self.den * other.den)
        return RatFunc(self.num * other, self.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.num.is_zero:
            raise ZeroDivisionError("inverse of zero RatFunc")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other) -> "RatFunc":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "RatFunc":
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "RatFunc":
        if n < 0:
            return self.inverse() ** (-n)
        one = self.one_coeff
        result = RatFunc.const(self.nvars, one, one)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, i: int) -> "RatFunc":
        return RatFunc(
            self.num.derivative(i) * self.den - self.num * self.den.derivative(i),
            self.den * self.den,
        )

    # -- comparison / evaluation -------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatFunc):
            try:
                other = self._coerce(other)
            except Exception:
                return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    __hash__ = None  # not canonical; never use as a dict key

    def evaluate(self, point: list):
        dv = self.den.evaluate(point)
        if dv is None or not dv:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        nv = self.num.evaluate(point)
        if nv is None:
            return dv * invert_scalar(dv) * 0
        return nv * invert_scalar(dv)

    def substitute(self, mapping, nvars_out: int, one) -> "RatFunc":
        return RatFunc(self.num.substitute(mapping, nvars_out, one),
                       self.den.substitute(mapping, nvars_out, one))

    def __repr__(self) -> str:
        return f"RatFunc({self.to_str()})"

    def to_str(self, names: list[str] | None = None) -> str:
        ns = self.num.to_str(names)
        if self.den.total_degree() == 0 and self.den.constant_term() == self.one_coeff:
            return ns
        ds = self.den.to_str(names)
        ns_p = f"({ns})" if (" " in ns) else ns
        ds_p = f"({ds})" if (" " in ds or "*" in ds or "^" in ds) else ds
        return f"{ns_p}/{ds_p}"
