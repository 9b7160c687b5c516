"""Sparse multivariate polynomials over an arbitrary exact coefficient ring.

Coefficients may be Fraction, FieldScalar, or any object with ring dunders and
an ``inverse`` method; zero is detected by truthiness.  Exponent keys are int
tuples of fixed length ``nvars``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .. import kernels


class DivisibilityError(ArithmeticError):
    """Exact division failed: the computed remainder is nonzero."""


def invert_scalar(c):
    """Multiplicative inverse in the coefficient ring."""
    if isinstance(c, (int, Fraction)):
        if not c:
            raise ZeroDivisionError("inverse of zero")
        return Fraction(1) / Fraction(c)
    return c.inverse()


class Poly:
    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs: dict | None = None):
        self.nvars = nvars
        self.coeffs: dict = coeffs if coeffs is not None else {}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "Poly":
        return cls(nvars, {})

    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        if not c:
            return cls(nvars, {})
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, i: int, nvars: int, one) -> "Poly":
        key = tuple(1 if j == i else 0 for j in range(nvars))
        return cls(nvars, {key: one})

    @classmethod
    def linear_form(cls, coeffs: Iterable, constant=None) -> "Poly":
        """c0 + sum coeffs[i] * x_i, skipping zero entries."""
        coeffs = list(coeffs)
        nvars = len(coeffs)
        d: dict = {}
        for i, c in enumerate(coeffs):
            if c:
                d[tuple(1 if j == i else 0 for j in range(nvars))] = c
        if constant is not None and constant:
            d[(0,) * nvars] = constant
        return cls(nvars, d)

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def total_degree(self) -> int:
        """Max total degree; -1 for the zero polynomial."""
        if not self.coeffs:
            return -1
        return max(sum(k) for k in self.coeffs)

    def coeff(self, key: tuple):
        return self.coeffs.get(tuple(key))

    def constant_term(self):
        return self.coeffs.get((0,) * self.nvars)

    def sorted_terms(self) -> list[tuple[tuple, object]]:
        """Terms in graded-lexicographic order (degree, then lex), ascending."""
        return sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    # -- arithmetic --------------------------------------------------------

    def _check(self, other: "Poly"):
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        self._check(other)
        return Poly(self.nvars, kernels.dict_add(self.coeffs, other.coeffs))

    def __sub__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return NotImplemented
        self._check(other)
        return Poly(self.nvars, kernels.dict_sub(self.coeffs, other.coeffs))

    def __neg__(self) -> "Poly":
        return Poly(self.nvars, kernels.dict_neg(self.coeffs))

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return Poly(self.nvars, kernels.dict_mul(self.coeffs, other.coeffs))
        return Poly(self.nvars, kernels.dict_scale(self.coeffs, other))

    def __rmul__(self, other) -> "Poly":
        return Poly(self.nvars, kernels.dict_scale(self.coeffs, other))

    def mul_truncated(self, other: "Poly", max_deg: int) -> "Poly":
        self._check(other)
        return Poly(self.nvars, kernels.dict_mul(self.coeffs, other.coeffs, max_deg))

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result: Poly | None = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            raise ValueError("use Poly.const for the empty product; ring one unknown")
        return result

    def pow_with_one(self, n: int, one) -> "Poly":
        if n == 0:
            return Poly.const(self.nvars, one)
        return self ** n

    def truncate(self, max_deg: int) -> "Poly":
        return Poly(self.nvars, {k: c for k, c in self.coeffs.items() if sum(k) <= max_deg})

    def derivative(self, i: int) -> "Poly":
        out: dict = {}
        for k, c in self.coeffs.items():
            e = k[i]
            if not e:
                continue
            nk = k[:i] + (e - 1,) + k[i + 1:]
            p = c * e
            if p:
                prev = out.get(nk)
                out[nk] = p if prev is None else prev + p
                if not out[nk]:
                    del out[nk]
        return Poly(self.nvars, out)

    def map_coeffs(self, fn: Callable) -> "Poly":
        out = {}
        for k, c in self.coeffs.items():
            v = fn(c)
            if v:
                out[k] = v
        return Poly(self.nvars, out)

    def evaluate(self, point: list):
        """Value at a point given as a list of scalars (empty poly -> None)."""
        if len(point) != self.nvars:
            raise ValueError("point dimension mismatch")
        total = None
        for k, c in self.sorted_terms():
            v = c
            for i, e in enumerate(k):
                for _ in range(e):
                    v = v * point[i]
            total = v if total is None else total + v
        return total

    def substitute(self, mapping: Mapping[int, "Poly"], nvars_out: int, one) -> "Poly":
        """Substitute x_i -> mapping[i] (a Poly in the output variables);
        unmapped variables must not occur."""
        result = Poly.zero(nvars_out)
        for k, c in self.coeffs.items():
            term = Poly.const(nvars_out, one)
            for i, e in enumerate(k):
                if not e:
                    continue
                if i not in mapping:
                    raise KeyError(f"substitution missing variable {i}")
                term = term * mapping[i].pow_with_one(e, one)
            result = result + term * c
        return result

    # -- division ----------------------------------------------------------

    def divexact(self, divisor: "Poly") -> "Poly":
        """Exact division; raises DivisibilityError when the remainder is nonzero."""
        self._check(divisor)
        if divisor.is_zero:
            raise ZeroDivisionError("division by the zero polynomial")
        lt_key = max(divisor.coeffs)  # lex order: a valid monomial order
        lt_inv = invert_scalar(divisor.coeffs[lt_key])
        rest = {k: c for k, c in divisor.coeffs.items() if k != lt_key}
        quo: dict = {}
        rem = dict(self.coeffs)
        while rem:
            reducible = [k for k in rem if all(a >= b for a, b in zip(k, lt_key))]
            if not reducible:
                raise DivisibilityError(
                    f"nonzero remainder with {len(rem)} terms in exact division"
                )
            k = max(reducible)
            qk = tuple(a - b for a, b in zip(k, lt_key))
            qc = rem.pop(k) * lt_inv
            quo[qk] = quo.get(qk, None)
            quo[qk] = qc if quo[qk] is None else quo[qk] + qc
            if not quo[qk]:
                del quo[qk]
            for dk, dc in rest.items():
                tk = tuple(a + b for a, b in zip(qk, dk))
                p = qc * dc
                prev = rem.get(tk)
                if prev is None:
                    if p:
                        rem[tk] = -p
                else:
                    s = prev - p
                    if s:
                        rem[tk] = s
                    else:
                        del rem[tk]
        return Poly(self.nvars, quo)

    # -- comparison / misc -------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.nvars, tuple(sorted(
            (k, hash(c)) for k, c in self.coeffs.items()
        ))))

    def __repr__(self) -> str:
        return f"Poly({self.nvars}, {self.to_str()})"

    def to_str(self, names: list[str] | None = None) -> str:
        if not self.coeffs:
            return "0"
        if names is None:
            names = [f"x{i+1}" for i in range(self.nvars)]
        parts = []
        for k, c in self.sorted_terms():
            mono = "*".join(
                f"{names[i]}^{e}" if e > 1 else names[i]
                for i, e in enumerate(k) if e
            )
            cs = str(c)
            if mono:
                if cs == "1":
                    parts.append(mono)
                elif cs == "-1":
                    parts.append(f"-{mono}")
                else:
                    cs2 = f"({cs})" if ("+" in cs or (" " in cs)) else cs
                    parts.append(f"{cs2}*{mono}")
            else:
                parts.append(f"({cs})" if "+" in cs else cs)
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text


def divided_difference(numerator: Poly, linear: Poly) -> Poly:
    """Exact quotient numerator / linear, for linear forms; DivisibilityError on failure."""
    return numerator.divexact(linear)
