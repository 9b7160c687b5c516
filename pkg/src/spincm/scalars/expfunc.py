"""Exponential polynomials and their fractions on a lattice (1/Q)Z^n.

An ExpPoly is a finite sum  sum_k  c_k * exp((k/q) . y)  with integer exponent
vectors k; the lattice denominator q is carried per object and unified (lcm)
on every binary operation.  ExpFunc is a fraction of two ExpPolys; since every
exponential monomial is invertible, normalisation shifts the common support to
start at the origin and rescales the denominator's leading coefficient to one.

Shifts of the argument by pi*i are represented by coefficient signs:
exp(z + pi*i) = -exp(z).
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from .. import kernels
from .poly import invert_scalar


class ExpPoly:
    __slots__ = ("nvars", "q", "coeffs")

    def __init__(self, nvars: int, q: int, coeffs: dict | None = None):
        if q <= 0:
            raise ValueError("lattice denominator must be positive")
        self.nvars = nvars
        self.q = q
        self.coeffs: dict = coeffs if coeffs is not None else {}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "ExpPoly":
        return cls(nvars, 1, {})

    @classmethod
    def const(cls, nvars: int, c) -> "ExpPoly":
        if not c:
            return cls(nvars, 1, {})
        return cls(nvars, 1, {(0,) * nvars: c})

    @classmethod
    def exponential(cls, vec: Sequence, coeff) -> "ExpPoly":
        """coeff * exp((vec, y)) for a rational exponent vector."""
        fracs = [Fraction(v) for v in vec]
        q = lcm(1, *(f.denominator for f in fracs)) if fracs else 1
        key = tuple(int(f * q) for f in fracs)
        if not coeff:
            return cls(len(fracs), q, {})
        return cls(len(fracs), q, {key: coeff})

    # -- lattice handling --------------------------------------------------

    def rescaled(self, q_new: int) -> "ExpPoly":
        if q_new == self.q:
            return self
        if q_new % self.q:
            raise ValueError(f"cannot rescale lattice 1/{self.q} to 1/{q_new}")
        m = q_new // self.q
        return ExpPoly(self.nvars, q_new,
                       {tuple(e * m for e in k): c for k, c in self.coeffs.items()})

    @staticmethod
    def unify(a: "ExpPoly", b: "ExpPoly") -> tuple["ExpPoly", "ExpPoly"]:
        if a.nvars != b.nvars:
            raise ValueError("variable count mismatch")
        q = lcm(a.q, b.q)
        return a.rescaled(q), b.rescaled(q)

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def sorted_terms(self):
        return sorted(self.coeffs.items(), key=lambda kv: kv[0])

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        a, b = ExpPoly.unify(self, other)
        return ExpPoly(a.nvars, a.q, kernels.dict_add(a.coeffs, b.coeffs))

    def __sub__(self, other) -> "ExpPoly":
        if not isinstance(other, ExpPoly):
            return NotImplemented
        a, b = ExpPoly.unify(self, other)
        return ExpPoly(a.nvars, a.q, kernels.dict_sub(a.coeffs, b.coeffs))

    def __neg__(self) -> "ExpPoly":
        return ExpPoly(self.nvars, self.q, kernels.dict_neg(self.coeffs))

    def __mul__(self, other) -> "ExpPoly":
        if isinstance(other, ExpPoly):
            a, b = ExpPoly.unify(self, other)
            return ExpPoly(a.nvars, a.q, kernels.dict_mul(a.coeffs, b.coeffs))
        return ExpPoly(self.nvars, self.q, kernels.dict_scale(self.coeffs, other))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ExpPoly":
        if n < 0:
            raise ValueError("negative power of an ExpPoly; use ExpFunc")
        result: ExpPoly | None = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            raise ValueError("empty product: ring one unknown; use ExpPoly.const")
        return result

    def derivative(self, i: int) -> "ExpPoly":
        out = {}
        for k, c in self.coeffs.items():
            if k[i]:
                p = c * Fraction(k[i], self.q)
                if p:
                    out[k] = p
        return ExpPoly(self.nvars, self.q, out)

    def derivative_along(self, vec: Sequence[Fraction]) -> "ExpPoly":
        out = {}
        for k, c in self.coeffs.items():
            rate = sum(Fraction(e, self.q) * Fraction(v) for e, v in zip(k, vec))
            if rate:
                p = c * rate
                if p:
                    out[k] = p
        return ExpPoly(self.nvars, self.q, out)

    def shifted(self, delta: tuple) -> "ExpPoly":
        """Multiply by the monomial exp((delta/q, y)) (delta in lattice units)."""
        return ExpPoly(self.nvars, self.q,
                       {tuple(e + d for e, d in zip(k, delta)): c
                        for k, c in self.coeffs.items()})

    def evaluate(self, unit_values: list, q: int):
        """Value after substituting exp(y_i/q) -> unit_values[i]; q must be a
        multiple of this object's lattice denominator."""
        obj = self.rescaled(q)
        total = None
        for k, c in obj.sorted_terms():
            v = c
            for i, e in enumerate(k):
                if e > 0:
                    for _ in range(e):
                        v = v * unit_values[i]
                elif e < 0:
                    inv = invert_scalar(unit_values[i])
                    for _ in range(-e):
                        v = v * inv
            total = v if total is None else total + v
        return total

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpPoly):
            return NotImplemented
        a, b = ExpPoly.unify(self, other)
        return a.coeffs == b.coeffs

    __hash__ = None

    def __repr__(self) -> str:
        return f"ExpPoly(q={self.q}, {self.to_str()})"

    def to_str(self, names: list[str] | None = None) -> str:
        if not self.coeffs:
            return "0"
        if names is None:
            names = [f"y{i+1}" for i in range(self.nvars)]
        parts = []
        for k, c in self.sorted_terms():
            expo = "+".join(
                (f"{Fraction(e, self.q)}*{names[i]}" if Fraction(e, self.q) != 1
                 else names[i])
                for i, e in enumerate(k) if e
            ).replace("+-", "-")
            cs = str(c)
            if expo:
                body = f"exp({expo})"
                if cs == "1":
                    parts.append(body)
                elif cs == "-1":
                    parts.append(f"-{body}")
                else:
                    cs2 = f"({cs})" if ("+" in cs or " " in cs) else cs
                    parts.append(f"{cs2}*{body}")
            else:
                parts.append(f"({cs})" if "+" in cs else cs)
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return text


def _common_direction(keys):
    """The primitive integer vector every key is an integer multiple of, or
    None when the keys do not lie on one line through the origin."""
    base = None
    for k in keys:
        if any(k):
            base = k
            break
    if base is None:
        return None
    from math import gcd
    g = 0
    for e in base:
        g = gcd(g, abs(e))
    prim = tuple(e // g for e in base)
    for e in prim:
        if e:
            if e < 0:
                prim = tuple(-x for x in prim)
            break
    i0 = next(i for i, e in enumerate(prim) if e)
    for k in keys:
        t, r = divmod(k[i0], prim[i0])
        if r or tuple(e * t for e in prim) != tuple(k):
            return None
    return prim


def _line_reduce(num: ExpPoly, den: ExpPoly):
    """Cancel the polynomial gcd of num and den when both are supported on a
    single lattice line (the one-effective-variable case); returns the pair
    unchanged otherwise."""
    keys = list(num.coeffs) + list(den.coeffs)
    prim = _common_direction(keys)
    if prim is None:
        return num, den
    i0 = next(i for i, e in enumerate(prim) if e)

    def to_poly(p):
        d = {k[i0] // prim[i0]: c for k, c in p.coeffs.items()}
        lo = min(d)
        out = [None] * (max(d) - lo + 1)
        for t, c in d.items():
            out[t - lo] = c
        zero = next(iter(d.values()))
        zero = zero - zero
        return [zero if c is None else c for c in out], lo

    a, lo_a = to_poly(num)
    b, lo_b = to_poly(den)
    if len(a) == 1 or len(b) == 1:
        return num, den

    def rem(big, small):
        big = list(big)
        inv_lead = small[-1]
        for top in range(len(big) - 1, len(small) - 2, -1):
            c = big[top]
            if c:
                factor = c / inv_lead
                off = top - (len(small) - 1)
                for j in range(len(small)):
                    big[off + j] = big[off + j] - factor * small[j]
        while big and not big[-1]:
            big.pop()
        return big

    x, y = list(a), list(b)
    while y:
        x, y = y, rem(x, y)
    if len(x) <= 1:
        return num, den
    g = x

    def quot(big, small):
        big = list(big)
        q = [None] * (len(big) - len(small) + 1)
        for top in range(len(big) - 1, len(small) - 2, -1):
            c = big[top]
            off = top - (len(small) - 1)
            factor = c / small[-1]
            q[off] = factor
            if factor:
                for j in range(len(small)):
                    big[off + j] = big[off + j] - factor * small[j]
        zero = small[-1] - small[-1]
        return [zero if c is None else c for c in q]

    qa, qb = quot(a, g), quot(b, g)

    def from_poly(lst, lo, template):
        out = {}
        for t, c in enumerate(lst):
            if c:
                out[tuple(e * (t + lo) for e in prim)] = c
        return ExpPoly(template.nvars, template.q, out)

    return from_poly(qa, lo_a, num), from_poly(qb, lo_b, den)


class ExpFunc:
    __slots__ = ("num", "den")

    def __init__(self, num: ExpPoly, den: ExpPoly, normalize: bool = True):
        if den.is_zero:
            raise ZeroDivisionError("zero denominator in ExpFunc")
        num, den = ExpPoly.unify(num, den)
        if normalize and not num.is_zero and len(den.coeffs) > 1:
            num, den = _line_reduce(num, den)
            num, den = ExpPoly.unify(num, den)
        if normalize:
            keys = list(num.coeffs) + list(den.coeffs)
            mins = list(keys[0])
            for k in keys[1:]:
                for i, e in enumerate(k):
                    if e < mins[i]:
                        mins[i] = e
            if any(mins):
                shift = tuple(-m for m in mins)
                num = num.shifted(shift)
                den = den.shifted(shift)
            lc_key = max(den.coeffs)
            lc = den.coeffs[lc_key]
            inv = invert_scalar(lc)
            one = lc * inv
            if num.is_zero:
                den = ExpPoly.const(den.nvars, one)
            elif not (inv == one):
                num = ExpPoly(num.nvars, num.q,
                              {k: c * inv for k, c in num.coeffs.items()})
                den = ExpPoly(den.nvars, den.q,
                              {k: c * inv for k, c in den.coeffs.items()})
            num, den = ExpPoly.unify(num, den)
        self.num = num
        self.den = den

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_exppoly(cls, p: ExpPoly, one) -> "ExpFunc":
        return cls(p, ExpPoly.const(p.nvars, one), normalize=False)

    @classmethod
    def const(cls, nvars: int, c, one) -> "ExpFunc":
        return cls(ExpPoly.const(nvars, c), ExpPoly.const(nvars, one),
                   normalize=False)

    @classmethod
    def exponential(cls, vec: Sequence, coeff, one) -> "ExpFunc":
        return cls(ExpPoly.exponential(vec, coeff),
                   ExpPoly.const(len(list(vec)), one), normalize=False)

    @property
    def nvars(self) -> int:
        return self.num.nvars

    @property
    def one_coeff(self):
        lc_key = max(self.den.coeffs)
        return self.den.coeffs[lc_key]

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __bool__(self) -> bool:
        return not self.num.is_zero

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, ExpFunc):
            return other
        return ExpFunc.const(self.nvars, other, self.one_coeff)

    def __add__(self, other) -> "ExpFunc":
        other = self._coerce(other)
        if self.den == other.den:
            return ExpFunc(self.num + other.num, self.den)
        return ExpFunc(self.num * other.den + other.num * self.den,
                       self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "ExpFunc":
        return ExpFunc(-self.num, self.den, normalize=False)

    def __sub__(self, other) -> "ExpFunc":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ExpFunc":
        return (-self) + other

    def __mul__(self, other) -> "ExpFunc":
        if isinstance(other, ExpFunc):
            return ExpFunc(self.num * other.num, self.den * other.den)
        return ExpFunc(self.num * other, self.den)

    __rmul__ = __mul__

    def inverse(self) -> "ExpFunc":
        if self.num.is_zero:
            raise ZeroDivisionError("inverse of zero ExpFunc")
        return ExpFunc(self.den, self.num)

    def __truediv__(self, other) -> "ExpFunc":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "ExpFunc":
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "ExpFunc":
        if n < 0:
            return self.inverse() ** (-n)
        one = self.one_coeff
        result = ExpFunc.const(self.nvars, one, one)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, i: int) -> "ExpFunc":
        return ExpFunc(
            self.num.derivative(i) * self.den - self.num * self.den.derivative(i),
            self.den * self.den,
        )

    def derivative_along(self, vec: Sequence[Fraction]) -> "ExpFunc":
        return ExpFunc(
            self.num.derivative_along(vec) * self.den
            - self.num * self.den.derivative_along(vec),
            self.den * self.den,
        )

    # -- comparison / evaluation -------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExpFunc):
            try:
                other = self._coerce(other)
            except Exception:
                return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    __hash__ = None

    def evaluate(self, unit_values: list, q: int):
        dv = self.den.evaluate(unit_values, q)
        if dv is None or not dv:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        nv = self.num.evaluate(unit_values, q)
        if nv is None:
            return dv * invert_scalar(dv) * 0
        return nv * invert_scalar(dv)

    def __repr__(self) -> str:
        return f"ExpFunc({self.to_str()})"

    def to_str(self, names: list[str] | None = None) -> str:
        ns = self.num.to_str(names)
        den_const = (not any(k for k in self.den.coeffs)
                     and self.den.coeffs.get((0,) * self.nvars) == self.one_coeff)
        if den_const:
            return ns
        ds = self.den.to_str(names)
        ns_p = f"({ns})" if " " in ns else ns
        ds_p = f"({ds})" if (" " in ds or "*" in ds) else ds
        return f"{ns_p}/{ds_p}"


# -- standard trigonometric building blocks --------------------------------

def sinh_half_inv_sq(vec: Sequence, one, pi_shift: bool = False) -> ExpFunc:
    """1 / sinh^2( ((vec,y) + t)/2 )  with t = pi*i when pi_shift is set.

    Equals 4*s*exp(z)/(exp(z)-s)^2 with z=(vec,y), s=+1 (no shift) or -1.
    """
    sign = -1 if pi_shift else 1
    e_z = ExpPoly.exponential(vec, one)
    numer = e_z * (4 * Fraction(sign))
    base = e_z + ExpPoly.const(e_z.nvars, one * (-sign))
    return ExpFunc(numer, base * base)


def coth_half(vec: Sequence, one, pi_shift: bool = False) -> ExpFunc:
    """coth( ((vec,y) + t)/2 ) = (exp(z)+s)/(exp(z)-s), s as above."""
    sign = -1 if pi_shift else 1
    e_z = ExpPoly.exponential(vec, one)
    return ExpFunc(e_z + ExpPoly.const(e_z.nvars, one * Fraction(sign)),
                   e_z + ExpPoly.const(e_z.nvars, one * Fraction(-sign)))
