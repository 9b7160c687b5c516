"""Exact arithmetic in multi-quadratic towers Q(sqrt(p1), ..., sqrt(ps)).

A scalar is a finite sum  sum_S  q_S * sqrt(prod S)  over squarefree sets S of
primes, with rational q_S.  Addition/multiplication are closed because
sqrt(S) * sqrt(T) = (prod of S&T) * sqrt(S^T); inversion works by repeated
conjugation, eliminating one prime per step.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt, sqrt as _fsqrt
from typing import Iterable


def _factor_squarefree(n: int) -> tuple[int, frozenset[int]]:
    """Write n > 0 as  square * squarefree  and return (sqrt(square), primes)."""
    if n <= 0:
        raise ValueError(f"expected a positive integer, got {n}")
    root, primes = 1, []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            root *= d ** (e // 2)
            if e % 2:
                primes.append(d)
        d += 1 if d == 2 else 2
    if n > 1:
        primes.append(n)
    return root, frozenset(primes)


_SQRT_CACHE: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}


def _sqrt_interval(n: int, digits: int) -> tuple[Fraction, Fraction]:
    """Rational interval containing sqrt(n), of width 10**-digits."""
    key = (n, digits)
    hit = _SQRT_CACHE.get(key)
    if hit is None:
        scale = 10 ** digits
        lo = isqrt(n * scale * scale)
        hit = (Fraction(lo, scale), Fraction(lo + 1, scale))
        _SQRT_CACHE[key] = hit
    return hit


class FieldScalar:
    """An element of a multi-quadratic number field, exact and immutable."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: dict[frozenset[int], Fraction] | None = None):
        clean: dict[frozenset[int], Fraction] = {}
        if terms:
            for key, coeff in terms.items():
                c = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
                if c:
                    clean[frozenset(key)] = c
        self._terms = clean
        self._hash: int | None = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def rational(cls, q) -> "FieldScalar":
        return cls({frozenset(): Fraction(q)})

    @classmethod
    def sqrt(cls, q) -> "FieldScalar":
        """Exact square root of a positive rational, e.g. sqrt(3/5) = sqrt(15)/5."""
        q = Fraction(q)
        if q < 0:
            raise ValueError(f"cannot take sqrt of negative rational {q}")
        if q == 0:
            return cls()
        root, primes = _factor_squarefree(q.numerator * q.denominator)
        return cls({primes: Fraction(root, q.denominator)})

    @classmethod
    def coerce(cls, value) -> "FieldScalar":
        if isinstance(value, FieldScalar):
            return value
        if isinstance(value, (int, Fraction)):
            return cls.rational(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to FieldScalar")

    # -- structure ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def is_rational(self) -> bool:
        return all(not key for key in self._terms)

    def as_fraction(self) -> Fraction:
        if not self._terms:
            return Fraction(0)
        if not self.is_rational:
            raise ValueError(f"{self} is not rational")
        return self._terms[frozenset()]

    def terms(self) -> list[tuple[frozenset[int], Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: sorted(kv[0]))

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "FieldScalar":
        if isinstance(other, (int, Fraction)):
            other = FieldScalar.rational(other)
        elif not isinstance(other, FieldScalar):
            return NotImplemented
        out = dict(self._terms)
        for key, c in other._terms.items():
            s = out.get(key, Fraction(0)) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        res = FieldScalar.__new__(FieldScalar)
        res._terms = out
        res._hash = None
        return res

    __radd__ = __add__

    def __neg__(self) -> "FieldScalar":
        res = FieldScalar.__new__(FieldScalar)
        res._terms = {k: -c for k, c in self._terms.items()}
        res._hash = None
        return res

    def __sub__(self, other) -> "FieldScalar":
        if isinstance(other, (int, Fraction)):
            other = FieldScalar.rational(other)
        elif not isinstance(other, FieldScalar):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "FieldScalar":
        return (-self) + other

    def __mul__(self, other) -> "FieldScalar":
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            if not q:
                return FieldScalar()
            res = FieldScalar.__new__(FieldScalar)
            res._terms = {k: c * q for k, c in self._terms.items()}
            res._hash = None
            return res
        if not isinstance(other, FieldScalar):
            return NotImplemented
        out: dict[frozenset[int], Fraction] = {}
        for ka, ca in self._terms.items():
            for kb, cb in other._terms.items():
                key = ka ^ kb
                c = ca * cb
                for p in ka & kb:
                    c *= p
                s = out.get(key, Fraction(0)) + c
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        res = FieldScalar.__new__(FieldScalar)
        res._terms = out
        res._hash = None
        return res

    __rmul__ = __mul__

    def inverse(self) -> "FieldScalar":
        if not self._terms:
            raise ZeroDivisionError("inverse of zero FieldScalar")
        primes: set[int] = set()
        for key in self._terms:
            primes |= key
        if not primes:
            return FieldScalar.rational(1 / self._terms[frozenset()])
        p = max(primes)
        plain: dict[frozenset[int], Fraction] = {}
        with_p: dict[frozenset[int], Fraction] = {}
        for key, c in self._terms.items():
            if p in key:
                with_p[key - {p}] = c
            else:
                plain[key] = c
        a = FieldScalar(plain)
        b = FieldScalar(with_p)
        # self = a + sqrt(p)*b; conjugate is a - sqrt(p)*b, product a^2 - p b^2
        norm = a * a - (b * b) * p
        if not norm:
            raise ZeroDivisionError(
                "norm vanished during inversion; element is not a unit"
            )
        inv_norm = norm.inverse()  # strictly fewer primes: terminates
        sqrt_p = FieldScalar({frozenset([p]): Fraction(1)})
        return (a - sqrt_p * b) * inv_norm

    def __truediv__(self, other) -> "FieldScalar":
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division of FieldScalar by zero")
            return self * (Fraction(1) / Fraction(other))
        if not isinstance(other, FieldScalar):
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> "FieldScalar":
        return FieldScalar.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "FieldScalar":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = FieldScalar.rational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparisons -------------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = FieldScalar.rational(other)
        elif not isinstance(other, FieldScalar):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(sorted(
                (tuple(sorted(k)), c.numerator, c.denominator)
                for k, c in self._terms.items()
            )))
        return self._hash

    def sign(self, max_digits: int = 220) -> int:
        """Exact sign of this (real) number via rational interval refinement."""
        if not self._terms:
            return 0
        digits = 20
        while digits <= max_digits:
            lo_sum = Fraction(0)
            hi_sum = Fraction(0)
            for key, c in self._terms.items():
                lo, hi = Fraction(1), Fraction(1)
                for p in key:
                    plo, phi = _sqrt_interval(p, digits)
                    lo, hi = lo * plo, hi * phi
                if c >= 0:
                    lo_sum += c * lo
                    hi_sum += c * hi
                else:
                    lo_sum += c * hi
                    hi_sum += c * lo
            if lo_sum > 0:
                return 1
            if hi_sum < 0:
                return -1
            digits *= 2
        raise ArithmeticError(f"sign of {self} undecided at {max_digits} digits")

    def __float__(self) -> float:
        total = 0.0
        for key, c in self._terms.items():
            v = float(c)
            for p in key:
                v *= _fsqrt(p)
            total += v
        return total

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "terms": [
                {"primes": sorted(key), "num": c.numerator, "den": c.denominator}
                for key, c in self.terms()
            ]
        }

    @classmethod
    def from_json(cls, data: dict) -> "FieldScalar":
        terms: dict[frozenset[int], Fraction] = {}
        for t in data["terms"]:
            terms[frozenset(t["primes"])] = Fraction(t["num"], t["den"])
        return cls(terms)

    def __repr__(self) -> str:
        return f"FieldScalar({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for key, c in self.terms():
            if not key:
                parts.append(str(c))
                continue
            rad = 1
            for p in key:
                rad *= p
            if c == 1:
                body = f"sqrt({rad})"
            elif c == -1:
                body = f"-sqrt({rad})"
            elif c.denominator == 1:
                body = f"{c}*sqrt({rad})"
            else:
                sign = "-" if c < 0 else ""
                body = f"{sign}{abs(c.numerator)}*sqrt({rad})/{c.denominator}"
            parts.append(body)
        text = parts[0]
        for part in parts[1:]:
            text += f" - {part[1:]}" if part.startswith("-") else f" + {part}"
        return text


def parse_scalar(text: str) -> FieldScalar:
    """Parse exact scalar strings like "1/3", "-2", "sqrt(2)/2", "3*sqrt(5)/4".

    Accepts sums/differences of such atoms ("1/2 + sqrt(2)").
    """
    text = text.strip().replace(" ", "")
    if not text:
        raise ValueError("empty scalar string")
    # split into signed atoms
    atoms: list[str] = []
    depth, start = 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start:
            atoms.append(text[start:i])
            start = i
    atoms.append(text[start:])
    total = FieldScalar()
    for atom in atoms:
        if not atom or atom in "+-":
            raise ValueError(f"malformed scalar string {text!r}")
        sign = 1
        while atom and atom[0] in "+-":
            if atom[0] == "-":
                sign = -sign
            atom = atom[1:]
        num = Fraction(1)
        rad = None
        den = Fraction(1)
        # forms: a, a/b, sqrt(r), a*sqrt(r), sqrt(r)/b, a*sqrt(r)/b
        if "sqrt(" in atom:
            pre, rest = atom.split("sqrt(", 1)
            inner, _, post = rest.partition(")")
            rad = Fraction(inner)
            if pre:
                if not pre.endswith("*"):
                    raise ValueError(f"malformed scalar atom {atom!r}")
                num = Fraction(pre[:-1])
            if post:
                if not post.startswith("/"):
                    raise ValueError(f"malformed scalar atom {atom!r}")
                den = Fraction(post[1:])
        else:
            num = Fraction(atom)
        value = FieldScalar.rational(sign * num / den)
        if rad is not None:
            value = value * FieldScalar.sqrt(rad)
        total = total + value
    return total


ZERO = FieldScalar()
ONE = FieldScalar.rational(1)
