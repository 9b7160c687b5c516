"""Matrix differential operators over exact coefficient rings.

An operator is a finite sum  sum_alpha  M_alpha(y) . d^alpha  where each
M_alpha is a square matrix of ring elements (RatFunc in rational mode,
ExpFunc in trigonometric mode) and d^alpha is a partial-derivative
multi-index in the operator's variables.

Conventions
-----------
* Row convention throughout: the operator acts on row vectors, so applying
  a term means (d^alpha u) . M_alpha, and composition (A after B) multiplies
  the derived coefficient matrix of B on the LEFT of A's matrix.
* The coefficient ring may carry leading parameter variables (symbolic
  multiplicities) that are never differentiated; ``param_names`` records
  them, and the ring variable of coordinate j is index len(param_names)+j.
* LaTeX display prints matrices transposed (acting on column vectors),
  matching the usual printed convention; JSON stores the internal row
  matrices and round-trips losslessly.
"""

from __future__ import annotations

import json
from fractions import Fraction
from math import comb

from .scalars.expfunc import ExpFunc, ExpPoly
from .scalars.field import FieldScalar
from .scalars.poly import Poly
from .scalars.ratfunc import RatFunc
from .scalars.serialize import scalar_from_json, scalar_to_json


class OpError(ValueError):
    """Structural mismatch between operators (mode, variables, dimension)."""


# ---------------------------------------------------------------------------
# ring helpers
# ---------------------------------------------------------------------------


def extend_ratfunc(value: RatFunc, total_nvars: int) -> RatFunc:
    """Reinterpret a RatFunc in a ring with extra trailing variables."""
    extra = total_nvars - value.nvars
    if extra < 0:
        raise ValueError("cannot shrink the variable list")
    if extra == 0:
        return value

    def pad(p: Poly) -> Poly:
        return Poly(total_nvars,
                    {key + (0,) * extra: c for key, c in p.coeffs.items()})

    return RatFunc(pad(value.num), pad(value.den), normalize=False)


def extend_expfunc(value: ExpFunc, total_nvars: int) -> ExpFunc:
    extra = total_nvars - value.nvars
    if extra < 0:
        raise ValueError("cannot shrink the variable list")
    if extra == 0:
        return value

    def pad(p: ExpPoly) -> ExpPoly:
        return ExpPoly(total_nvars, p.q,
                       {key + (0,) * extra: c for key, c in p.coeffs.items()})

    return ExpFunc(pad(value.num), pad(value.den), normalize=False)


def lift_scalar(value, one):
    """Lift a FieldScalar/Fraction/int (or a ring element of lower arity)
    into the ring of the exemplar ``one``."""
    if isinstance(one, RatFunc):
        if isinstance(value, RatFunc):
            return extend_ratfunc(value, one.nvars)
        fs = FieldScalar.coerce(value)
        return RatFunc.const(one.nvars, fs * one.one_coeff, one.one_coeff)
    if isinstance(one, ExpFunc):
        if isinstance(value, ExpFunc):
            return extend_expfunc(value, one.nvars)
        fs = FieldScalar.coerce(value)
        return ExpFunc.const(one.nvars, fs * one.one_coeff, one.one_coeff)
    raise TypeError(f"unsupported ring exemplar {type(one).__name__}")


def _zero_like(one):
    return one - one


def _mat_mul_ring(a, b):
    n, m, k = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            acc = None
            for l in range(m):
                term = a[i][l] * b[l][j]
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def _mat_add_ring(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def _mat_scale_ring(a, s):
    return tuple(tuple(s * x for x in row) for row in a)


def _mat_is_zero(a):
    return all(x.is_zero for row in a for x in row)


def _grlex_key(partials):
    return (sum(partials), partials)


# ---------------------------------------------------------------------------
# the operator
# ---------------------------------------------------------------------------


class MatrixDiffOp:
    """A matrix differential operator in canonical (collected) form."""

    __slots__ = ("mode", "var_names", "param_names", "dim", "one", "terms")

    def __init__(self, mode: str, var_names, dim: int, one,
                 terms=None, param_names=()):
        if mode not in ("rational", "trig"):
            raise OpError(f"unknown mode {mode!r}")
        self.mode = mode
        self.var_names = tuple(var_names)
        self.param_names = tuple(param_names)
        self.dim = dim
        self.one = one
        expected = len(self.var_names) + len(self.param_names)
        if one.nvars != expected:
            raise OpError(
                f"ring exemplar has {one.nvars} variables; expected "
                f"{expected} (params + coordinates)")
        self.terms = {}
        if terms:
            for partials, mat in (terms.items() if isinstance(terms, dict)
                                  else terms):
                self._accumulate(tuple(partials), mat)

    # -- construction helpers ----------------------------------------------

    def _accumulate(self, partials, mat):
        if len(partials) != len(self.var_names):
            raise OpError("partial multi-index arity mismatch")
        mat = tuple(tuple(row) for row in mat)
        if len(mat) != self.dim or any(len(r) != self.dim for r in mat):
            raise OpError("matrix dimension mismatch")
        cur = self.terms.get(partials)
        mat = mat if cur is None else _mat_add_ring(cur, mat)
        if _mat_is_zero(mat):
            self.terms.pop(partials, None)
        else:
            self.terms[partials] = mat

    def _spawn(self, terms):
        return MatrixDiffOp(self.mode, self.var_names, self.dim, self.one,
                            terms, self.param_names)

    @classmethod
    def zero(cls, mode, var_names, dim, one, param_names=()):
        return cls(mode, var_names, dim, one, None, param_names)

    def scalar_matrix(self, value):
        """value * identity as a coefficient matrix."""
        s = lift_scalar(value, self.one)
        z = _zero_like(self.one)
        return tuple(tuple(s if i == j else z for j in range(self.dim))
                     for i in range(self.dim))

    def constant_term(self, value):
        """The order-0 operator value * identity."""
        zero_idx = (0,) * len(self.var_names)
        return self._spawn({zero_idx: self.scalar_matrix(value)})

    def partial(self, j: int, power: int = 1):
        """The operator d^power / d var_j^power (identity matrix factor)."""
        idx = tuple(power if i == j else 0
                    for i in range(len(self.var_names)))
        return self._spawn({idx: self.scalar_matrix(1)})

    def term(self, coeff, partials, matrix=None):
        """coeff * d^partials * matrix (matrix defaults to the identity);
        matrix entries may be FieldScalars or ring elements."""
        c = lift_scalar(coeff, self.one)
        if matrix is None:
            mat = self.scalar_matrix(coeff)
        else:
            mat = tuple(tuple(c * lift_scalar(x, self.one) for x in row)
                        for row in matrix)
        return self._spawn({tuple(partials): mat})

    # -- structure ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        return max((sum(p) for p in self.terms), default=0)

    def sorted_terms(self):
        """Terms in descending graded-lexicographic order."""
        return sorted(self.terms.items(),
                      key=lambda kv: _grlex_key(kv[0]), reverse=True)

    def _check_compatible(self, other: "MatrixDiffOp"):
        if (self.mode != other.mode or self.var_names != other.var_names
                or self.param_names != other.param_names
                or self.dim != other.dim):
            raise OpError("operators live on different spaces")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        if (self.mode != other.mode or self.var_names != other.var_names
                or self.dim != other.dim):
            return False
        return (self - other).is_zero

    # -- linear arithmetic ---------------------------------------------------

    def __add__(self, other) -> "MatrixDiffOp":
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        self._check_compatible(other)
        out = self._spawn(self.terms)
        for partials, mat in other.terms.items():
            out._accumulate(partials, mat)
        return out

    def __neg__(self) -> "MatrixDiffOp":
        return self._spawn({p: _mat_scale_ring(m, -self.one)
                            for p, m in self.terms.items()})

    def __sub__(self, other) -> "MatrixDiffOp":
        if not isinstance(other, MatrixDiffOp):
            return NotImplemented
        return self + (-other)

    def scale(self, value) -> "MatrixDiffOp":
        s = lift_scalar(value, self.one)
        if s.is_zero:
            return self._spawn(None)
        return self._spawn({p: _mat_scale_ring(m, s)
                            for p, m in self.terms.items()})

    # -- coefficient derivatives --------------------------------------------

    def _d_coeff(self, value, j: int):
        return value.derivative(len(self.param_names) + j)

    def _d_matrix(self, mat, j: int):
        return tuple(tuple(self._d_coeff(x, j) for x in row) for row in mat)

    # -- composition ---------------------------------------------------------

    def compose(self, other: "MatrixDiffOp") -> "MatrixDiffOp":
        """self after other: (self.compose(other))(u) = self(other(u))."""
        self._check_compatible(other)
        nv = len(self.var_names)
        out = self._spawn(None)
        for alpha, f_mat in self.terms.items():
            for beta, g_mat in other.terms.items():
                for gamma in _sub_multi_indices(alpha):
                    coeff = 1
                    for a, g in zip(alpha, gamma):
                        coeff *= comb(a, g)
                    dg = g_mat
                    for j in range(nv):
                        for _ in range(gamma[j]):
                            dg = self._d_matrix(dg, j)
                    if _mat_is_zero(dg):
                        continue
                    # row convention: u -> (d^delta u) . dG . F
                    prod = _mat_mul_ring(dg, f_mat)
                    if coeff != 1:
                        prod = _mat_scale_ring(
                            prod, lift_scalar(Fraction(coeff), self.one))
                    delta = tuple(a - g + b
                                  for a, g, b in zip(alpha, gamma, beta))
                    out._accumulate(delta, prod)
        return out

    def commutator(self, other: "MatrixDiffOp") -> "MatrixDiffOp":
        return self.compose(other) - other.compose(self)

    # -- application ----------------------------------------------------------

    def apply(self, test):
        """Apply to a row vector of ring elements (length dim)."""
        test = [lift_scalar(x, self.one) for x in test]
        if len(test) != self.dim:
            raise OpError("test vector has the wrong dimension")
        nv = len(self.var_names)
        zero = _zero_like(self.one)
        out = [zero] * self.dim
        for partials, mat in self.terms.items():
            dv = list(test)
            for j in range(nv):
                for _ in range(partials[j]):
                    dv = [self._d_coeff(x, j) for x in dv]
            for b in range(self.dim):
                acc = out[b]
                for a in range(self.dim):
                    if not dv[a].is_zero:
                        acc = acc + dv[a] * mat[a][b]
                out[b] = acc
        return out

    # -- gauge conjugation ----------------------------------------------------

    def gauge_conjugate(self, factor: "GaugeFactor") -> "MatrixDiffOp":
        """f^{-1} A f: replaces each d_j by d_j + (d_j log f)."""
        nv = len(self.var_names)
        logs = [factor.log_derivative(self, j) for j in range(nv)]
        out = self._spawn(None)
        for alpha, mat in self.terms.items():
            piece = self._spawn(
                {(0,) * nv: self.scalar_matrix(1)})
            for j in range(nv):
                if alpha[j]:
                    dj = self.partial(j) + self.constant_term(logs[j])
                    for _ in range(alpha[j]):
                        piece = dj.compose(piece)
            head = self._spawn({(0,) * nv: mat})
            out = out + head.compose(piece)
        return out


def _sub_multi_indices(alpha):
    """All gamma with 0 <= gamma <= alpha componentwise."""
    if not alpha:
        yield ()
        return
    head, tail = alpha[0], alpha[1:]
    for rest in _sub_multi_indices(tail):
        for g in range(head + 1):
            yield (g,) + rest


# ---------------------------------------------------------------------------
# gauge factors
# ---------------------------------------------------------------------------


class GaugeFactor:
    """A product of powers of linear-form factors.

    Rational mode: f = prod (a, y)^chat over entries (chat, a).
    Trig mode: f = prod sinh(((a, y) + shift*pi*i)/2)^chat, the shift being
    an integer count of pi*i added to the argument (entering only through
    the sign (-1)^shift of e^{(a,y)}).

    Conjugation uses the logarithmic derivative only, so the exponents chat
    may be arbitrary exact scalars (including symbolic parameters).
    """

    def __init__(self, mode: str, entries):
        if mode not in ("rational", "trig"):
            raise OpError(f"unknown mode {mode!r}")
        self.mode = mode
        norm = []
        for entry in entries:
            if len(entry) == 2:
                chat, coeffs = entry
                shift = 0
            else:
                chat, coeffs, shift = entry
            norm.append((chat, tuple(FieldScalar.coerce(x) for x in coeffs),
                         int(shift)))
        self.entries = tuple(norm)

    def inverse(self) -> "GaugeFactor":
        return GaugeFactor(self.mode,
                           [(-chat, coeffs, shift)
                            for chat, coeffs, shift in self.entries])

    def log_derivative(self, op: MatrixDiffOp, j: int):
        """d_j log f as an element of the operator's coefficient ring."""
        if self.mode != op.mode:
            raise OpError("gauge factor mode does not match the operator")
        one = op.one
        npar = len(op.param_names)
        nv = len(op.var_names)
        total = npar + nv
        acc = _zero_like(one)
        for chat, coeffs, shift in self.entries:
            if len(coeffs) != nv:
                raise OpError("gauge linear form arity mismatch")
            aj = coeffs[j]
            if aj == 0:
                continue
            if self.mode == "rational":
                # d_j log (a, y)^chat = chat * a_j / (a, y)
                lin = Poly.linear_form([_zero_fs()] * npar + list(coeffs))
                base = RatFunc(Poly.const(total, aj), lin)
            else:
                # d_j log sinh(z/2)^chat = chat * (a_j/2) * coth(z/2),
                # coth(z/2) = (e^z + s)/(e^z - s) with s = (-1)^shift
                s = _ONE if shift % 2 == 0 else -_ONE
                vec = [Fraction(0)] * npar + [
                    _as_fraction_exact(c) for c in coeffs]
                e_z = ExpPoly.exponential(vec, _ONE)
                s_const = ExpPoly.const(total, s)
                base = ExpFunc(e_z + s_const, e_z - s_const)
                base = base * (aj * Fraction(1, 2))
            term = lift_scalar(chat, one) * lift_scalar(base, one)
            acc = acc + term
        return acc


_ONE = FieldScalar.rational(1)


def _zero_fs() -> FieldScalar:
    return FieldScalar()


def _as_fraction_exact(c: FieldScalar) -> Fraction:
    """Exponent vectors must be rational; reject irrational entries."""
    terms = dict(c.terms()) if c else {}
    if not terms:
        return Fraction(0)
    if set(terms) != {frozenset()}:
        raise OpError("trigonometric gauge forms need rational coefficients")
    return terms[frozenset()]


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def emit(op: MatrixDiffOp, fmt: str) -> str:
    if fmt == "json":
        return _emit_json(op)
    if fmt == "latex":
        return _emit_latex(op)
    raise ValueError(f"unknown format {fmt!r}")


def _emit_json(op: MatrixDiffOp) -> str:
    data = {
        "vars": list(op.var_names),
        "params": list(op.param_names),
        "mode": op.mode,
        "dim": op.dim,
        "one": scalar_to_json(op.one),
        "terms": [
            {
                "partials": list(partials),
                "coeff": scalar_to_json(op.one),
                "matrix": [[scalar_to_json(x) for x in row] for row in mat],
            }
            for partials, mat in op.sorted_terms()
        ],
    }
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def from_json(text: str) -> MatrixDiffOp:
    data = json.loads(text)
    one = scalar_from_json(data["one"])
    op = MatrixDiffOp(data["mode"], data["vars"], data["dim"], one,
                      None, tuple(data.get("params", ())))
    for term in data["terms"]:
        coeff = scalar_from_json(term["coeff"])
        mat = [[coeff * scalar_from_json(x) for x in row]
               for row in term["matrix"]]
        op._accumulate(tuple(term["partials"]), mat)
    return op


def _sub(name: str) -> str:
    return name if len(name) == 1 else "{" + name + "}"


def _pow_str(n: int) -> str:
    return str(n) if n < 10 else "{" + str(n) + "}"


def _latex_scalar(x) -> str:
    if isinstance(x, RatFunc):
        num_s = _latex_poly(x.num)
        den_s = _latex_poly(x.den)
        if den_s == "1":
            return num_s
        neg = num_s.startswith("-")
        if neg:
            num_s = num_s[1:]
        body = rf"\frac{{{num_s}}}{{{den_s}}}"
        return "-" + body if neg else body
    if isinstance(x, ExpFunc):
        num_s = str(x.num)
        den_s = str(x.den)
        if den_s == "1":
            return num_s
        return rf"\frac{{{num_s}}}{{{den_s}}}"
    return str(x)


def _latex_poly(p: Poly) -> str:
    if p.is_zero:
        return "0"
    parts = []
    for key, c in reversed(p.sorted_terms()):
        mono = "".join(
            (f"x{i+1}" if e == 1 else f"x{i+1}^{_pow_str(e)}")
            for i, e in enumerate(key) if e)
        cs = str(c)
        if not mono:
            parts.append(cs)
        elif cs == "1":
            parts.append(mono)
        elif cs == "-1":
            parts.append("-" + mono)
        else:
            if "+" in cs[1:] or " " in cs:
                cs = "(" + cs + ")"
            parts.append(cs + mono)
    out = parts[0]
    for t in parts[1:]:
        out += " - " + t[1:] if t.startswith("-") else " + " + t
    return out


def _rename_vars(text: str, op: MatrixDiffOp) -> str:
    names = list(op.param_names) + list(op.var_names)
    # replace higher indices first so x10 is not hit by the x1 rule
    for i in range(len(names) - 1, -1, -1):
        text = text.replace(f"x{i+1}", names[i])
    return text


def _emit_latex(op: MatrixDiffOp) -> str:
    if op.is_zero:
        return "0"
    chunks = []
    for partials, mat in op.sorted_terms():
        dpart = "".join(
            (rf"\partial_{_sub(op.var_names[j])}" if e == 1
             else rf"\partial_{_sub(op.var_names[j])}^{_pow_str(e)}")
            for j, e in enumerate(partials) if e)
        diag = all(mat[i][j].is_zero for i in range(op.dim)
                   for j in range(op.dim) if i != j)
        scalar = diag and all(
            (mat[i][i] - mat[0][0]).is_zero for i in range(op.dim))
        if scalar:
            coeff_s = _rename_vars(_latex_scalar(mat[0][0]), op)
            if coeff_s == "1" and dpart:
                chunks.append(dpart)
            elif coeff_s == "-1" and dpart:
                chunks.append("-" + dpart)
            else:
                if ("+" in coeff_s[1:] and "\\frac" not in coeff_s
                        and dpart):
                    coeff_s = r"\left(" + coeff_s + r"\right)"
                chunks.append((coeff_s + (" " + dpart if dpart else ""))
                              .strip())
        else:
            # display convention: matrices act on column vectors
            rows = []
            for i in range(op.dim):
                rows.append(" & ".join(
                    _rename_vars(_latex_scalar(mat[j][i]), op)
                    for j in range(op.dim)))
            body = r" \\ ".join(rows)
            mat_s = r"\begin{pmatrix} " + body + r" \end{pmatrix}"
            chunks.append((mat_s + (" " + dpart if dpart else "")).strip())
    out = chunks[0]
    for t in chunks[1:]:
        out += " - " + t[1:] if t.startswith("-") else " + " + t
    return out
