"""Restriction engine: jets of vector-valued germ families on the orbit of a
symbolic generic base point, the operator action on them, and extraction of
the restricted matrix differential operators.

Geometry and conventions
------------------------
* The base point is x0 = sum_j y0_j v_j where the v_j span the stratum's
  tangent space and the coordinates y0_j are independent symbols.  Every
  quantity computed here is therefore an exact function of the base point:
  rational functions of y0 in rational mode, lattice exponential functions
  of y0 in trigonometric mode.
* Sheets are indexed by the orbit points w(x0), equivalently by cosets of
  the pointwise stabiliser of the tangent plane.  A sheet's jet is a
  polynomial in the N ambient deviation coordinates, truncated at the
  family's order, with coefficients that are vectors over the base-point
  function field.
* Group elements move germs by (w F)(x) = F(w^{-1} x).  The reflection
  term of the operator acts on the germ argument only, never on the vector
  values; vector values transform only through the diagonal rule
  (w F)(x) = F(w^{-1} x) . w^{-1} used by `lift` to fill the non-identity
  sheets.
* After every operator application each sheet is restricted to its branch
  and re-extended as the pullback along the orthogonal projection onto the
  branch, so jets stay constant in the normal directions and the family's
  truncation order drops by one.  A division by the linear form of a root
  vanishing on a branch is performed exactly and raises DivisibilityError
  on a nonzero remainder.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from . import linalg
from .dunkl import monomials_up_to, reflect_poly, weyl_vector
from .opalg import MatrixDiffOp
from .rootsys import RootSystem, Stratum, dot, vec_key
from .scalars.expfunc import ExpFunc
from .scalars.field import FieldScalar
from .scalars.poly import DivisibilityError, Poly
from .scalars.ratfunc import RatFunc
from .wmod import InvariantSubspace, WModule

__all__ = [
    "BasePoint",
    "DivisibilityError",
    "ExtensionReport",
    "ExtractionError",
    "GenericityError",
    "Jet",
    "JetFamily",
    "TruncationError",
    "apply_dunkl",
    "extract_operator",
    "lift",
    "verify_extension_independence",
]

_ZERO = FieldScalar()
_ONE = FieldScalar.rational(1)


class GenericityError(ValueError):
    """The stratum data does not describe a generic base point."""


class TruncationError(RuntimeError):
    """The jet truncation budget has been exhausted."""


class ExtractionError(RuntimeError):
    """A probe value left the fixed subspace of the module."""


def _as_fs(x) -> FieldScalar:
    return x if isinstance(x, FieldScalar) else FieldScalar.coerce(x)


def _fs_fraction(x: FieldScalar, what: str) -> Fraction:
    if not x.is_rational:
        raise ValueError(f"{what} must be rational for the lattice algebra")
    return x.as_fraction()


# ---------------------------------------------------------------------------
# sheets
# ---------------------------------------------------------------------------


class _Sheet:
    """One orbit point w(x0): transformed tangent data and branch projector."""

    __slots__ = ("word", "tvecs", "tduals", "rows", "proj")

    def __init__(self, word, tvecs, tduals, rows):
        self.word = word
        self.tvecs = tvecs      # (w v_1, ..., w v_m)
        self.tduals = tduals    # (w u_1, ..., w u_m)
        self.rows = rows        # rows[i] = w(e_i)
        n = len(rows)
        # orthogonal projector onto the branch: P_w = sum_t (w v_t)(w u_t)^T
        self.proj = tuple(
            tuple(
                sum((tv[i] * tu[j] for tv, tu in zip(tvecs, tduals)),
                    _ZERO)
                for j in range(n))
            for i in range(n))

    def key(self):
        return tuple(vec_key(v) for v in self.tvecs)


def _sheet_key(tvecs):
    return tuple(vec_key(v) for v in tvecs)


# ---------------------------------------------------------------------------
# base point
# ---------------------------------------------------------------------------


class BasePoint:
    """A symbolic generic base point on a stratum, with its orbit sheets and
    the coefficient field of base-point functions.

    The genericity certificate is checked at construction: the set of roots
    whose pairing with the base point vanishes identically must coincide
    with the roots lying in the span of the stratum's defining simple
    roots.
    """

    def __init__(self, stratum: Stratum, module: WModule, mode: str):
        if mode not in ("rational", "trig"):
            raise ValueError(f"unknown mode {mode!r}")
        if module.rs is not stratum.rs:
            raise ValueError("module and stratum use different root systems")
        if stratum.is_affine():
            raise ValueError(
                "shifted strata are not supported by the restriction "
                "engine; use the closed-form builders")
        self.stratum = stratum
        self.module = module
        self.mode = mode
        self.rs = stratum.rs
        self.m = stratum.n
        self.ambient_dim = self.rs.ambient_dim

        if mode == "rational":
            self.one = RatFunc.const(self.m, _ONE, _ONE)
        else:
            for alpha in self.rs.positive_roots:
                for v in stratum.pi_basis:
                    _fs_fraction(dot(alpha, v),
                                 "every root/tangent pairing")
            self.one = ExpFunc.const(self.m, _ONE, _ONE)
        self.zero = self.one - self.one

        self._fconst_cache = {}
        self._series_cache = {}
        self._certify()
        self._build_sheets()
        if mode == "trig":
            self.rho = weyl_vector(self.rs)

    # -- coefficient field --------------------------------------------------

    def fconst(self, s):
        """Lift a scalar into the base-point function field."""
        s = _as_fs(s)
        key = vec_key((s,))
        out = self._fconst_cache.get(key)
        if out is None:
            if self.mode == "rational":
                out = RatFunc.const(self.m, s, _ONE)
            else:
                out = ExpFunc.const(self.m, s, _ONE)
            self._fconst_cache[key] = out
        return out

    def linear_form(self, coeffs):
        """The linear form sum_j coeffs[j] * y0_j as a field element
        (rational mode only)."""
        if self.mode != "rational":
            raise ValueError("polynomial base-point dependence requires "
                             "rational mode")
        p = Poly.linear_form([_as_fs(c) for c in coeffs])
        return RatFunc.from_poly(p, _ONE)

    def exp_pairing(self, coeffs, negate=False):
        """exp(sum_j coeffs[j] * y0_j) as a lattice monomial (trig mode)."""
        vec = [_fs_fraction(_as_fs(c), "the base-point pairing")
               for c in coeffs]
        if negate:
            vec = [-v for v in vec]
        return ExpFunc.exponential(vec, _ONE, _ONE)

    # -- genericity ----------------------------------------------------------

    def _certify(self):
        st = self.stratum
        rows0 = [list(self.rs.simple_roots[g]) for g in st.gamma0]
        r0 = linalg.rank(rows0) if rows0 else 0
        vanishing = []
        for ai, alpha in enumerate(self.rs.positive_roots):
            tf = st.tangential_form(alpha)
            vanish = all(x == 0 for x in tf)
            if rows0:
                member = linalg.rank(rows0 + [list(alpha)]) == r0
            else:
                member = False
            if vanish != member:
                raise GenericityError(
                    f"root {tuple(alpha)} "
                    + ("vanishes on the stratum but lies outside the span "
                       "of its defining simple roots"
                       if vanish else
                       "lies in the span of the defining simple roots but "
                       "does not vanish on the stratum")
                    + "; the base point is not generic")
            if vanish:
                vanishing.append(ai)
        self.vanishing = tuple(vanishing)

    # -- sheets --------------------------------------------------------------

    def _build_sheets(self):
        st = self.stratum
        rs = self.rs
        n = self.ambient_dim
        ident_rows = tuple(
            tuple(_ONE if i == j else _ZERO for j in range(n))
            for i in range(n))
        first = _Sheet((), tuple(st.pi_basis), tuple(st.dual_basis()),
                       ident_rows)
        self.sheets = [first]
        self._index = {first.key(): 0}
        frontier = [0]
        while frontier:
            nxt = []
            for si in frontier:
                sh = self.sheets[si]
                for g, sg in enumerate(rs.simple_roots):
                    tvecs = tuple(rs.reflect(sg, v) for v in sh.tvecs)
                    key = _sheet_key(tvecs)
                    if key in self._index:
                        continue
                    tduals = tuple(rs.reflect(sg, v) for v in sh.tduals)
                    rows = tuple(rs.reflect(sg, v) for v in sh.rows)
                    new = _Sheet((g,) + sh.word, tvecs, tduals, rows)
                    self._index[key] = len(self.sheets)
                    self.sheets.append(new)
                    nxt.append(self._index[key])
            frontier = nxt
        # tangential form of every positive root at every sheet, and the
        # sheet reached by each reflection
        self._tf = []
        self._neighbor = {}
        for si, sh in enumerate(self.sheets):
            forms = []
            for ai, alpha in enumerate(self.rs.positive_roots):
                forms.append(tuple(dot(alpha, v) for v in sh.tvecs))
                moved = _sheet_key(tuple(self.rs.reflect(alpha, v)
                                         for v in sh.tvecs))
                self._neighbor[(si, ai)] = self._index[moved]
            self._tf.append(forms)

    @property
    def n_sheets(self) -> int:
        return len(self.sheets)

    def tangential(self, si: int, ai: int):
        """Coefficients of (alpha_ai, w_si x0) as a linear form in y0."""
        return self._tf[si][ai]

    def neighbor(self, si: int, ai: int) -> int:
        """Index of the sheet at s_alpha . w(x0)."""
        return self._neighbor[(si, ai)]

    def module_inverse_matrix(self, word):
        """Action matrix of the inverse of the sheet representative."""
        return self.module.word_matrix(tuple(reversed(word)))


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------


def _vadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vneg(a):
    return tuple(-x for x in a)


def _vscale(a, s):
    return tuple(x * s for x in a)


def _vis_zero(a) -> bool:
    return all(x.is_zero for x in a)


class Jet:
    """A truncated vector-valued Taylor polynomial in the ambient deviation
    coordinates; coefficients are tuples over the base-point field."""

    __slots__ = ("nvars", "dim", "coeffs")

    def __init__(self, nvars: int, dim: int, coeffs=None):
        self.nvars = nvars
        self.dim = dim
        self.coeffs = {}
        if coeffs:
            for k, v in coeffs.items():
                if not _vis_zero(v):
                    self.coeffs[k] = v

    @classmethod
    def zero(cls, nvars: int, dim: int) -> "Jet":
        return cls(nvars, dim)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return max((sum(k) for k in self.coeffs), default=-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Jet):
            return NotImplemented
        if self.nvars != other.nvars or self.dim != other.dim:
            return False
        keys = set(self.coeffs) | set(other.coeffs)
        for k in keys:
            a = self.coeffs.get(k)
            b = other.coeffs.get(k)
            if a is None or b is None:
                if not _vis_zero(a if a is not None else b):
                    return False
            elif any(x != y for x, y in zip(a, b)):
                return False
        return True

    __hash__ = None

    def __add__(self, other: "Jet") -> "Jet":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            cur = out.get(k)
            out[k] = v if cur is None else _vadd(cur, v)
        return Jet(self.nvars, self.dim, out)

    def __neg__(self) -> "Jet":
        return Jet(self.nvars, self.dim,
                   {k: _vneg(v) for k, v in self.coeffs.items()})

    def __sub__(self, other: "Jet") -> "Jet":
        return self + (-other)

    def scale(self, s) -> "Jet":
        """Multiply every coefficient by a field element."""
        return Jet(self.nvars, self.dim,
                   {k: _vscale(v, s) for k, v in self.coeffs.items()})

    def truncated(self, order: int) -> "Jet":
        return Jet(self.nvars, self.dim,
                   {k: v for k, v in self.coeffs.items()
                    if sum(k) <= order})

    def derivative(self, i: int) -> "Jet":
        out = {}
        for k, v in self.coeffs.items():
            if k[i]:
                nk = k[:i] + (k[i] - 1,) + k[i + 1:]
                term = _vscale(v, Fraction(k[i]))
                cur = out.get(nk)
                out[nk] = term if cur is None else _vadd(cur, term)
        return Jet(self.nvars, self.dim, out)

    def compose_linear(self, rows, order: int) -> "Jet":
        """The jet delta -> self(L delta) with (L delta)_i the linear form
        with coefficients rows[i], truncated at the given order."""
        forms = [tuple(_as_fs(x) for x in r) for r in rows]
        power_cache = [{0: {(0,) * self.nvars: _ONE}} for _ in forms]

        def power(i, e):
            cache = power_cache[i]
            if e not in cache:
                prev = power(i, e - 1)
                out = {}
                for k, c in prev.items():
                    for j, a in enumerate(forms[i]):
                        if a == 0:
                            continue
                        nk = k[:j] + (k[j] + 1,) + k[j + 1:]
                        cur = out.get(nk)
                        term = c * a
                        out[nk] = term if cur is None else cur + term
                cache[e] = {k: c for k, c in out.items() if not c.is_zero}
            return cache[e]

        out = {}
        for k, v in self.coeffs.items():
            if sum(k) > order:
                continue
            sp = {(0,) * self.nvars: _ONE}
            for i, e in enumerate(k):
                if not e:
                    continue
                pw = power(i, e)
                nxt = {}
                for k1, c1 in sp.items():
                    for k2, c2 in pw.items():
                        nk = tuple(a + b for a, b in zip(k1, k2))
                        c = c1 * c2
                        cur = nxt.get(nk)
                        nxt[nk] = c if cur is None else cur + c
                sp = {kk: cc for kk, cc in nxt.items() if not cc.is_zero}
            for kk, cc in sp.items():
                term = _vscale(v, cc)
                cur = out.get(kk)
                out[kk] = term if cur is None else _vadd(cur, term)
        return Jet(self.nvars, self.dim, out)

    def mul_series(self, series, order: int) -> "Jet":
        """Multiply by a scalar delta-polynomial {monomial: field element},
        truncating at the given order."""
        out = {}
        for k, v in self.coeffs.items():
            dk = sum(k)
            for k2, c in series.items():
                if dk + sum(k2) > order:
                    continue
                nk = tuple(a + b for a, b in zip(k, k2))
                term = _vscale(v, c)
                cur = out.get(nk)
                out[nk] = term if cur is None else _vadd(cur, term)
        return Jet(self.nvars, self.dim, out)

    def divexact_linear(self, form) -> "Jet":
        """Exact division by the linear form with the given ambient
        coefficients; raises DivisibilityError on a nonzero remainder."""
        coeffs = [_as_fs(x) for x in form]
        pivot = next((i for i, a in enumerate(coeffs) if a != 0), None)
        if pivot is None:
            raise ZeroDivisionError("division by the zero linear form")
        inv = _ONE / coeffs[pivot]
        work = dict(self.coeffs)
        out = {}
        while True:
            key = None
            best = 0
            for k in work:
                if k[pivot] > best:
                    best = k[pivot]
                    key = k
            if key is None:
                break
            v = work.pop(key)
            qk = key[:pivot] + (key[pivot] - 1,) + key[pivot + 1:]
            qv = _vscale(v, inv)
            cur = out.get(qk)
            out[qk] = qv if cur is None else _vadd(cur, qv)
            for j, a in enumerate(coeffs):
                if a == 0 or j == pivot:
                    continue
                nk = qk[:j] + (qk[j] + 1,) + qk[j + 1:]
                term = _vscale(qv, -a)
                cur = work.get(nk)
                nv = term if cur is None else _vadd(cur, term)
                if _vis_zero(nv):
                    work.pop(nk, None)
                else:
                    work[nk] = nv
        for k, v in work.items():
            if not _vis_zero(v):
                raise DivisibilityError(
                    "jet is not divisible by the root linear form; "
                    "the parabolic module is not invariant "
                    f"(remainder at deviation monomial {k})")
        return Jet(self.nvars, self.dim, out)

    def constant_vector(self, base: BasePoint):
        key = (0,) * self.nvars
        v = self.coeffs.get(key)
        if v is None:
            return tuple(base.zero for _ in range(self.dim))
        return v


# ---------------------------------------------------------------------------
# jet families
# ---------------------------------------------------------------------------


class JetFamily:
    """Jets on every sheet of the base-point orbit, all truncated at the
    same order."""

    __slots__ = ("base", "order", "jets", "spent")

    def __init__(self, base: BasePoint, order: int, jets, spent: int = 0):
        if order < 0:
            raise ValueError("negative truncation order")
        self.base = base
        self.order = order
        self.jets = dict(jets)
        self.spent = spent

    def copy(self) -> "JetFamily":
        return JetFamily(self.base, self.order, self.jets, self.spent)

    def __eq__(self, other) -> bool:
        if not isinstance(other, JetFamily):
            return NotImplemented
        if self.base is not other.base or self.order != other.order:
            return False
        return all(self.jets[si] == other.jets[si]
                   for si in range(self.base.n_sheets))

    __hash__ = None

    def with_perturbation(self, si: int, jet: Jet) -> "JetFamily":
        jets = dict(self.jets)
        jets[si] = jets[si] + jet
        return JetFamily(self.base, self.order, jets, self.spent)

    def check_diagonal_invariance(self) -> bool:
        """Every sheet's jet agrees with the identity sheet's jet moved by
        the diagonal rule, and the identity-sheet values are fixed by the
        parabolic generators."""
        base = self.base
        j0 = self.jets[0]
        for si, sheet in enumerate(base.sheets):
            if si == 0:
                continue
            moved = _move_jet(base, j0, sheet, self.order)
            if moved != self.jets[si]:
                return False
        for g in base.stratum.gamma0:
            sg = base.rs.simple_roots[g]
            refl = base.rs.reflection_matrix(sg)
            mat = base.module.word_matrix((g,))
            twisted = _value_transform(
                j0.compose_linear(refl, self.order), mat)
            if twisted != j0:
                return False
        return True


def _value_transform(jet: Jet, mat) -> Jet:
    """Right-multiply every coefficient vector by a scalar matrix."""
    dim = jet.dim
    out = {}
    for k, v in jet.coeffs.items():
        zero = v[0] - v[0]
        out[k] = tuple(
            sum((v[i] * mat[i][j] for i in range(dim)
                 if mat[i][j] != 0), zero)
            for j in range(dim))
    return Jet(jet.nvars, dim, out)


def _move_jet(base: BasePoint, j0: Jet, sheet: _Sheet, order: int) -> Jet:
    """The diagonal rule: the sheet-w jet determined by the identity-sheet
    jet, (w F)(x) = F(w^{-1} x) . w^{-1}."""
    composed = j0.compose_linear(sheet.rows, order)
    mat = base.module_inverse_matrix(sheet.word)
    return _value_transform(composed, mat)


# ---------------------------------------------------------------------------
# lift
# ---------------------------------------------------------------------------


def lift(base: BasePoint, phi, order: int, deviation: bool = False
         ) -> JetFamily:
    """Lift a polynomial on the stratum with values in the module to a
    diagonally invariant jet family.

    ``phi`` is a sequence of polynomials in the stratum coordinates, one per
    module basis vector.  With ``deviation=True`` the variables are the
    deviations y - y0 from the base point; otherwise they are the absolute
    stratum coordinates (rational mode only).  The value of phi must be
    fixed by the parabolic generators.
    """
    mod = base.module
    st = base.stratum
    phi = list(phi)
    if len(phi) != mod.dim:
        raise ValueError("one polynomial per module basis vector required")
    for p in phi:
        if p.nvars != base.m:
            raise ValueError("polynomials must use the stratum coordinates")
    for g in st.gamma0:
        mat = mod.gen_mats[g]
        for j in range(mod.dim):
            image = None
            for i in range(mod.dim):
                if mat[i][j] == 0:
                    continue
                term = phi[i] * mat[i][j]
                image = term if image is None else image + term
            if image is None:
                image = Poly.zero(base.m)
            if not image == phi[j]:
                raise ValueError(
                    "the value polynomial is not fixed by the parabolic "
                    "generators")

    # identity-sheet jet: substitute y_t -> (y0_t +) <u_t, delta>
    n = base.ambient_dim
    duals = base.sheets[0].tduals
    zero_key = (0,) * n

    var_cache = {}

    def variable_series(t):
        if t not in var_cache:
            sp = {}
            if not deviation:
                if base.mode != "rational":
                    raise ValueError(
                        "absolute stratum coordinates require rational "
                        "mode; lift deviations instead")
                sp[zero_key] = base.linear_form(
                    [_ONE if j == t else _ZERO for j in range(base.m)])
            for j in range(n):
                a = duals[t][j]
                if a != 0:
                    key = tuple(1 if i == j else 0 for i in range(n))
                    sp[key] = base.fconst(a)
            var_cache[t] = sp
        return var_cache[t]

    def series_mul(a, b):
        out = {}
        for k1, c1 in a.items():
            if sum(k1) > order:
                continue
            for k2, c2 in b.items():
                if sum(k1) + sum(k2) > order:
                    continue
                nk = tuple(x + y for x, y in zip(k1, k2))
                c = c1 * c2
                cur = out.get(nk)
                out[nk] = c if cur is None else cur + c
        return {k: c for k, c in out.items() if not c.is_zero}

    mono_cache = {}

    def monomial_series(k):
        if k not in mono_cache:
            sp = {zero_key: base.one}
            for t, e in enumerate(k):
                for _ in range(e):
                    sp = series_mul(sp, variable_series(t))
            mono_cache[k] = sp
        return mono_cache[k]

    coeffs = {}
    for comp, p in enumerate(phi):
        for k, c in p.coeffs.items():
            sp = monomial_series(k)
            for dk, s in sp.items():
                vec = coeffs.get(dk)
                if vec is None:
                    vec = [base.zero] * mod.dim
                    coeffs[dk] = vec
                vec[comp] = vec[comp] + s * c
    j0 = Jet(n, mod.dim, {k: tuple(v) for k, v in coeffs.items()})
    j0 = j0.truncated(order)

    jets = {0: j0}
    for si, sheet in enumerate(base.sheets):
        if si:
            jets[si] = _move_jet(base, j0, sheet, order)
    return JetFamily(base, order, jets)


# ---------------------------------------------------------------------------
# the operator action
# ---------------------------------------------------------------------------


def _series_seq_inverse(base: BasePoint, seq, order: int):
    """Invert a power-series coefficient sequence (seq[0] invertible)."""
    inv0 = seq[0].inverse()
    out = [inv0]
    for s in range(1, order + 1):
        acc = None
        for t in range(1, s + 1):
            if t < len(seq) and not seq[t].is_zero:
                term = seq[t] * out[s - t]
                acc = term if acc is None else acc + term
        out.append(base.zero if acc is None else -(inv0 * acc))
    return out


def _expand_in_form(base: BasePoint, seq, form, order: int):
    """sum_s seq[s] * ell^s as a scalar delta-polynomial for the linear
    form ell with the given ambient coefficients."""
    n = base.ambient_dim
    zero_key = (0,) * n
    out = {}
    if not seq[0].is_zero:
        out[zero_key] = seq[0]
    power = {zero_key: _ONE}
    for s in range(1, min(order, len(seq) - 1) + 1):
        nxt = {}
        for k, c in power.items():
            for j, a in enumerate(form):
                if a == 0:
                    continue
                nk = k[:j] + (k[j] + 1,) + k[j + 1:]
                term = c * a
                cur = nxt.get(nk)
                nxt[nk] = term if cur is None else cur + term
        power = {k: c for k, c in nxt.items() if not c.is_zero}
        if seq[s].is_zero:
            continue
        for k, c in power.items():
            term = seq[s] * c
            cur = out.get(k)
            out[k] = term if cur is None else cur + term
    return out


def _inverse_factor_series(base: BasePoint, si: int, ai: int, order: int):
    """The power series of 1/(alpha, x) (rational) or 1/(1 - e^{-(alpha,x)})
    (trig) around the sheet's base point, as a scalar delta-polynomial.
    Only valid when the root does not vanish on the sheet's branch."""
    tf = base.tangential(si, ai)
    key = ("inv", vec_key(tf), ai, order)
    cached = base._series_cache.get(key)
    if cached is not None:
        return cached
    alpha = base.rs.positive_roots[ai]
    if base.mode == "rational":
        b = base.linear_form(tf)
        seq = [b, base.one] + [base.zero] * max(order - 1, 0)
        inv = _series_seq_inverse(base, seq, order)
    else:
        a_mon = base.exp_pairing(tf, negate=True)
        seq = [base.one - a_mon]
        sign = 1
        for t in range(1, order + 1):
            sign = -sign
            seq.append(a_mon * FieldScalar.rational(
                Fraction(-sign, math.factorial(t))))
        inv = _series_seq_inverse(base, seq, order)
    out = _expand_in_form(base, inv, alpha, order)
    base._series_cache[key] = out
    return out


def _unit_part_series(base: BasePoint, ai: int, order: int):
    """The series inverse of (1 - e^{-ell})/ell for the root's linear form
    ell = (alpha, delta); multiplying the exact quotient by this series
    completes the trigonometric division at a vanishing sheet."""
    key = ("unit", ai, order)
    cached = base._series_cache.get(key)
    if cached is not None:
        return cached
    alpha = base.rs.positive_roots[ai]
    seq = []
    sign = 1
    for t in range(order + 1):
        seq.append(base.fconst(Fraction(sign, math.factorial(t + 1))))
        sign = -sign
    inv = _series_seq_inverse(base, seq, order)
    out = _expand_in_form(base, inv, alpha, order)
    base._series_cache[key] = out
    return out


def apply_dunkl(family: JetFamily, xi, mode: str | None = None) -> JetFamily:
    """Apply the operator for the given ambient direction to the family:
    derivative term, one reflection term per positive root (inverted power
    series where the root pairing survives on the branch, exact division
    where it vanishes), then restriction to each branch and canonical
    re-extension.  The truncation order drops by one."""
    base = family.base
    if mode is not None and mode != base.mode:
        raise ValueError(
            f"family was built for {base.mode!r} mode, not {mode!r}")
    if family.order < 1:
        raise TruncationError(
            f"truncation budget exhausted after {family.spent} "
            f"applications; lift with order at least {family.spent + 1}")
    order_out = family.order - 1
    rs = base.rs
    n = base.ambient_dim
    xi_fs = tuple(_as_fs(x) for x in xi)
    if len(xi_fs) != n:
        raise ValueError("direction has the wrong ambient dimension")

    rho_pair = None
    if base.mode == "trig":
        rho_pair = sum((r * x for r, x in zip(base.rho, xi_fs)), _ZERO)

    out_jets = {}
    for si, sheet in enumerate(base.sheets):
        jet = family.jets[si]
        acc = Jet.zero(n, base.module.dim)
        for i, x in enumerate(xi_fs):
            if x != 0:
                acc = acc + jet.derivative(i).scale(x)
        if rho_pair is not None and rho_pair != 0:
            acc = acc + jet.scale(rho_pair)

        for ai, alpha in enumerate(rs.positive_roots):
            c_alpha = rs.c_of(alpha)
            pair = sum((a * x for a, x in zip(alpha, xi_fs)), _ZERO)
            weight = c_alpha * pair
            if weight == 0:
                continue
            nb = base.neighbor(si, ai)
            refl = rs.reflection_matrix(alpha)
            reflected = family.jets[nb].compose_linear(refl, family.order)
            numerator = jet - reflected
            tf = base.tangential(si, ai)
            if all(x == 0 for x in tf):
                if numerator.is_zero:
                    continue
                quotient = numerator.divexact_linear(alpha)
                if base.mode == "trig":
                    unit = _unit_part_series(base, ai, order_out)
                    quotient = quotient.mul_series(unit, order_out)
                acc = acc - quotient.truncated(order_out).scale(weight)
            else:
                series = _inverse_factor_series(base, si, ai, order_out)
                acc = acc - numerator.mul_series(
                    series, order_out).scale(weight)

        acc = acc.compose_linear(sheet.proj, order_out).truncated(order_out)
        out_jets[si] = acc
    return JetFamily(base, order_out, out_jets, family.spent + 1)


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------


def _pivot_solver(inv: InvariantSubspace):
    """Pivot columns of the fixed-subspace basis and the inverse of the
    pivot square, for expressing fixed vectors in basis coordinates."""
    d0 = inv.dim
    big = inv.module.dim
    rows = [list(b) for b in inv.basis]
    pivots = []
    elim = []
    for j in range(big):
        col = [rows[i][j] for i in range(d0)]
        for (pj, vec) in elim:
            factor = col[pj]
            if factor != 0:
                col = [c - factor * v for c, v in zip(col, vec)]
        lead = next((i for i, c in enumerate(col) if c != 0), None)
        if lead is None:
            continue
        inv_lead = _ONE / col[lead]
        col = [c * inv_lead for c in col]
        elim.append((lead, col))
        pivots.append(j)
        if len(pivots) == d0:
            break
    if len(pivots) != d0:
        raise AssertionError("fixed-subspace basis is rank deficient")
    square = [[inv.basis[b][j] for j in pivots] for b in range(d0)]
    return pivots, linalg.inverse(square)


def _coordinates(base: BasePoint, inv: InvariantSubspace, pivots, pinv,
                 value):
    """Coordinates of a fixed vector (field entries) on the subspace basis,
    verifying that the vector indeed lies in the subspace."""
    d0 = inv.dim
    piv_vals = [value[j] for j in pivots]
    coords = []
    for j in range(d0):
        acc = base.zero
        for i in range(d0):
            if pinv[i][j] != 0:
                acc = acc + piv_vals[i] * pinv[i][j]
        coords.append(acc)
    # membership check: coords . basis must reproduce the full vector
    for j in range(inv.module.dim):
        acc = base.zero
        for b in range(d0):
            a = inv.basis[b][j]
            if a != 0:
                acc = acc + coords[b] * a
        if acc != value[j]:
            raise ExtractionError(
                "restricted value left the fixed subspace of the module")
    return coords


def extract_operator(rs: RootSystem, st: Stratum, mod: WModule, p: Poly,
                     mode: str) -> MatrixDiffOp:
    """The restricted operator for an invariant polynomial in the commuting
    operators: reconstructed by probing with deviation monomials times the
    fixed-subspace basis and reading each probe's value at the base point as
    a derivative-coefficient column."""
    if rs is not st.rs:
        raise ValueError("stratum does not belong to the root system")
    if p.nvars != rs.ambient_dim:
        raise ValueError("polynomial must use the ambient coordinates")
    for s in rs.simple_roots:
        if not reflect_poly(s, p) == p:
            raise ValueError("the polynomial is not invariant under the "
                             "reflection group")
    base = BasePoint(st, mod, mode)
    inv = InvariantSubspace.from_stratum(mod, st)
    if inv.dim == 0:
        raise ValueError("the module has no fixed vectors over this stratum")
    pivots, pinv = _pivot_solver(inv)

    deg = max(p.total_degree(), 0)
    n = rs.ambient_dim
    directions = [tuple(Fraction(1) if j == i else Fraction(0)
                        for j in range(n)) for i in range(n)]
    op = MatrixDiffOp.zero(mode, st.var_names, inv.dim, base.one)
    for beta in monomials_up_to(base.m, deg):
        norm = Fraction(1)
        for e in beta:
            norm /= math.factorial(e)
        rows = []
        for b in range(inv.dim):
            phi = [Poly(base.m, {tuple(beta): inv.basis[b][comp] * norm})
                   if inv.basis[b][comp] != 0 else Poly.zero(base.m)
                   for comp in range(mod.dim)]
            # one truncation order is consumed per application, and the
            # value read at the base point only couples to jet degrees
            # bounded by the number of applications, so the polynomial
            # degree is the exact budget
            family = lift(base, phi, deg, deviation=True)
            value = [base.zero] * mod.dim
            for mono, c in p.coeffs.items():
                fam = family
                for i in range(n):
                    for _ in range(mono[i]):
                        fam = apply_dunkl(fam, directions[i])
                vec = fam.jets[0].constant_vector(base)
                cf = base.fconst(c)
                value = [v + cf * x for v, x in zip(value, vec)]
            rows.append(_coordinates(base, inv, pivots, pinv, value))
        term = op.term(1, tuple(beta), matrix=rows)
        if not term.is_zero:
            op = op + term
    return op


# ---------------------------------------------------------------------------
# extension independence
# ---------------------------------------------------------------------------


class ExtensionReport:
    """Outcome of an extension-independence check."""

    __slots__ = ("ok", "vacuous", "witness")

    def __init__(self, ok: bool, vacuous: bool = False, witness=None):
        self.ok = ok
        self.vacuous = vacuous
        self.witness = witness

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        if self.ok:
            tag = "vacuous" if self.vacuous else "independent"
            return f"ExtensionReport({tag})"
        return f"ExtensionReport(dependent, witness={self.witness!r})"


def _parabolic_words(base: BasePoint):
    """Words (with the basis images of each element) for the pointwise
    stabiliser of the stratum, generated by its defining simple
    reflections."""
    rs = base.rs
    n = base.ambient_dim
    ident = tuple(tuple(_ONE if i == j else _ZERO for j in range(n))
                  for i in range(n))
    seen = {_sheet_key(ident)}
    elements = [((), ident)]
    frontier = [((), ident)]
    while frontier:
        nxt = []
        for word, rows in frontier:
            for g in base.stratum.gamma0:
                sg = rs.simple_roots[g]
                new_rows = tuple(rs.reflect(sg, r) for r in rows)
                key = _sheet_key(new_rows)
                if key in seen:
                    continue
                seen.add(key)
                entry = ((g,) + word, new_rows)
                elements.append(entry)
                nxt.append(entry)
        frontier = nxt
    return elements


def _symmetrized_perturbation(base: BasePoint, order: int, root_idx: int,
                              extra: int | None, comp: int) -> Jet:
    """A parabolic-fixed jet vanishing on the branch: the average over the
    stabiliser of (beta, delta) * delta_extra * e_comp."""
    n = base.ambient_dim
    beta = base.rs.simple_roots[base.stratum.gamma0[root_idx]]
    mono = {}
    for j, a in enumerate(beta):
        if a == 0:
            continue
        k = tuple((1 if t == j else 0) + (1 if t == extra else 0)
                  for t in range(n))
        vec = [base.zero] * base.module.dim
        vec[comp] = base.fconst(a)
        cur = mono.get(k)
        mono[k] = tuple(vec) if cur is None else _vadd(cur, tuple(vec))
    p0 = Jet(n, base.module.dim, mono)
    acc = Jet.zero(n, base.module.dim)
    for word, rows in _parabolic_words(base):
        moved = _value_transform(
            p0.compose_linear(rows, order),
            base.module.word_matrix(tuple(reversed(word))))
        acc = acc + moved
    return acc.truncated(order)


def verify_extension_independence(family: JetFamily, xi, seed: int = 0
                                  ) -> ExtensionReport:
    """Perturb the family by an invariant family vanishing on the branch
    orbit and compare the results of one application; they agree for every
    such perturbation exactly when the parabolic multiplicity is invariant.
    A single perturbation is tried, so a False verdict carries a witness
    while True only reports that this perturbation was invisible."""
    base = family.base
    if not base.stratum.gamma0:
        return ExtensionReport(True, vacuous=True)
    if family.order < 1:
        raise TruncationError(
            "extension-independence checks need a family of positive order")
    candidates = []
    for root_idx in range(len(base.stratum.gamma0)):
        for comp in range(base.module.dim):
            candidates.append((root_idx, None, comp))
    if family.order >= 2:
        for root_idx in range(len(base.stratum.gamma0)):
            for extra in range(base.ambient_dim):
                for comp in range(base.module.dim):
                    candidates.append((root_idx, extra, comp))
    random.Random(seed).shuffle(candidates)
    pert = None
    for root_idx, extra, comp in candidates:
        cand = _symmetrized_perturbation(base, family.order, root_idx,
                                         extra, comp)
        if not cand.is_zero:
            pert = cand
            break
    if pert is None:
        return ExtensionReport(True, vacuous=True)
    jets = {si: family.jets[si]
            + _move_jet(base, pert, base.sheets[si], family.order)
            for si in range(base.n_sheets)}
    perturbed = JetFamily(base, family.order, jets, family.spent)
    r0 = apply_dunkl(family, xi)
    r1 = apply_dunkl(perturbed, xi)
    for si in range(base.n_sheets):
        a, b = r0.jets[si], r1.jets[si]
        if a == b:
            continue
        diff = a - b
        key = next(iter(diff.coeffs))
        return ExtensionReport(False, witness=(si, key, diff.coeffs[key]))
    return ExtensionReport(True)
