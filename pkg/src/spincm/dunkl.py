"""Dunkl operators on vector-valued polynomial and exponential modules.

Rational operators act on polynomials with the divided difference
``(1 - s_alpha)p / (alpha, x)`` computed by exact division; trigonometric
operators act on the group algebra of a lattice, where the divided
difference ``(1 - s_alpha)e / (1 - exp(-(alpha,x)))`` telescopes into a
finite geometric sum, so no denominators ever appear.  The module also
provides the non-commuting exchange-operator variants used for extra
integrals in type A, harmonic-oscillator combinations for classical
families, and a sampling check that the vanishing ideal of a reflection
stratum is preserved by the operators.

Conventions: all indices are 0-based; directions and roots are ambient
vectors; reflections inside operators act on the argument only (the vector
part of an element is never touched here — diagonal twists are applied by
the callers that restrict to strata).
"""

from __future__ import annotations

from fractions import Fraction

from .rootsys import RootSystem, Stratum, dot, reflect
from .scalars.field import FieldScalar
from .scalars.poly import DivisibilityError, Poly
from .scalars.expfunc import ExpPoly

_ZERO = FieldScalar()
_ONE = FieldScalar.rational(1)

__all__ = [
    "PolyElement", "ExpElement", "TrigDunkl",
    "reflect_poly", "reflect_exp", "act_word",
    "divided_difference", "dunkl_apply",
    "trig_divided_difference", "trig_dunkl_apply", "weyl_vector",
    "hp_trig_nabla", "heckman_polychronakos_D",
    "HarmonicOps", "is_reduced",
    "ideal_generators", "check_ideal_invariance", "InvarianceReport",
    "commutator_on_monomials", "monomials_up_to",
]


# ---------------------------------------------------------------------------
# element containers
# ---------------------------------------------------------------------------


class _Element:
    """A tuple of scalar components sharing one set of variables; the
    component index is the coordinate of the element in a fixed basis of the
    vector part."""

    __slots__ = ("comps",)

    def __init__(self, comps):
        comps = tuple(comps)
        if not comps:
            raise ValueError("an element needs at least one component")
        if len({c.nvars for c in comps}) != 1:
            raise ValueError("components disagree on the variable count")
        self.comps = comps

    @property
    def dim(self) -> int:
        return len(self.comps)

    @property
    def nvars(self) -> int:
        return self.comps[0].nvars

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.comps)

    def map(self, fn):
        return type(self)(fn(c) for c in self.comps)

    def __add__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(a + b for a, b in zip(self.comps, other.comps))

    def __sub__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return type(self)(a - b for a, b in zip(self.comps, other.comps))

    def __neg__(self):
        return type(self)(-c for c in self.comps)

    def scale(self, s):
        return type(self)(c * s for c in self.comps)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (len(self.comps) == len(other.comps)
                and all(a == b for a, b in zip(self.comps, other.comps)))

    __hash__ = None

    def __repr__(self):
        inner = ", ".join(repr(c) for c in self.comps)
        return f"{type(self).__name__}([{inner}])"


class PolyElement(_Element):
    """Vector-valued polynomial: one `Poly` per component of the vector
    part."""

    @classmethod
    def scalar(cls, p: Poly) -> "PolyElement":
        return cls((p,))

    def terms(self):
        """Map monomial -> coefficient vector (zeros filled in)."""
        keys = sorted({k for c in self.comps for k in c.coeffs})
        return {k: tuple(c.coeffs.get(k, _ZERO) for c in self.comps)
                for k in keys}


class ExpElement(_Element):
    """Vector-valued element of the lattice group algebra: one `ExpPoly`
    per component."""

    @classmethod
    def scalar(cls, e: ExpPoly) -> "ExpElement":
        return cls((e,))

    def terms(self):
        comps = list(self.comps)
        q = 1
        for c in comps:
            q = q * c.q // _gcd(q, c.q)
        comps = [c.rescaled(q) for c in comps]
        keys = sorted({k for c in comps for k in c.coeffs})
        return {tuple(Fraction(e, q) for e in k):
                tuple(c.coeffs.get(k, _ZERO) for c in comps) for k in keys}


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _split(obj):
    """Return (components, rebuild) for a bare scalar or a vector element."""
    if isinstance(obj, _Element):
        cls = type(obj)
        return list(obj.comps), (lambda cs: cls(cs))
    return [obj], (lambda cs: cs[0])


# ---------------------------------------------------------------------------
# reflections acting on the argument
# ---------------------------------------------------------------------------


def _field_vec(v):
    return tuple(x if isinstance(x, FieldScalar) else FieldScalar.coerce(x)
                 for x in v)


def reflect_poly(alpha, p: Poly) -> Poly:
    """(s_alpha p)(x) = p(s_alpha x), by substituting the reflected
    coordinates."""
    alpha = _field_vec(alpha)
    nn = dot(alpha, alpha)
    mapping = {}
    for i in range(len(alpha)):
        coeffs = [_ONE if j == i else _ZERO for j in range(len(alpha))]
        factor = FieldScalar.rational(2) * alpha[i] / nn
        if factor:
            coeffs = [c - factor * a for c, a in zip(coeffs, alpha)]
        mapping[i] = Poly.linear_form(coeffs)
    return p.substitute(mapping, p.nvars, _ONE)


def _rational_vec(v, what="vector"):
    out = []
    for x in v:
        if isinstance(x, FieldScalar):
            if not x.is_rational:
                raise ValueError(
                    f"{what} has irrational coordinates; the lattice module "
                    "only supports rational realisations")
            out.append(x.as_fraction())
        else:
            out.append(Fraction(x))
    return tuple(out)


def reflect_exp(alpha, e: ExpPoly) -> ExpPoly:
    """(s_alpha e)(x): exponents map by the reflection, exp((lam,x)) ->
    exp((s_alpha lam, x))."""
    af = _rational_vec(alpha, "root")
    nn = sum(a * a for a in af)
    terms = []
    q = e.q
    for key, coeff in e.coeffs.items():
        lam = [Fraction(k, e.q) for k in key]
        m = 2 * sum(l * a for l, a in zip(lam, af)) / nn
        new = tuple(l - m * a for l, a in zip(lam, af))
        terms.append((new, coeff))
        for entry in new:
            d = entry.denominator
            q = q * d // _gcd(q, d)
    out: dict = {}
    for new, coeff in terms:
        key = tuple(int(entry * q) for entry in new)
        prev = out.get(key)
        s = coeff if prev is None else prev + coeff
        if s:
            out[key] = s
        elif prev is not None:
            del out[key]
    return ExpPoly(e.nvars, q, out)


def act_word(rs: RootSystem, word, obj):
    """Left action of w = s_{i1} ... s_{ik} (simple-root indices, word
    order): (w f)(x) = f(w^{-1} x).  Acts on Poly, ExpPoly, or vector
    elements componentwise (the vector part is untouched)."""
    comps, rebuild = _split(obj)
    # w f = s_{i1}(s_{i2}(... (s_{ik} f))): the last letter acts first.
    for idx in reversed(list(word)):
        alpha = rs.simple_roots[idx]
        comps = [_reflect_any(alpha, c) for c in comps]
    return rebuild(comps)


def _reflect_any(alpha, c):
    if isinstance(c, ExpPoly):
        return reflect_exp(alpha, c)
    return reflect_poly(alpha, c)


# ---------------------------------------------------------------------------
# rational Dunkl operators
# ---------------------------------------------------------------------------


def directional_derivative(obj, xi):
    xi = _field_vec(xi)
    comps, rebuild = _split(obj)

    def deriv(p):
        out = Poly.zero(p.nvars)
        for i, x in enumerate(xi):
            if x:
                out = out + p.derivative(i) * x
        return out

    return rebuild([deriv(c) for c in comps])


def divided_difference(alpha, obj):
    """(1 - s_alpha) f / (alpha, x), exact; a nonzero remainder would mean
    the reflection action is broken, so it surfaces as DivisibilityError."""
    alpha = _field_vec(alpha)
    lin = Poly.linear_form(list(alpha))
    comps, rebuild = _split(obj)
    return rebuild([(c - reflect_poly(alpha, c)).divexact(lin)
                    for c in comps])


def dunkl_apply(rs: RootSystem, xi, obj):
    """del_xi f  -  sum_{alpha > 0} c_alpha (alpha, xi) / (alpha, x)
    (1 - s_alpha) f."""
    xi_f = _field_vec(xi)
    out = directional_derivative(obj, xi_f)
    for alpha in rs.positive_roots:
        coeff = rs.c_of(alpha) * dot(_field_vec(alpha), xi_f)
        if not coeff:
            continue
        dd = divided_difference(alpha, obj)
        comps_o, rebuild = _split(out)
        comps_d, _ = _split(dd)
        out = rebuild([a - d * coeff for a, d in zip(comps_o, comps_d)])
    return out


# ---------------------------------------------------------------------------
# trigonometric Dunkl operators
# ---------------------------------------------------------------------------


def trig_divided_difference(alpha, obj):
    """(1 - s_alpha) e / (1 - exp(-(alpha,x))) as a finite geometric sum.

    For exp((lam,x)) with m = (lam, alpha^v) the quotient is
    sum_{t=0}^{m-1} exp((lam - t alpha, x)) when m >= 0 and
    -sum_{t=1}^{-m} exp((lam + t alpha, x)) when m < 0; each pairing m must
    be an integer (the lattice must be stable under the reflection)."""
    af = _rational_vec(alpha, "root")
    nn = sum(a * a for a in af)
    comps, rebuild = _split(obj)
    return rebuild([_trig_dd_one(af, nn, c) for c in comps])


def _trig_dd_one(af, nn, e: ExpPoly) -> ExpPoly:
    denom = 1
    for a in af:
        denom = denom * a.denominator // _gcd(denom, a.denominator)
    q = e.q * denom
    scaled = e.rescaled(q) if q != e.q else e
    astep = tuple(int(a * q) for a in af)
    out: dict = {}
    for key, coeff in scaled.coeffs.items():
        m = 2 * sum(Fraction(k, q) * a for k, a in zip(key, af)) / nn
        if m.denominator != 1:
            raise ValueError(
                "exponent lattice is not stable under the reflection: "
                f"pairing {m} with the coroot is not an integer")
        m = int(m)
        if m == 0:
            continue
        if m > 0:
            steps = [(tuple(k - t * a for k, a in zip(key, astep)), coeff)
                     for t in range(m)]
        else:
            steps = [(tuple(k + t * a for k, a in zip(key, astep)), -coeff)
                     for t in range(1, -m + 1)]
        for new, val in steps:
            prev = out.get(new)
            s = val if prev is None else prev + val
            if s:
                out[new] = s
            elif prev is not None:
                del out[new]
    return ExpPoly(scaled.nvars, q, out)


def weyl_vector(rs: RootSystem):
    """rho = (1/2) sum_{alpha > 0} c_alpha alpha, as a tuple of scalars."""
    dim = rs.ambient_dim
    acc = [_ZERO] * dim
    for alpha in rs.positive_roots:
        c = rs.c_of(alpha)
        for i, a in enumerate(alpha):
            acc[i] = acc[i] + c * a * FieldScalar.rational(Fraction(1, 2))
    return tuple(acc)


def trig_dunkl_apply(rs: RootSystem, xi, obj):
    """del_xi f - sum_{alpha>0} c_alpha (alpha,xi)/(1 - exp(-(alpha,x)))
    (1 - s_alpha) f + (rho, xi) f."""
    xi_q = _rational_vec(xi, "direction")
    comps, rebuild = _split(obj)
    out = [c.derivative_along(list(xi_q)) for c in comps]
    for alpha in rs.positive_roots:
        pairing = dot(_field_vec(alpha), _field_vec(xi_q))
        coeff = rs.c_of(alpha) * pairing
        if not coeff:
            continue
        dd = _split(trig_divided_difference(alpha, obj))[0]
        out = [a - d * coeff for a, d in zip(out, dd)]
    rho_xi = _ZERO
    for r, x in zip(weyl_vector(rs), _field_vec(xi_q)):
        rho_xi = rho_xi + r * x
    if rho_xi:
        out = [a + c * rho_xi for a, c in zip(out, comps)]
    return rebuild(out)


def is_reduced(rs: RootSystem) -> bool:
    """True when no root is a scalar multiple of another (BC fails)."""
    for alpha in rs.positive_roots:
        doubled = tuple(FieldScalar.rational(2) * a for a in alpha)
        if rs.is_root(doubled):
            return False
    return True


class TrigDunkl:
    """A single trigonometric Dunkl operator bound to a direction.

    For non-reduced systems the individual operators commute but are not
    Weyl-equivariant, so only symmetric polynomials in them restrict to
    strata; ``equivariant`` is False there and restriction layers must
    refuse to treat a single such operator as an invariant.
    """

    def __init__(self, rs: RootSystem, xi):
        self.rs = rs
        self.xi = tuple(xi)
        self.equivariant = is_reduced(rs)

    def __call__(self, obj):
        return trig_dunkl_apply(self.rs, self.xi, obj)


# ---------------------------------------------------------------------------
# exchange-operator variants (type A)
# ---------------------------------------------------------------------------


def _type_a_constant(rs: RootSystem):
    if rs.family != "A":
        raise ValueError("exchange operators are defined for type A only")
    return rs.c_of(rs.positive_roots[0])


def _swap_root(n, i, j):
    return tuple(_ONE if t == i else (-_ONE if t == j else _ZERO)
                 for t in range(n))


def hp_trig_nabla(rs: RootSystem, i: int, obj):
    """Commuting trigonometric operator in the exchange normalisation:

    del_i + sum_{j<i} c/(1 - exp(x_i - x_j)) (1 - s_ij)
          - sum_{j>i} c/(1 - exp(x_j - x_i)) (1 - s_ij) - c*i

    (0-based i, so the constant is c*i).  Differs from the general
    trigonometric operator along e_i by the uniform constant c(N-1)/2.
    """
    c = _type_a_constant(rs)
    n = rs.ambient_dim
    comps, rebuild = _split(obj)
    out = [e.derivative(i) for e in comps]
    for j in range(n):
        if j == i:
            continue
        # for j < i the kernel 1/(1 - exp(x_i - x_j)) matches the divided
        # difference along alpha = e_j - e_i, and enters with +c; for j > i
        # it is alpha = e_i - e_j with -c.
        alpha = _swap_root(n, j, i) if j < i else _swap_root(n, i, j)
        sign = 1 if j < i else -1
        dd = [_trig_dd_one(_rational_vec(alpha), Fraction(2), e)
              for e in comps]
        out = [a + d * (c * sign) for a, d in zip(out, dd)]
    shift = c * FieldScalar.rational(i)
    if shift:
        out = [a - e * shift for a, e in zip(out, comps)]
    return rebuild(out)


def heckman_polychronakos_D(rs: RootSystem, i: int, obj):
    """Exchange operator D_i = del_i - sum_{j != i}
    c/(1 - exp(x_j - x_i)) (1 - s_ij); does not commute with its siblings
    but satisfies s_ij D_i = D_j s_ij and [D_i, D_j] = c (D_i - D_j) s_ij."""
    c = _type_a_constant(rs)
    n = rs.ambient_dim
    comps, rebuild = _split(obj)
    out = [e.derivative(i) for e in comps]
    for j in range(n):
        if j == i:
            continue
        # 1/(1 - exp(x_j - x_i)) = 1/(1 - exp(-(alpha,x))) for alpha = e_i-e_j
        alpha = _swap_root(n, i, j)
        dd = [_trig_dd_one(_rational_vec(alpha), Fraction(2), e)
              for e in comps]
        out = [a - d * c for a, d in zip(out, dd)]
    return rebuild(out)


# ---------------------------------------------------------------------------
# harmonic-oscillator combinations
# ---------------------------------------------------------------------------


class HarmonicOps:
    """Raising/lowering combinations nabla_i +/- omega x_i for the classical
    families, their products h_i, and the commuting power sums K_m."""

    def __init__(self, rs: RootSystem, omega):
        if rs.family not in ("A", "B", "D"):
            raise ValueError(
                f"harmonic combinations need family A, B, or D, not "
                f"{rs.family!r}")
        self.rs = rs
        self.omega = omega

    def _x_times(self, i, obj):
        comps, rebuild = _split(obj)
        xi = Poly.variable(i, self.rs.ambient_dim, _ONE)
        return rebuild([c * xi for c in comps])

    def nabla(self, i, obj):
        xi = tuple(_ONE if t == i else _ZERO
                   for t in range(self.rs.ambient_dim))
        return dunkl_apply(self.rs, xi, obj)

    def nabla_plus(self, i, obj):
        comps_n, rebuild = _split(self.nabla(i, obj))
        comps_x = _split(self._x_times(i, obj))[0]
        return rebuild([a + b * self.omega
                        for a, b in zip(comps_n, comps_x)])

    def nabla_minus(self, i, obj):
        comps_n, rebuild = _split(self.nabla(i, obj))
        comps_x = _split(self._x_times(i, obj))[0]
        return rebuild([a - b * self.omega
                        for a, b in zip(comps_n, comps_x)])

    def h(self, i, obj):
        return self.nabla_plus(i, self.nabla_minus(i, obj))

    def k(self, m, obj):
        """K_m f = sum_i h_i^m f."""
        comps, rebuild = _split(obj)
        total = [Poly.zero(c.nvars) for c in comps]
        for i in range(self.rs.ambient_dim):
            cur = obj
            for _ in range(m):
                cur = self.h(i, cur)
            cc = _split(cur)[0]
            total = [a + b for a, b in zip(total, cc)]
        return rebuild(total)

    def k1_tilde(self, obj):
        """sum_i (nabla_i^2 - omega^2 x_i^2) f."""
        comps, rebuild = _split(obj)
        total = [Poly.zero(c.nvars) for c in comps]
        om2 = self.omega * self.omega
        for i in range(self.rs.ambient_dim):
            sq = self.nabla(i, self.nabla(i, obj))
            xs = self._x_times(i, self._x_times(i, obj))
            a = _split(sq)[0]
            b = _split(xs)[0]
            total = [t + u - v * om2 for t, u, v in zip(total, a, b)]
        return rebuild(total)

    def reflection_sum(self, obj):
        """sum_{alpha > 0} c_alpha s_alpha f (argument action)."""
        comps, rebuild = _split(obj)
        total = [Poly.zero(c.nvars) for c in comps]
        for alpha in self.rs.positive_roots:
            c = self.rs.c_of(alpha)
            refl = [reflect_poly(alpha, p) for p in comps]
            total = [t + r * c for t, r in zip(total, refl)]
        return rebuild(total)


# ---------------------------------------------------------------------------
# ideal invariance by sampling
# ---------------------------------------------------------------------------


class InvarianceReport:
    """Outcome of the stratum-ideal preservation check; falsy when a Dunkl
    image of an ideal element failed to vanish on the stratum orbit."""

    def __init__(self, ok, vacuous=False, witness=None):
        self.ok = ok
        self.vacuous = vacuous
        # (generator poly, direction index, point, value) when not ok
        self.witness = witness

    def __bool__(self):
        return self.ok

    def __repr__(self):
        if self.ok:
            tag = "vacuous" if self.vacuous else "ok"
            return f"InvarianceReport({tag})"
        gen, i, point, value = self.witness
        return (f"InvarianceReport(fail: direction {i}, value {value} "
                f"at {point})")


def ideal_generators(rs: RootSystem, st: Stratum, degree_bound: int):
    """Vanishing polynomials for the stratum orbit: for each defining simple
    root, the product of the pairings with its Weyl orbit (up to sign), plus
    all monomial multiples up to the degree bound."""
    dim = rs.ambient_dim
    base = []
    seen = set()
    for g in st.gamma0:
        beta = rs.simple_roots[g]
        orbit = rs.weyl_orbit(beta)
        half = {}
        for v in orbit:
            key = min(_veckey(v), _veckey(tuple(-x for x in v)))
            half.setdefault(key, v)
        prod = Poly.const(dim, _ONE)
        for v in half.values():
            prod = prod * Poly.linear_form(list(_field_vec(v)))
        key = tuple(sorted((k, str(v)) for k, v in prod.coeffs.items()))
        if key not in seen:
            seen.add(key)
            base.append(prod)
    gens = []
    for b in base:
        d = b.total_degree()
        if d > degree_bound:
            continue
        gens.append(b)
        for mono in monomials_up_to(dim, degree_bound - d):
            if sum(mono) == 0:
                continue
            gens.append(b * Poly(dim, {mono: _ONE}))
    return gens


def _veckey(v):
    return tuple(str(x) for x in v)


def monomials_up_to(nvars: int, max_deg: int):
    """All exponent tuples with total degree <= max_deg, ordered."""
    out = []

    def rec(prefix, remaining):
        if len(prefix) == nvars:
            out.append(tuple(prefix))
            return
        for e in range(remaining + 1):
            rec(prefix + [e], remaining - e)

    if max_deg >= 0:
        rec([], max_deg)
    return sorted(out, key=lambda k: (sum(k), k))


def _sample_points(rs: RootSystem, st: Stratum, count=2):
    """Exact generic points on the stratum, pushed around the group orbit."""
    from .wmod import enumerate_group

    points = []
    trial = 0
    while len(points) < count and trial < 40:
        y = [Fraction(2 * (trial + j) + 3, 2 * j + 5 + (trial % 3))
             for j in range(st.n)]
        trial += 1
        x0 = st.embed(tuple(FieldScalar.rational(v) for v in y))
        degenerate = False
        for alpha in rs.positive_roots:
            val = dot(_field_vec(alpha), x0)
            vanishes_on_pi = all(not t for t in st.tangential_form(alpha))
            if (not val) != vanishes_on_pi:
                degenerate = True
                break
        if not degenerate:
            points.append(x0)
    if len(points) < count:
        raise RuntimeError("could not sample generic stratum points")
    elements, _words, _succ = enumerate_group(rs)
    orbit_points = []
    for x0 in points:
        if len(elements) <= 60:
            mats = elements
        else:
            mats = [rs.reflection_matrix(a) for a in rs.positive_roots]
        for mat in mats:
            img = tuple(
                sum((mat[r][c2] * x0[c2] for c2 in range(len(x0))),
                    _ZERO) for r in range(len(x0)))
            orbit_points.append(img)
    unique = {}
    for p in orbit_points:
        unique.setdefault(_veckey(p), p)
    return list(unique.values())


def check_ideal_invariance(rs: RootSystem, st: Stratum,
                           degree_bound: int) -> InvarianceReport:
    """Sample whether Dunkl operators preserve the vanishing ideal of the
    stratum orbit: images of a spanning set (up to degree_bound) must vanish
    at exact points across the orbit of the stratum."""
    for val in rs.mult.values():
        if not isinstance(val, FieldScalar):
            raise ValueError("concrete multiplicities required")
    if not st.gamma0:
        return InvarianceReport(True, vacuous=True)
    gens = ideal_generators(rs, st, degree_bound)
    points = _sample_points(rs, st)
    dim = rs.ambient_dim
    for gen in gens:
        for i in range(dim):
            xi = tuple(_ONE if t == i else _ZERO for t in range(dim))
            image = dunkl_apply(rs, xi, gen)
            for p in points:
                val = image.evaluate(list(p))
                if val is not None and val:
                    return InvarianceReport(
                        False, witness=(gen, i, p, val))
    return InvarianceReport(True)


# ---------------------------------------------------------------------------
# convenience for commutativity sweeps
# ---------------------------------------------------------------------------


def commutator_on_monomials(rs: RootSystem, xi, eta, max_deg: int,
                            trig=False):
    """Largest nonzero [nabla_xi, nabla_eta] image over all monomials up to
    max_deg (None when they all vanish)."""
    dim = rs.ambient_dim
    apply_ = trig_dunkl_apply if trig else dunkl_apply
    for mono in monomials_up_to(dim, max_deg):
        if trig:
            p = ExpPoly(dim, 1, {tuple(mono): _ONE})
        else:
            p = Poly(dim, {tuple(mono): _ONE})
        lhs = apply_(rs, xi, apply_(rs, eta, p))
        rhs = apply_(rs, eta, apply_(rs, xi, p))
        diff = lhs - rhs
        if not diff.is_zero:
            return mono, diff
    return None
