"""Dunkl operators: divided differences, commutativity, equivariance,
exchange operators, harmonic combinations, and the ideal-preservation
sampler.

Oracles
-------
* Rank-one values are expanded by hand: the divided difference of x1 in the
  two-variable realisation is (x1-x2)/(x1-x2) = 1, so the image of x1 is
  1 - c; in the lattice algebra the divided difference of exp(x1) is
  exp(x1), and the half-sum term contributes c/2.
* The sum-of-squares identity and the commutation relation with
  coordinates are checked against their independently coded right-hand
  sides over the fraction field.
* Everything else is brute force over monomial/lattice bases.
"""

from fractions import Fraction

import pytest

from spincm.dunkl import (ExpElement, HarmonicOps, PolyElement, TrigDunkl,
                          act_word, check_ideal_invariance,
                          commutator_on_monomials, divided_difference,
                          dunkl_apply, heckman_polychronakos_D,
                          hp_trig_nabla, ideal_generators, is_reduced,
                          monomials_up_to, reflect_exp, reflect_poly,
                          trig_divided_difference, trig_dunkl_apply,
                          weyl_vector)
from spincm.rootsys import RootSystem, Stratum, dot, stratum_a_family
from spincm.scalars.expfunc import ExpPoly
from spincm.scalars.field import FieldScalar
from spincm.scalars.poly import Poly
from spincm.scalars.ratfunc import RatFunc

ONE = FieldScalar.rational(1)
ZERO = FieldScalar()


def mono(dim, exps):
    return Poly(dim, {tuple(exps): ONE})


def latt(dim, exps):
    return ExpPoly(dim, 1, {tuple(exps): ONE})


def unit(i, dim):
    return tuple(ONE if t == i else ZERO for t in range(dim))


def lattice_elements(dim, max_abs):
    """All integer exponent vectors with sum of |entries| <= max_abs."""
    vecs = [()]
    for _ in range(dim):
        vecs = [v + (e,) for v in vecs
                for e in range(-max_abs, max_abs + 1)]
    return [latt(dim, v) for v in vecs
            if sum(abs(e) for e in v) <= max_abs]


# ---------------------------------------------------------------------------
# rational operators
# ---------------------------------------------------------------------------


def test_rank_one_image_of_coordinate():
    rs = RootSystem.build("A", 1)  # symbolic c
    c = rs.c_of(rs.positive_roots[0])
    got = dunkl_apply(rs, (1, 0), mono(2, (1, 0)))
    assert got == Poly.const(2, ONE - c)


def test_constants_are_annihilated():
    for fam, n in (("A", 2), ("B", 2), ("G2", None)):
        rs = RootSystem.build(fam, n)
        for i in range(rs.ambient_dim):
            out = dunkl_apply(rs, unit(i, rs.ambient_dim),
                              Poly.const(rs.ambient_dim, ONE))
            assert out.is_zero


def test_divided_difference_exactness():
    rs = RootSystem.build("B", 2)
    alpha = rs.positive_roots[0]
    p = mono(2, (3, 1))
    dd = divided_difference(alpha, p)
    lin = Poly.linear_form([FieldScalar.coerce(a) for a in alpha])
    assert lin * dd == p - reflect_poly(alpha, p)


@pytest.mark.parametrize("fam,n,deg", [
    ("A", 2, 4), ("B", 2, 5), ("G2", None, 3),
])
def test_commutativity_symbolic(fam, n, deg):
    rs = RootSystem.build(fam, n)  # symbolic multiplicities
    d = rs.ambient_dim
    assert commutator_on_monomials(rs, unit(0, d), unit(1, d), deg) is None


def test_commutativity_d4_concrete():
    rs = RootSystem.build("D", 4, {"c": Fraction(1, 2)})
    assert commutator_on_monomials(rs, unit(0, 4), unit(1, 4), 3) is None


def test_commutativity_skew_directions():
    rs = RootSystem.build("B", 2)
    xi = (ONE, ONE)
    eta = (ONE, -FieldScalar.rational(2))
    assert commutator_on_monomials(rs, xi, eta, 3) is None


def test_sum_of_squares_identity():
    """sum nabla_i^2 = Laplacian - sum 2c/(a,x) d_a + sum c(a,a)/(a,x)^2
    (1 - s_a), checked in the fraction field on monomials."""
    rs = RootSystem.build("B", 2, {"c1": Fraction(1, 2), "c2": Fraction(3)})
    d = rs.ambient_dim
    for exps in monomials_up_to(d, 4):
        p = mono(d, exps)
        lhs = Poly.zero(d)
        for i in range(d):
            lhs = lhs + dunkl_apply(rs, unit(i, d),
                                    dunkl_apply(rs, unit(i, d), p))
        rhs = RatFunc.from_poly(sum((p.derivative(i).derivative(i)
                                     for i in range(d)), Poly.zero(d)), ONE)
        for alpha in rs.positive_roots:
            c = rs.c_of(alpha)
            aa = dot(alpha, alpha)
            lin = RatFunc.from_poly(
                Poly.linear_form([FieldScalar.coerce(a) for a in alpha]), ONE)
            d_alpha = sum((p.derivative(i) * FieldScalar.coerce(alpha[i])
                           for i in range(d)), Poly.zero(d))
            rhs = rhs - RatFunc.from_poly(d_alpha, ONE) * 2 * c \
                * lin.inverse()
            diff = RatFunc.from_poly(p - reflect_poly(alpha, p), ONE)
            rhs = rhs + diff * (c * aa) * (lin * lin).inverse()
        assert (RatFunc.from_poly(lhs, ONE) - rhs).is_zero


def test_commutation_with_coordinates():
    """[nabla_i, x_j] = delta_ij - sum_a c_a (a, e_i)(a^v, e_j) s_a,
    with symbolic multiplicities."""
    rs = RootSystem.build("B", 2)
    d = rs.ambient_dim
    for i in range(d):
        for j in range(d):
            xj = Poly.variable(j, d, ONE)
            for exps in monomials_up_to(d, 3):
                p = mono(d, exps)
                lhs = dunkl_apply(rs, unit(i, d), xj * p) \
                    - xj * dunkl_apply(rs, unit(i, d), p)
                rhs = p if i == j else Poly.zero(d)
                for alpha in rs.positive_roots:
                    factor = rs.c_of(alpha) \
                        * FieldScalar.coerce(alpha[i]) \
                        * (FieldScalar.rational(2)
                           * FieldScalar.coerce(alpha[j]) / dot(alpha, alpha))
                    if factor:
                        rhs = rhs - reflect_poly(alpha, p) * factor
                assert (lhs - rhs).is_zero


def test_rational_equivariance():
    """nabla_{w xi}(w f) = w(nabla_xi f) for reduced systems."""
    for fam, n in (("A", 2), ("B", 2)):
        rs = RootSystem.build(fam, n)
        d = rs.ambient_dim
        words = [(0,), (1,), (0, 1)]
        for word in words:
            for xi_idx in range(d):
                xi = unit(xi_idx, d)
                wxi = xi
                for idx in reversed(word):
                    wxi = rs.reflect(rs.simple_roots[idx], wxi)
                for exps in monomials_up_to(d, 3):
                    p = mono(d, exps)
                    lhs = dunkl_apply(rs, wxi, act_word(rs, word, p))
                    rhs = act_word(rs, word, dunkl_apply(rs, xi, p))
                    assert (lhs - rhs).is_zero


def test_vector_valued_componentwise():
    rs = RootSystem.build("A", 1)
    elem = PolyElement([mono(2, (1, 0)), mono(2, (0, 1))])
    out = dunkl_apply(rs, (1, 0), elem)
    assert out.dim == 2
    assert out.comps[0] == dunkl_apply(rs, (1, 0), elem.comps[0])
    assert out.comps[1] == dunkl_apply(rs, (1, 0), elem.comps[1])
    assert set(elem.terms()) == {(1, 0), (0, 1)}
    vec = ExpElement([latt(2, (1, 0)), latt(2, (0, 1))])
    tout = trig_dunkl_apply(rs, (Fraction(1), Fraction(0)), vec)
    assert tout.dim == 2
    assert tout.comps[0] == trig_dunkl_apply(rs, (Fraction(1), Fraction(0)),
                                             vec.comps[0])


# ---------------------------------------------------------------------------
# trigonometric operators
# ---------------------------------------------------------------------------


def test_trig_rank_one_exponential():
    rs = RootSystem.build("A", 1)
    c = rs.c_of(rs.positive_roots[0])
    e = latt(2, (1, 0))
    got = trig_dunkl_apply(rs, (Fraction(1), Fraction(0)), e)
    assert got == e * (ONE - c * Fraction(1, 2))


def test_trig_constant_gets_rho():
    rs = RootSystem.build("B", 2)
    rho = weyl_vector(rs)
    for i in range(2):
        out = trig_dunkl_apply(rs, unit(i, 2), ExpPoly.const(2, ONE))
        assert out == ExpPoly.const(2, rho[i])


def test_trig_divided_difference_telescopes():
    rs = RootSystem.build("A", 2)
    alpha = rs.positive_roots[0]
    e = latt(3, (2, -1, 0))
    dd = trig_divided_difference(alpha, e)
    # (1 - exp(-(alpha,x))) * dd == (1 - s_alpha) e
    shift = tuple(-int(a.as_fraction() * dd.q)
                  if hasattr(a, "as_fraction") else -int(a * dd.q)
                  for a in alpha)
    check = dd - dd.shifted(shift)
    assert check == e - reflect_exp(alpha, e)


@pytest.mark.parametrize("fam,n", [("A", 2), ("B", 2)])
def test_trig_symmetric_polynomial_is_equivariant(fam, n):
    rs = RootSystem.build(fam, n, {lab: Fraction(1, 2)
                                   for lab in set(rs_labels(fam, n))})
    d = rs.ambient_dim

    def p2(e):
        out = ExpPoly(d, e.q, {})
        for i in range(d):
            xi = [Fraction(1) if t == i else Fraction(0) for t in range(d)]
            out = out + trig_dunkl_apply(rs, xi, trig_dunkl_apply(rs, xi, e))
        return out

    for g in range(len(rs.simple_roots)):
        for e in lattice_elements(d, 2):
            lhs = p2(act_word(rs, (g,), e))
            rhs = act_word(rs, (g,), p2(e))
            assert lhs == rhs


def rs_labels(fam, n):
    return RootSystem.build(fam, n).mult.keys()


def test_trig_conjugation_cross_relation():
    """Single trigonometric operators are not plainly equivariant; they obey
    s_a nabla_xi s_a = nabla_{s_a xi} + (sum_{gamma || a, gamma>0}
    c_gamma (gamma, xi)) s_a for simple reflections.  The correction term is
    why only symmetric polynomials of them restrict to strata."""
    cases = [
        ("A", 2, {"c": Fraction(1, 3)}),
        ("B", 2, {"c1": Fraction(1, 2), "c2": Fraction(1, 3)}),
        ("BC", 2, {"c1": Fraction(1, 2), "c2": Fraction(1, 3),
                   "c3": Fraction(2)}),
    ]
    for fam, n, mult in cases:
        rs = RootSystem.build(fam, n, mult)
        d = rs.ambient_dim
        for g, alpha in enumerate(rs.simple_roots):
            corr_by_xi = []
            for xi_idx in range(d):
                xi_f = unit(xi_idx, d)
                corr = ZERO
                for gam in rs.positive_roots:
                    parallel = all(
                        (gam[a] * alpha[b] - gam[b] * alpha[a]).is_zero
                        for a in range(d) for b in range(d))
                    if parallel:
                        corr = corr + rs.c_of(gam) * dot(gam, xi_f)
                corr_by_xi.append(corr)
            for xi_idx in range(d):
                xi = tuple(Fraction(1) if t == xi_idx else Fraction(0)
                           for t in range(d))
                sxi = rs.reflect(alpha, unit(xi_idx, d))
                sxi_q = [v.as_fraction() for v in sxi]
                for e in lattice_elements(d, 2):
                    lhs = act_word(rs, (g,), trig_dunkl_apply(
                        rs, xi, act_word(rs, (g,), e)))
                    rhs = trig_dunkl_apply(rs, sxi_q, e) \
                        + act_word(rs, (g,), e) * corr_by_xi[xi_idx]
                    assert lhs == rhs


# ---------------------------------------------------------------------------
# non-reduced systems
# ---------------------------------------------------------------------------


def test_bc_is_not_reduced_and_marked():
    bc = RootSystem.build("BC", 2, {"c1": Fraction(1, 2),
                                    "c2": Fraction(1, 3),
                                    "c3": Fraction(2)})
    b2 = RootSystem.build("B", 2)
    assert not is_reduced(bc)
    assert is_reduced(b2)
    assert not TrigDunkl(bc, (Fraction(1), Fraction(0))).equivariant
    assert TrigDunkl(b2, (Fraction(1), Fraction(0))).equivariant


def test_bc_single_operator_fails_equivariance():
    bc = RootSystem.build("BC", 2, {"c1": Fraction(1, 2),
                                    "c2": Fraction(1, 3),
                                    "c3": Fraction(2)})
    broken = False
    for e in lattice_elements(2, 2):
        xi = (Fraction(1), Fraction(0))
        wxi = bc.reflect(bc.simple_roots[0],
                         tuple(map(FieldScalar.coerce, xi)))
        lhs = trig_dunkl_apply(bc, wxi, act_word(bc, (0,), e))
        rhs = act_word(bc, (0,), trig_dunkl_apply(bc, xi, e))
        if lhs != rhs:
            broken = True
            break
    assert broken


def test_bc_symmetric_polynomials_commute_with_group():
    bc = RootSystem.build("BC", 2, {"c1": Fraction(1, 2),
                                    "c2": Fraction(1, 3),
                                    "c3": Fraction(2)})

    def p2(e):
        out = ExpPoly(2, e.q, {})
        for i in range(2):
            xi = [Fraction(1) if t == i else Fraction(0) for t in range(2)]
            out = out + trig_dunkl_apply(bc, xi, trig_dunkl_apply(bc, xi, e))
        return out

    for g in range(len(bc.simple_roots)):
        for e in lattice_elements(2, 3):
            assert p2(act_word(bc, (g,), e)) == act_word(bc, (g,), p2(e))


def test_bc_trig_operators_commute():
    bc = RootSystem.build("BC", 2, {"c1": Fraction(1, 2),
                                    "c2": Fraction(1, 3),
                                    "c3": Fraction(2)})
    assert commutator_on_monomials(bc, (Fraction(1), Fraction(0)),
                                   (Fraction(0), Fraction(1)), 2,
                                   trig=True) is None


# ---------------------------------------------------------------------------
# exchange operators (type A)
# ---------------------------------------------------------------------------


def test_exchange_vs_commuting_operators():
    """D_i equals the commuting operator plus c sum_{j<i} s_ij."""
    rs = RootSystem.build("A", 2)  # symbolic c, N = 3
    c = rs.c_of(rs.positive_roots[0])
    n = 3
    for i in range(n):
        for e in lattice_elements(n, 2):
            lhs = heckman_polychronakos_D(rs, i, e)
            rhs = hp_trig_nabla(rs, i, e)
            for j in range(i):
                swap = tuple(ONE if t == i else (-ONE if t == j else ZERO)
                             for t in range(n))
                rhs = rhs + reflect_exp(swap, e) * c
            assert lhs == rhs


def test_exchange_normalisation_shift():
    """The two trig normalisations differ by the constant c(N-1)/2."""
    rs = RootSystem.build("A", 2)
    c = rs.c_of(rs.positive_roots[0])
    n = 3
    shift = c * Fraction(n - 1, 2)
    for i in range(n):
        xi = [Fraction(1) if t == i else Fraction(0) for t in range(n)]
        for e in lattice_elements(n, 2):
            assert hp_trig_nabla(rs, i, e) == \
                trig_dunkl_apply(rs, xi, e) - e * shift


def test_exchange_braid_relation():
    rs = RootSystem.build("A", 1)  # N = 2, symbolic c
    swap = (ONE, -ONE)
    for e in lattice_elements(2, 2):
        lhs = reflect_exp(swap, heckman_polychronakos_D(rs, 0, e))
        rhs = heckman_polychronakos_D(rs, 1, reflect_exp(swap, e))
        assert lhs == rhs


def test_exchange_commutator_relation():
    rs = RootSystem.build("A", 1)
    c = rs.c_of(rs.positive_roots[0])
    swap = (ONE, -ONE)
    for e in lattice_elements(2, 2):
        lhs = heckman_polychronakos_D(rs, 0, heckman_polychronakos_D(
            rs, 1, e)) - heckman_polychronakos_D(rs, 1,
                                                 heckman_polychronakos_D(
                                                     rs, 0, e))
        se = reflect_exp(swap, e)
        rhs = (heckman_polychronakos_D(rs, 0, se)
               - heckman_polychronakos_D(rs, 1, se)) * c
        assert lhs == rhs


def test_exchange_requires_type_a():
    rs = RootSystem.build("B", 2)
    with pytest.raises(ValueError):
        heckman_polychronakos_D(rs, 0, latt(2, (1, 0)))


# ---------------------------------------------------------------------------
# harmonic combinations
# ---------------------------------------------------------------------------


def _harmonic_b2():
    from spincm.scalars.params import ParamField
    pf = ParamField(["c1", "c2", "w"])
    rs = RootSystem.build("B", 2, {"c1": pf.sym("c1"), "c2": pf.sym("c2")})
    return rs, pf.sym("w")


def test_harmonic_k1_closed_form():
    """K_1 = sum(nabla_i^2 - w^2 x_i^2) + 2w sum_a c_a s_a - wN."""
    rs, w = _harmonic_b2()
    ops = HarmonicOps(rs, w)
    n = rs.ambient_dim
    for exps in monomials_up_to(2, 3):
        p = mono(2, exps)
        lhs = ops.k(1, p)
        rhs = ops.k1_tilde(p) + ops.reflection_sum(p) * (2 * w) \
            - p * (w * n)
        assert (lhs - rhs).is_zero


def test_harmonic_k1_k2_commute():
    rs, w = _harmonic_b2()
    ops = HarmonicOps(rs, w)
    for exps in monomials_up_to(2, 4):
        p = mono(2, exps)
        lhs = ops.k(1, ops.k(2, p))
        rhs = ops.k(2, ops.k(1, p))
        assert (lhs - rhs).is_zero


def test_harmonic_zero_frequency():
    rs = RootSystem.build("B", 2, {"c1": Fraction(1, 2), "c2": Fraction(2)})
    ops = HarmonicOps(rs, ZERO)
    for exps in monomials_up_to(2, 3):
        p = mono(2, exps)
        direct = Poly.zero(2)
        for i in range(2):
            direct = direct + dunkl_apply(rs, unit(i, 2),
                                          dunkl_apply(rs, unit(i, 2), p))
        assert (ops.k(1, p) - direct).is_zero


def test_harmonic_rejects_exceptional():
    rs = RootSystem.build("G2")
    with pytest.raises(ValueError):
        HarmonicOps(rs, ONE)


# ---------------------------------------------------------------------------
# ideal preservation
# ---------------------------------------------------------------------------


def test_ideal_invariance_holds_at_critical_multiplicity():
    st = stratum_a_family(1, 2, 1, c=Fraction(1, 2))
    report = check_ideal_invariance(st.rs, st, 4)
    assert report.ok and not report.vacuous


def test_ideal_invariance_fails_off_critical():
    st = stratum_a_family(1, 2, 1, c=Fraction(1, 3))
    report = check_ideal_invariance(st.rs, st, 4)
    assert not report.ok
    gen, i, point, value = report.witness
    assert value
    image = dunkl_apply(st.rs, unit(i, 3), gen)
    assert image.evaluate(list(point)) == value


def test_ideal_invariance_vacuous_for_empty_graph():
    rs = RootSystem.build("A", 2, {"c": Fraction(1, 3)})
    st = Stratum.from_gamma0(rs, ())
    report = check_ideal_invariance(rs, st, 3)
    assert report.ok and report.vacuous


def test_ideal_generators_vanish_on_stratum():
    st = stratum_a_family(1, 2, 1, c=Fraction(1, 2))
    gens = ideal_generators(st.rs, st, 4)
    assert gens
    y = (FieldScalar.rational(Fraction(3, 5)),
         FieldScalar.rational(Fraction(7, 11)))
    x0 = st.embed(y)
    for g in gens:
        val = g.evaluate(list(x0))
        assert val is None or not val


def test_ideal_invariance_requires_concrete_multiplicities():
    rs = RootSystem.build("A", 2)  # symbolic multiplicity
    st = Stratum.from_gamma0(rs, (0,))
    with pytest.raises(ValueError):
        check_ideal_invariance(rs, st, 3)
