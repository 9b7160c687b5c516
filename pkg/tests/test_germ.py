"""Tests for the restriction engine: base points, jets, the operator action
on jet families, operator extraction, and extension independence.

Oracles used here:
* degenerate strata (no defining roots) are compared against the global
  polynomial/lattice operator action expanded at the base point;
* first-order restrictions on block strata are compared against the known
  directional-derivative form;
* second-order restrictions are compared termwise against independently
  assembled closed-form operators (Laplacian in the induced metric, drift,
  and fibre-summed reflection terms).
"""

import math
from fractions import Fraction

import pytest

from spincm.dunkl import (
    dunkl_apply,
    monomials_up_to,
    trig_dunkl_apply,
    weyl_vector,
)
from spincm.germ import (
    BasePoint,
    GenericityError,
    Jet,
    JetFamily,
    TruncationError,
    apply_dunkl,
    extract_operator,
    lift,
    verify_extension_independence,
)
from spincm.opalg import MatrixDiffOp
from spincm.rootsys import RootSystem, Stratum, dot, vec_key
from spincm.rootsys import stratum_a_family
from spincm.scalars.expfunc import (
    ExpFunc,
    ExpPoly,
    coth_half,
    sinh_half_inv_sq,
)
from spincm.scalars.field import FieldScalar
from spincm.scalars.poly import Poly
from spincm.scalars.ratfunc import RatFunc
from spincm.wmod import InvariantSubspace, WModule

ONE = FieldScalar.rational(1)
ZERO = FieldScalar()


def a2_stratum(c):
    rs = RootSystem.build("A", 2, {"c": Fraction(c)})
    st = Stratum.from_gamma0(rs, (0,))
    return rs, st


def b2_stratum(c1, c2):
    rs = RootSystem.build("B", 2, {"c1": Fraction(c1), "c2": Fraction(c2)})
    st = Stratum.from_gamma0(rs, (0,))
    return rs, st


def unit_xi(i, dim):
    return tuple(Fraction(1) if j == i else Fraction(0) for j in range(dim))


# -- expansion helpers (independent of the engine's lift) -------------------


def _series_mul(a, b, order):
    out = {}
    for k1, c1 in a.items():
        for k2, c2 in b.items():
            if sum(k1) + sum(k2) > order:
                continue
            nk = tuple(x + y for x, y in zip(k1, k2))
            c = c1 * c2
            cur = out.get(nk)
            out[nk] = c if cur is None else cur + c
    return {k: c for k, c in out.items() if not c.is_zero}


def expand_poly_at(base, si, p, order):
    """Jet (trivial module) of an ambient polynomial near sheet ``si``."""
    n = base.ambient_dim
    sheet = base.sheets[si]
    zero_key = (0,) * n
    var_series = []
    for i in range(n):
        sp = {zero_key: base.linear_form([v[i] for v in sheet.tvecs])}
        key = tuple(1 if j == i else 0 for j in range(n))
        sp[key] = base.one
        var_series.append(sp)
    acc = {}
    for k, c in p.coeffs.items():
        sp = {zero_key: base.fconst(c)}
        for i, e in enumerate(k):
            for _ in range(e):
                sp = _series_mul(sp, var_series[i], order)
        for dk, s in sp.items():
            cur = acc.get(dk)
            acc[dk] = s if cur is None else cur + s
    return Jet(n, 1, {k: (v,) for k, v in acc.items()})


def expand_exppoly_at(base, si, ep, order):
    """Jet (trivial module) of a lattice element near sheet ``si``."""
    n = base.ambient_dim
    sheet = base.sheets[si]
    zero_key = (0,) * n
    acc = {}
    for key, c in ep.coeffs.items():
        lam = [Fraction(ki, ep.q) for ki in key]
        # exponent of the base-point factor: (lam, w v_j) per coordinate
        vec = [sum((l * sheet.tvecs[j][i].as_fraction()
                    for i, l in enumerate(lam)), Fraction(0))
               for j in range(base.m)]
        factor = ExpFunc.exponential(vec, c, ONE)
        # Taylor factor exp((lam, delta))
        lin = {}
        for i, l in enumerate(lam):
            if l:
                k1 = tuple(1 if j == i else 0 for j in range(n))
                lin[k1] = base.fconst(FieldScalar.rational(l))
        sp = {zero_key: base.one}
        taylor = {zero_key: base.one}
        for t in range(1, order + 1):
            sp = _series_mul(sp, lin, order)
            if not sp:
                break
            inv_fact = base.fconst(Fraction(1, math.factorial(t)))
            for k1, c1 in sp.items():
                term = c1 * inv_fact
                cur = taylor.get(k1)
                taylor[k1] = term if cur is None else cur + term
        for dk, s in taylor.items():
            term = factor * s
            cur = acc.get(dk)
            acc[dk] = term if cur is None else cur + term
    return Jet(n, 1, {k: (v,) for k, v in acc.items()})


# -- closed-form second-order oracles ---------------------------------------


def h2_oracle(rs, st, mod, mode):
    """Laplacian in the induced metric, the drift along projected roots, and
    fibre-summed reflection terms (plus the squared Weyl-vector constant in
    the periodic case), assembled directly."""
    m = st.n
    inv = InvariantSubspace.from_stratum(mod, st)
    if mode == "rational":
        one = RatFunc.const(m, ONE, ONE)
    else:
        one = ExpFunc.const(m, ONE, ONE)
    z = MatrixDiffOp.zero(mode, st.var_names, inv.dim, one)
    op = z
    ginv = st.gram_inverse()
    for i in range(m):
        for j in range(m):
            if ginv[i][j] != 0:
                beta = tuple((1 if t == i else 0) + (1 if t == j else 0)
                             for t in range(m))
                op = op + z.term(ginv[i][j], beta)
    fibres = {}
    for alpha in rs.positive_roots:
        tf = st.tangential_form(alpha)
        if all(x == 0 for x in tf):
            continue
        fibres.setdefault(vec_key(tf), []).append(alpha)
    for key, roots in sorted(fibres.items()):
        tf = st.tangential_form(roots[0])
        pc = st.projection_coords(roots[0])
        if mode == "rational":
            lin = RatFunc.from_poly(Poly.linear_form(list(tf)), ONE)
            inv_den = lin.inverse()
            refl_coeff = inv_den * inv_den
        else:
            vec = [x.as_fraction() for x in tf]
            half = Fraction(1, 2)
            inv_den = coth_half(vec, ONE) * half
            refl_coeff = sinh_half_inv_sq(vec, ONE) * Fraction(1, 4)
        big = mod.dim
        smat = [[ZERO] * big for _ in range(big)]
        drift = ZERO
        for gamma in roots:
            c = rs.c_of(gamma)
            gg = dot(gamma, gamma)
            drift = drift + c
            pmat = mod.action_of_reflection(gamma)
            for a in range(big):
                for b in range(big):
                    delta = ONE if a == b else ZERO
                    smat[a][b] = smat[a][b] + c * gg * (delta - pmat[a][b])
        for i in range(m):
            if pc[i] != 0:
                beta = tuple(1 if t == i else 0 for t in range(m))
                coeff = inv_den * (FieldScalar.rational(-2) * drift * pc[i])
                op = op + z.term(coeff, beta)
        small = inv.compress(smat)
        if any(x != 0 for row in small for x in row):
            op = op + z.term(refl_coeff, (0,) * m, matrix=small)
    if mode == "trig":
        rho = weyl_vector(rs)
        op = op + z.constant_term(dot(rho, rho))
    return op


# -- base points -------------------------------------------------------------


def test_base_point_sheets_and_certificate():
    rs, st = a2_stratum(Fraction(1, 2))
    bp = BasePoint(st, WModule.trivial(rs), "rational")
    assert bp.n_sheets == 3
    assert bp.sheets[0].word == ()
    assert bp.vanishing == (0,)

    rs2, st2 = b2_stratum(Fraction(1, 2), Fraction(3, 7))
    bp2 = BasePoint(st2, WModule.trivial(rs2), "rational")
    assert bp2.n_sheets == 4

    st3 = stratum_a_family(2, 2, 0)
    bp3 = BasePoint(st3, WModule.trivial(st3.rs), "rational")
    assert bp3.n_sheets == 6


def test_neighbor_map_consistency():
    rs, st = a2_stratum(Fraction(1, 2))
    bp = BasePoint(st, WModule.trivial(rs), "rational")
    for si in range(bp.n_sheets):
        for ai, alpha in enumerate(rs.positive_roots):
            nb = bp.neighbor(si, ai)
            # reflecting twice returns to the original sheet
            assert bp.neighbor(nb, ai) == si
            if all(x == 0 for x in bp.tangential(si, ai)):
                assert nb == si


def test_genericity_error():
    rs = RootSystem.build("B", 2, {"c1": Fraction(1, 2),
                                   "c2": Fraction(1, 3)})
    st = Stratum(rs, [(1, 0)])
    with pytest.raises(GenericityError):
        BasePoint(st, WModule.trivial(rs), "rational")


def test_affine_stratum_rejected():
    rs, st = b2_stratum(Fraction(1, 2), Fraction(3, 7))
    shifted = Stratum(rs, st.pi_basis, gamma0=st.gamma0,
                      shift_units=(1, 1))
    with pytest.raises(ValueError, match="shifted"):
        BasePoint(shifted, WModule.trivial(rs), "rational")


def test_trig_requires_rational_pairings():
    st = stratum_a_family(2, 2, 0)
    with pytest.raises(ValueError, match="rational"):
        BasePoint(st, WModule.trivial(st.rs), "trig")


# -- lifting -----------------------------------------------------------------


def test_lift_constant_is_diagonally_invariant():
    rs, st = a2_stratum(Fraction(1, 2))
    bp = BasePoint(st, WModule.trivial(rs), "rational")
    fam = lift(bp, [Poly.const(st.n, ONE)], 3)
    assert fam.check_diagonal_invariance()
    for si in range(bp.n_sheets):
        assert fam.jets[si].constant_vector(bp) == (bp.one,)
        assert fam.jets[si].degree() <= 0


def test_lift_coordinate_is_diagonally_invariant():
    rs, st = a2_stratum(Fraction(1, 2))
    bp = BasePoint(st, WModule.trivial(rs), "rational")
    y1 = Poly.variable(0, st.n, ONE)
    fam = lift(bp, [y1], 3)
    assert fam.check_diagonal_invariance()
    # identity-sheet jet: y0_1 + (u_1, delta)
    j0 = fam.jets[0]
    assert j0.constant_vector(bp) == (bp.linear_form([ONE, ZERO]),)


def test_lift_reflection_module_fixed_and_unfixed_values():
    rs, st = a2_stratum(Fraction(1, 2))
    mod = WModule.reflection(rs)
    bp = BasePoint(st, mod, "rational")
    fixed = [Poly.const(st.n, ONE), Poly.const(st.n, ONE),
             Poly.zero(st.n)]
    fam = lift(bp, fixed, 2)
    assert fam.check_diagonal_invariance()
    unfixed = [Poly.const(st.n, ONE), Poly.zero(st.n), Poly.zero(st.n)]
    with pytest.raises(ValueError, match="not fixed"):
        lift(bp, unfixed, 2)


def test_lift_absolute_coordinates_need_rational_mode():
    rs, st = b2_stratum(Fraction(1, 2), Fraction(3, 7))
    bp = BasePoint(st, WModule.trivial(rs), "trig")
    y1 = Poly.variable(0, st.n, ONE)
    with pytest.raises(ValueError, match="rational"):
        lift(bp, [y1], 2)
    # deviations are fine
    fam = lift(bp, [y1], 2, deviation=True)
    assert fam.check_diagonal_invariance()


def test_truncation_budget_exhaustion():
    rs, st = a2_stratum(Fraction(1, 2))
    bp = BasePoint(st, WModule.trivial(rs), "rational")
    fam = lift(bp, [Poly.const(st.n, ONE)], 1)
    out = apply_dunkl(fam, unit_xi(0, 3))
    assert out.order == 0 and out.spent == 1
    with pytest.raises(TruncationError, match="order at least 2"):
        apply_dunkl(out, unit_xi(0, 3))


# -- degenerate strata: engine equals the global operator --------------------


def test_degenerate_rational_matches_global_operator():
    rs = RootSystem.build("A", 2, {"c": Fraction(1, 3)})
    st = Stratum.from_gamma0(rs, ())
    bp = BasePoint(st, WModule.trivial(rs), "rational")
    assert bp.n_sheets == 6
    p = Poly(3, {(2, 1, 0): ONE, (0, 0, 2): FieldScalar.rational(-2)})
    order = 4
    fam = JetFamily(bp, order,
                    {si: expand_poly_at(bp, si, p, order)
                     for si in range(bp.n_sheets)})
    for i in range(3):
        out = apply_dunkl(fam, unit_xi(i, 3))
        image = dunkl_apply(rs, unit_xi(i, 3), p)
        expected = expand_poly_at(bp, 0, image, order - 1)
        assert out.jets[0] == expected


def test_degenerate_trig_matches_global_operator():
    rs = RootSystem.build("B", 2, {"c1": Fraction(1, 2),
                                   "c2": Fraction(1, 3)})
    st = Stratum.from_gamma0(rs, ())
    bp = BasePoint(st, WModule.trivial(rs), "trig")
    assert bp.n_sheets == 8
    e = ExpPoly(2, 1, {(1, 0): ONE, (-1, 1): FieldScalar.rational(3)})
    order = 3
    fam = JetFamily(bp, order,
                    {si: expand_exppoly_at(bp, si, e, order)
                     for si in range(bp.n_sheets)})
    for i in range(2):
        out = apply_dunkl(fam, unit_xi(i, 2))
        image = trig_dunkl_apply(rs, unit_xi(i, 2), e)
        expected = expand_exppoly_at(bp, 0, image, order - 1)
        assert out.jets[0] == expected


# -- extraction --------------------------------------------------------------


def test_extract_unit_polynomial_gives_identity():
    st = stratum_a_family(2, 2, 0)
    mod = WModule.trivial(st.rs)
    op = extract_operator(st.rs, st, mod, Poly.const(4, ONE), "rational")
    one = RatFunc.const(2, ONE, ONE)
    z = MatrixDiffOp.zero("rational", st.var_names, 1, one)
    assert op == z.constant_term(1)


def test_extract_first_order_block_stratum():
    st = stratum_a_family(2, 2, 0)
    mod = WModule.trivial(st.rs)
    p = Poly(4, {(1, 0, 0, 0): ONE, (0, 1, 0, 0): ONE,
                 (0, 0, 1, 0): ONE, (0, 0, 0, 1): ONE})
    op = extract_operator(st.rs, st, mod, p, "rational")
    one = RatFunc.const(2, ONE, ONE)
    z = MatrixDiffOp.zero("rational", st.var_names, 1, one)
    rt2 = FieldScalar.sqrt(2)
    expected = z.term(rt2, (1, 0)) + z.term(rt2, (0, 1))
    assert op == expected


def sum_of_squares(n):
    return Poly(n, {tuple(2 if j == i else 0 for j in range(n)): ONE
                    for i in range(n)})


def power_sum(n, d):
    return Poly(n, {tuple(d if j == i else 0 for j in range(n)): ONE
                    for i in range(n)})


def test_h2_rational_block_stratum():
    st = stratum_a_family(2, 2, 0)
    mod = WModule.trivial(st.rs)
    op = extract_operator(st.rs, st, mod, sum_of_squares(4), "rational")
    assert op == h2_oracle(st.rs, st, mod, "rational")


def test_h2_rational_reflection_module():
    rs, st = a2_stratum(Fraction(1, 2))
    mod = WModule.reflection(rs)
    op = extract_operator(rs, st, mod, sum_of_squares(3), "rational")
    assert op == h2_oracle(rs, st, mod, "rational")


def test_h2_rational_two_orbits_fibre_sum():
    rs, st = b2_stratum(Fraction(1, 2), Fraction(3, 7))
    mod = WModule.reflection(rs)
    # the two short roots project onto the same covector; their reflection
    # terms only preserve the fixed line after fibre summation
    op = extract_operator(rs, st, mod, sum_of_squares(2), "rational")
    assert op == h2_oracle(rs, st, mod, "rational")


def test_h2_trig_block_stratum():
    rs, st = a2_stratum(Fraction(1, 2))
    mod = WModule.trivial(rs)
    op = extract_operator(rs, st, mod, sum_of_squares(3), "trig")
    assert op == h2_oracle(rs, st, mod, "trig")


def test_h2_trig_two_orbits_fibre_sum():
    rs, st = b2_stratum(Fraction(1, 2), Fraction(3, 7))
    mod = WModule.reflection(rs)
    op = extract_operator(rs, st, mod, sum_of_squares(2), "trig")
    assert op == h2_oracle(rs, st, mod, "trig")


# -- commuting integrals -----------------------------------------------------


def test_power_sum_commutators_rational_a2():
    rs, st = a2_stratum(Fraction(1, 2))
    mod = WModule.reflection(rs)
    ops = [extract_operator(rs, st, mod, power_sum(3, d), "rational")
           for d in (1, 2, 3)]
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            assert ops[i].commutator(ops[j]).is_zero


def test_power_sum_commutators_rational_block():
    st = stratum_a_family(2, 2, 0)
    mod = WModule.trivial(st.rs)
    ops = [extract_operator(st.rs, st, mod, power_sum(4, d), "rational")
           for d in (1, 2, 3)]
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            assert ops[i].commutator(ops[j]).is_zero


def test_power_sum_commutators_rational_b2():
    rs, st = b2_stratum(Fraction(1, 2), Fraction(3, 7))
    mod = WModule.reflection(rs)
    ops = [extract_operator(rs, st, mod, power_sum(2, d), "rational")
           for d in (2, 4)]
    assert ops[0].commutator(ops[1]).is_zero


def test_power_sum_commutators_trig_a2():
    rs, st = a2_stratum(Fraction(1, 2))
    mod = WModule.trivial(rs)
    ops = [extract_operator(rs, st, mod, power_sum(3, d), "trig")
           for d in (1, 2, 3)]
    for i in range(len(ops)):
        for j in range(i + 1, len(ops)):
            assert ops[i].commutator(ops[j]).is_zero


def test_power_sum_commutators_trig_b2():
    rs, st = b2_stratum(Fraction(1, 2), Fraction(3, 7))
    mod = WModule.trivial(rs)
    ops = [extract_operator(rs, st, mod, power_sum(2, d), "trig")
           for d in (2, 4)]
    assert ops[0].commutator(ops[1]).is_zero


# -- invariance of the diagonal structure ------------------------------------


def test_symmetric_polynomial_preserves_diagonal_invariance():
    rs, st = a2_stratum(Fraction(1, 2))
    mod = WModule.reflection(rs)
    bp = BasePoint(st, mod, "rational")
    phi = [Poly.variable(0, st.n, ONE), Poly.variable(0, st.n, ONE),
           Poly.zero(st.n)]
    order = 4
    fam = lift(bp, phi, order, deviation=True)
    assert fam.check_diagonal_invariance()
    total = None
    for i in range(3):
        cur = apply_dunkl(apply_dunkl(fam, unit_xi(i, 3)), unit_xi(i, 3))
        total = cur if total is None else JetFamily(
            bp, cur.order,
            {si: total.jets[si] + cur.jets[si]
             for si in range(bp.n_sheets)}, cur.spent)
    assert total.check_diagonal_invariance()
    # a single non-symmetric application does not preserve the structure
    single = apply_dunkl(fam, unit_xi(0, 3))
    assert not single.check_diagonal_invariance()


# -- extension independence --------------------------------------------------


def test_extension_independence_invariant_stratum():
    rs, st = a2_stratum(Fraction(1, 2))
    mod = WModule.reflection(rs)
    bp = BasePoint(st, mod, "rational")
    fixed = [Poly.const(st.n, ONE), Poly.const(st.n, ONE),
             Poly.zero(st.n)]
    fam = lift(bp, fixed, 3)
    rep = verify_extension_independence(fam, unit_xi(0, 3))
    assert rep.ok and not rep.vacuous


def test_extension_dependence_noninvariant_stratum():
    rs, st = a2_stratum(Fraction(1, 3))
    mod = WModule.reflection(rs)
    bp = BasePoint(st, mod, "rational")
    fixed = [Poly.const(st.n, ONE), Poly.const(st.n, ONE),
             Poly.zero(st.n)]
    fam = lift(bp, fixed, 3)
    rep = verify_extension_independence(fam, unit_xi(0, 3))
    assert not rep.ok
    assert rep.witness is not None


def test_extension_independence_trig_dichotomy():
    for c1, expect in ((Fraction(1, 2), True), (Fraction(1, 4), False)):
        rs, st = b2_stratum(c1, Fraction(3, 7))
        mod = WModule.reflection(rs)
        bp = BasePoint(st, mod, "trig")
        fixed = [Poly.const(st.n, ONE), Poly.const(st.n, ONE)]
        fam = lift(bp, fixed, 3, deviation=True)
        rep = verify_extension_independence(fam, unit_xi(0, 2))
        assert rep.ok == expect


def test_extension_independence_vacuous_without_defining_roots():
    rs = RootSystem.build("A", 2, {"c": Fraction(1, 3)})
    st = Stratum.from_gamma0(rs, ())
    bp = BasePoint(st, WModule.trivial(rs), "rational")
    fam = lift(bp, [Poly.const(3, ONE)], 2)
    rep = verify_extension_independence(fam, unit_xi(0, 3))
    assert rep.ok and rep.vacuous
