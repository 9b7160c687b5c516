"""Root-system constructions, orbits, strata, projection, invariance."""

from fractions import Fraction

import pytest

from spincm.rootsys import (
    RootSystem,
    Stratum,
    dot,
    invariance_condition,
    reflect,
    table_scan,
    vec_key,
    vector,
)
from spincm.scalars.field import FieldScalar


COUNTS = [
    # family, n, positive count, simple count, orbit labels
    ("A", 1, 1, 1, {"c"}),
    ("A", 2, 3, 2, {"c"}),
    ("A", 4, 10, 4, {"c"}),
    ("B", 2, 4, 2, {"c1", "c2"}),
    ("B", 3, 9, 3, {"c1", "c2"}),
    ("C", 3, 9, 3, {"c1", "c2"}),
    ("BC", 2, 6, 2, {"c1", "c2", "c3"}),
    ("BC", 3, 12, 3, {"c1", "c2", "c3"}),
    ("D", 4, 12, 4, {"c"}),
    ("D", 5, 20, 5, {"c"}),
    ("F4", None, 24, 4, {"c1", "c2"}),
    ("G2", None, 6, 2, {"c1", "c2"}),
    ("E6", None, 36, 6, {"c"}),
    ("E7", None, 63, 7, {"c"}),
    ("E8", None, 120, 8, {"c"}),
    ("H4", None, 60, 4, {"c"}),
    ("I2", 4, 4, 2, {"c1", "c2"}),
    ("I2", 6, 6, 2, {"c1", "c2"}),
    ("I2", 3, 3, 2, {"c"}),
]


@pytest.mark.parametrize("family,n,npos,nsimple,labels", COUNTS)
def test_counts_and_labels(family, n, npos, nsimple, labels):
    rs = RootSystem.build(family, n)
    assert len(rs.positive_roots) == npos
    assert len(rs.roots) == 2 * npos
    assert len(rs.simple_roots) == nsimple
    assert set(rs.mult) == labels


@pytest.mark.parametrize("family,n", [
    ("A", 3), ("B", 3), ("C", 3), ("BC", 3), ("D", 4),
    ("F4", None), ("G2", None), ("H4", None), ("I2", 6),
])
def test_reflection_closure(family, n):
    rs = RootSystem.build(family, n)
    for a in rs.positive_roots:
        for b in rs.roots:
            image = rs.reflect(a, b)
            assert rs.is_root(image)
            # reflections preserve the orbit partition
            assert rs.label_of(image) == rs.label_of(b)


@pytest.mark.parametrize("family,n", [("E6", None), ("E7", None),
                                      ("E8", None)])
def test_e_series_closure(family, n):
    rs = RootSystem.build(family, n)
    for a in rs.simple_roots:
        for b in rs.roots:
            assert rs.is_root(rs.reflect(a, b))


def test_reflection_is_isometry_and_involution():
    rs = RootSystem.build("F4")
    a = rs.positive_roots[7]
    for b in rs.roots[:20]:
        for c in rs.roots[:20]:
            assert dot(rs.reflect(a, b), rs.reflect(a, c)) == dot(b, c)
        assert rs.reflect(a, rs.reflect(a, b)) == b


def test_coxeter_diagrams():
    assert RootSystem.build("A", 3).coxeter_edges() == [(0, 1, 3), (1, 2, 3)]
    assert RootSystem.build("B", 3).coxeter_edges() == [(0, 1, 3), (1, 2, 4)]
    assert RootSystem.build("F4").coxeter_edges() == [(0, 1, 3), (1, 2, 4),
                                                      (2, 3, 3)]
    assert RootSystem.build("G2").coxeter_edges() == [(0, 1, 6)]
    assert RootSystem.build("H4").coxeter_edges() == [(0, 1, 5), (1, 2, 3),
                                                      (2, 3, 3)]
    # the 8-node diagram: chain 1-3-4-5-6-7-8 with node 2 attached at node 4
    assert set(RootSystem.build("E8").coxeter_edges()) == {
        (0, 2, 3), (1, 3, 3), (2, 3, 3), (3, 4, 3), (4, 5, 3), (5, 6, 3),
        (6, 7, 3)}


def test_orbit_label_assignment():
    rs = RootSystem.build("B", 3)
    assert rs.label_of(vector(1, -1, 0)) == "c1"
    assert rs.label_of(vector(1, 1, 0)) == "c1"
    assert rs.label_of(vector(0, 0, 1)) == "c2"
    rs = RootSystem.build("C", 3)
    assert rs.label_of(vector(1, -1, 0)) == "c1"
    assert rs.label_of(vector(0, 0, 2)) == "c2"
    rs = RootSystem.build("BC", 3)
    assert rs.label_of(vector(1, 1, 0)) == "c1"
    assert rs.label_of(vector(0, 1, 0)) == "c2"
    assert rs.label_of(vector(0, 2, 0)) == "c3"
    rs = RootSystem.build("F4")
    # first simple is long, third is short
    assert rs.label_of(vector(0, 1, -1, 0)) == "c1"
    assert rs.label_of(vector(1, 0, 0, 0)) == "c2"
    h = Fraction(1, 2)
    assert rs.label_of(vector(h, h, h, h)) == "c2"
    rs = RootSystem.build("G2")
    assert rs.label_of(vector(1, -1, 0)) == "c1"      # short
    assert rs.label_of(vector(-2, 1, 1)) == "c2"      # long


def test_simple_coordinates_positive():
    rs = RootSystem.build("E8")
    for r in rs.positive_roots:
        coords = rs.simple_coordinates(r)
        assert all(c.sign() >= 0 for c in coords)
        assert any(c.sign() > 0 for c in coords)


def test_h4_root_norms():
    rs = RootSystem.build("H4")
    for r in rs.roots:
        assert dot(r, r) == 1


def test_i2_unavailable_order():
    with pytest.raises(ValueError):
        RootSystem.build("I2", 5)
    with pytest.raises(ValueError):
        RootSystem.build("I2", 7)


def test_multiplicity_binding():
    rs = RootSystem.build("B", 2, multiplicities={"c1": Fraction(1, 2),
                                                  "c2": 1})
    assert rs.c_of(vector(1, 1)) == Fraction(1, 2)
    assert rs.c_of(vector(0, 1)) == 1
    with pytest.raises(KeyError):
        RootSystem.build("B", 2, multiplicities={"c1": 1})
    with pytest.raises(KeyError):
        RootSystem.build("A", 2, multiplicities={"c": 1, "c9": 1})


# ---------------------------------------------------------------------------
# strata and projection
# ---------------------------------------------------------------------------


def test_stratum_duality():
    rs = RootSystem.build("B", 3)
    st = Stratum.from_gamma0(rs, [0])     # x1 = x2
    assert st.n == 2
    dual = st.dual_basis()
    for i, u in enumerate(dual):
        for j, v in enumerate(st.pi_basis):
            expected = 1 if i == j else 0
            assert dot(u, v) == expected


def test_projection_a2_block():
    rs = RootSystem.build("A", 2, multiplicities={"c": Fraction(1, 2)})
    st = Stratum.from_gamma0(rs, [0])
    proj = st.project()
    assert proj.fixed_indices == (0,)     # e1 - e2 vanishes on the stratum
    assert len(proj.entries) == 1
    e = proj.entries[0]
    assert e.root_indices == (1, 2)       # e1-e3 and e2-e3 merge
    assert e.chat == 1                    # 2 * (1/2)
    assert e.norm == Fraction(3, 2)


def test_projection_b3_multiplicities():
    rs = RootSystem.build("B", 3, multiplicities={"c1": Fraction(1, 2),
                                                  "c2": Fraction(3, 1)})
    st = Stratum.from_gamma0(rs, [0])     # x1 = x2
    proj = st.project()
    # classes: by coordinates in basis v1=(1,1,0), v2=(0,0,1)
    half = Fraction(1, 2)
    assert proj.entry_for([half, -1]).chat == 1          # e1-e3, e2-e3
    assert proj.entry_for([half, 1]).chat == 1           # e1+e3, e2+e3
    assert proj.entry_for([1, 0]).chat == Fraction(1, 2)  # e1+e2
    assert proj.entry_for([half, 0]).chat == 6           # e1, e2
    assert proj.entry_for([0, 1]).chat == 3              # e3
    assert len(proj.entries) == 5
    # proportional grouping: (1/2,0) and (1,0) lie on one line
    lines = proj.lines()
    sizes = sorted(len(g) for g in lines)
    assert sizes == [1, 1, 1, 2]


def test_projection_norm_is_projection_length():
    rs = RootSystem.build("D", 4)
    st = Stratum.from_gamma0(rs, [0, 2])
    proj = st.project()
    for e in proj.entries:
        # (ahat, alpha) = (ahat, ahat) for each fibre root
        for i in e.root_indices:
            alpha = rs.positive_roots[i]
            assert dot(e.ahat, alpha) == e.norm


# ---------------------------------------------------------------------------
# invariance condition
# ---------------------------------------------------------------------------


def test_invariance_a2_block():
    rs = RootSystem.build("A", 2, multiplicities={"c": Fraction(1, 2)})
    st = Stratum.from_gamma0(rs, [0])
    rep = invariance_condition(st)
    ok, wit = rep.check()
    assert ok and not wit
    ok, wit = rep.check(mult={"c": Fraction(1, 3)})
    assert not ok
    assert wit[0]["lhs"] == "4/3"
    assert wit[0]["rhs"] == "2"
    status, sol = rep.solve()
    assert status == "unique"
    assert sol["c"] == Fraction(1, 2)


def test_invariance_disconnected_components():
    rs = RootSystem.build("A", 3, multiplicities={"c": Fraction(1, 2)})
    st = Stratum.from_gamma0(rs, [0, 2])   # x1=x2, x3=x4
    rep = invariance_condition(st)
    assert len(rep.components) == 2
    assert rep.check()[0]


def test_invariance_g2_full_parabolic():
    # the whole G2 system is singular on the line x1=x2=x3; the weighted
    # projector sum is a multiple of the identity, giving one trace relation
    rs = RootSystem.build("G2")
    st = Stratum.from_gamma0(rs, [0, 1])
    assert st.n == 1
    rep = invariance_condition(st)
    status, data = rep.solve()
    assert status == "underdetermined"
    ok, _ = rep.check(mult={"c1": Fraction(1, 6), "c2": Fraction(1, 6)})
    assert ok
    ok, _ = rep.check(mult={"c1": Fraction(1, 4), "c2": Fraction(1, 12)})
    assert ok
    ok, _ = rep.check(mult={"c1": Fraction(1, 4), "c2": Fraction(1, 4)})
    assert not ok


def test_invariance_symbolic_parameters():
    rs = RootSystem.build("B", 2)          # symbolic c1, c2
    st = Stratum.from_gamma0(rs, [1])      # mirror of e2
    rep = invariance_condition(st)
    ok, wit = rep.check()                  # symbolic values do not satisfy
    assert not ok
    status, sol = rep.solve()
    assert status == "unique"
    assert sol["c2"] == Fraction(1, 2)
    assert "c1" not in sol


def test_table_scan_b2():
    rs = RootSystem.build("B", 2)
    rows = table_scan(rs)
    by_subset = {r["subset"]: r for r in rows}
    assert by_subset[(0,)]["status"] == "unique"
    assert by_subset[(1,)]["status"] == "unique"
    # the full parabolic has a zero-dimensional stratum and is skipped
    assert (0, 1) not in by_subset


def test_weyl_orbit_sizes():
    rs = RootSystem.build("B", 3)
    assert len(rs.weyl_orbit(vector(1, 0, 0))) == 6
    assert len(rs.weyl_orbit(vector(1, 1, 0))) == 12
    assert len(rs.weyl_orbit(vector(1, 2, 3))) == 48
