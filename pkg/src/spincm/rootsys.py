"""Finite reflection arrangements with marked multiplicities.

Provides exact constructions of the classical and exceptional root systems,
orbitwise multiplicity bookkeeping, parabolic strata (flats cut out by a set
of mirrors, optionally shifted by half-period imaginary translations),
projection of the arrangement onto a stratum with multiplicity aggregation,
and the bilinear invariance condition that characterises which multiplicity
values make a stratum admissible.

Conventions
-----------
* Vectors are tuples of ``FieldScalar`` in a fixed ambient orthonormal
  coordinate system; the bilinear form is the standard dot product.
* Reflections act on row vectors symmetrically: ``s_a(v) = v - 2(a,v)/(a,a) a``.
* Orbit labels are ``"c"`` when the action on roots is transitive, else
  ``"c1", "c2", ...`` assigned by first appearance scanning the simple roots
  and then the remaining positive roots in construction order.
* A stratum stores a basis ``v_1..v_n`` of its tangent space; coordinates of
  projected vectors are always expressed in that basis.  The optional shift
  is a tuple of integers ``u`` encoding a translation by ``i*pi*u`` used by
  the half-period trigonometric strata; pairings with roots are tracked
  modulo 2 (sign classes of the exponentials).
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from . import linalg
from .scalars.field import FieldScalar
from .scalars.params import ParamField
from .scalars.ratfunc import RatFunc

Vec = tuple  # tuple[FieldScalar, ...]

_ZERO = FieldScalar()
_ONE = FieldScalar.rational(1)


def fs(q) -> FieldScalar:
    return FieldScalar.coerce(q)


def vector(*entries) -> Vec:
    return tuple(FieldScalar.coerce(e) for e in entries)


def _unit(i: int, dim: int) -> Vec:
    return tuple(_ONE if j == i else _ZERO for j in range(dim))


def _fs_key(x: FieldScalar):
    data = x.to_json()["terms"]
    return tuple((tuple(t["primes"]), t["num"], t["den"]) for t in data)


def vec_key(v: Vec):
    return tuple(_fs_key(x) for x in v)


def dot(u: Vec, v: Vec) -> FieldScalar:
    acc = _ZERO
    for a, b in zip(u, v):
        acc = acc + a * b
    return acc


def vec_is_zero(v: Vec) -> bool:
    return all(x == 0 for x in v)


def reflect(alpha: Vec, v: Vec) -> Vec:
    coeff = (fs(2) * dot(alpha, v)) / dot(alpha, alpha)
    return tuple(x - coeff * a for x, a in zip(v, alpha))


def reflection_matrix(alpha: Vec) -> list[list[FieldScalar]]:
    """Matrix of s_alpha in ambient coordinates (symmetric, so it serves both
    row- and column-vector conventions)."""
    dim = len(alpha)
    nrm = dot(alpha, alpha)
    two = fs(2)
    rows = []
    for i in range(dim):
        row = []
        for j in range(dim):
            val = (_ONE if i == j else _ZERO) - two * alpha[i] * alpha[j] / nrm
            row.append(val)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# construction of the individual families
# ---------------------------------------------------------------------------


def _roots_type_a(rank: int):
    dim = rank + 1
    pos = []
    for i in range(dim):
        for j in range(i + 1, dim):
            v = [_ZERO] * dim
            v[i] = _ONE
            v[j] = -_ONE
            pos.append(tuple(v))
    simples = []
    for i in range(rank):
        v = [_ZERO] * dim
        v[i] = _ONE
        v[i + 1] = -_ONE
        simples.append(tuple(v))
    return dim, tuple(simples), tuple(pos)


def _two_index_roots(dim: int):
    out = []
    for i in range(dim):
        for j in range(i + 1, dim):
            for sj in (1, -1):
                v = [_ZERO] * dim
                v[i] = _ONE
                v[j] = fs(sj)
                out.append(tuple(v))
    return out


def _roots_type_bcd(family: str, rank: int):
    dim = rank
    pos = []
    if family != "D":
        pass
    pos.extend(_two_index_roots(dim))
    if family in ("B", "BC"):
        for i in range(dim):
            pos.append(_unit(i, dim))
    if family in ("C", "BC"):
        for i in range(dim):
            v = [_ZERO] * dim
            v[i] = fs(2)
            pos.append(tuple(v))
    simples = []
    for i in range(rank - 1):
        v = [_ZERO] * dim
        v[i] = _ONE
        v[i + 1] = -_ONE
        simples.append(tuple(v))
    if family in ("B", "BC"):
        simples.append(_unit(rank - 1, dim))
    elif family == "C":
        v = [_ZERO] * dim
        v[rank - 1] = fs(2)
        simples.append(tuple(v))
    else:  # D
        v = [_ZERO] * dim
        v[rank - 2] = _ONE
        v[rank - 1] = _ONE
        simples.append(tuple(v))
    return dim, tuple(simples), tuple(pos)


def _roots_e8():
    dim = 8
    roots = list(_two_index_roots(dim))
    for i in range(dim):
        for j in range(i + 1, dim):
            v = [_ZERO] * dim
            v[i] = -_ONE
            v[j] = -_ONE
            roots.append(tuple(v))
            v2 = [_ZERO] * dim
            v2[i] = -_ONE
            v2[j] = _ONE
            roots.append(tuple(v2))
    half = Fraction(1, 2)
    for signs in itertools.product((1, -1), repeat=8):
        if sum(1 for s in signs if s < 0) % 2 == 0:
            roots.append(tuple(fs(Fraction(s) * half) for s in signs))
    # deduplicate two-index generation (both sign patterns were emitted above)
    seen = set()
    uniq = []
    for r in roots:
        k = vec_key(r)
        if k not in seen:
            seen.add(k)
            uniq.append(r)
    h = Fraction(1, 2)
    simples = (
        vector(h, -h, -h, -h, -h, -h, -h, h),
        vector(1, 1, 0, 0, 0, 0, 0, 0),
        vector(-1, 1, 0, 0, 0, 0, 0, 0),
        vector(0, -1, 1, 0, 0, 0, 0, 0),
        vector(0, 0, -1, 1, 0, 0, 0, 0),
        vector(0, 0, 0, -1, 1, 0, 0, 0),
        vector(0, 0, 0, 0, -1, 1, 0, 0),
        vector(0, 0, 0, 0, 0, -1, 1, 0),
    )
    return dim, simples, tuple(uniq)


def _roots_f4():
    dim = 4
    pos = []
    for i in range(dim):
        pos.append(_unit(i, dim))
    pos.extend(_two_index_roots(dim))
    half = fs(Fraction(1, 2))
    for signs in itertools.product((1, -1), repeat=3):
        pos.append(tuple([half] + [half * fs(s) for s in signs]))
    simples = (
        vector(0, 1, -1, 0),
        vector(0, 0, 1, -1),
        vector(0, 0, 0, 1),
        vector(Fraction(1, 2), Fraction(-1, 2), Fraction(-1, 2), Fraction(-1, 2)),
    )
    return dim, simples, tuple(pos)


def _roots_g2():
    dim = 3
    a1 = vector(1, -1, 0)
    a2 = vector(-2, 1, 1)
    pos = []
    combos = ((1, 0), (0, 1), (1, 1), (2, 1), (3, 1), (3, 2))
    for p, q in combos:
        v = tuple(fs(p) * x + fs(q) * y for x, y in zip(a1, a2))
        pos.append(v)
    return dim, (a1, a2), tuple(pos)


_COS_TABLE = {
    # 2*cos(k*pi/12) for k = 0..12, exact where representable
    0: ("r", Fraction(2)),
    1: None,
    2: ("s", 3, Fraction(1)),  # 2cos(pi/6)=sqrt(3)
    3: ("s", 2, Fraction(1)),  # 2cos(pi/4)=sqrt(2)
    4: ("r", Fraction(1)),
    5: None,
    6: ("r", Fraction(0)),
    7: None,
    8: ("r", Fraction(-1)),
    9: ("s", 2, Fraction(-1)),
    10: ("s", 3, Fraction(-1)),
    11: None,
    12: ("r", Fraction(-2)),
}


def _cos_sin(k: int, m: int):
    """Exact (cos, sin) of k*pi/m for the dihedral orders supported here."""
    num = k * 12
    if num % m != 0:
        raise ValueError(f"angle pi*{k}/{m} not on the 12th-root lattice")
    steps = (num // m) % 24
    half = fs(Fraction(1, 2))

    def val(idx):
        idx %= 24
        flip = False
        if idx > 12:
            idx = 24 - idx
            flip = True
        entry = _COS_TABLE[idx]
        if entry is None:
            raise ValueError("angle not representable")
        if entry[0] == "r":
            out = fs(entry[1]) * half
        else:
            out = FieldScalar.sqrt(Fraction(entry[1])) * fs(entry[2]) * half
        return out if not flip else out

    c = val(steps)
    s = val((6 - steps) % 24)  # sin t = cos(pi/2 - t)
    return c, s


def _roots_i2(m: int):
    if m not in (2, 3, 4, 6):
        raise ValueError(
            f"I2({m}) is not available: its root coordinates involve "
            "sin(pi/{m}) values outside the multi-quadratic rational field "
            "used for exact arithmetic (supported orders: 2, 3, 4, 6)"
        )
    dim = 2
    pos = []
    for k in range(m):
        c, s = _cos_sin(k, m)
        pos.append((c, s))
    simples = (pos[0], pos[m - 1])
    return dim, simples, tuple(pos)


_PHI_HALF = None


def _h4_base_entries():
    s5 = FieldScalar.sqrt(5)
    quarter = fs(Fraction(1, 4))
    phi_half = (fs(1) + s5) * quarter  # phi/2
    inv_two_phi = (s5 - fs(1)) * quarter  # 1/(2 phi)
    return phi_half, inv_two_phi


_EVEN_PERMS_4 = [
    p
    for p in itertools.permutations(range(4))
    if sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j]) % 2 == 0
]


def _roots_h4():
    dim = 4
    roots = []
    for i in range(4):
        roots.append(_unit(i, 4))
        roots.append(tuple(-x for x in _unit(i, 4)))
    half = fs(Fraction(1, 2))
    for signs in itertools.product((1, -1), repeat=4):
        roots.append(tuple(half * fs(s) for s in signs))
    phi_half, inv_two_phi = _h4_base_entries()
    base = (_ZERO, half, inv_two_phi, phi_half)
    seen = set()
    for perm in _EVEN_PERMS_4:
        permuted = tuple(base[perm.index(i)] for i in range(4))
        nz = [i for i in range(4) if not (permuted[i] == 0)]
        for signs in itertools.product((1, -1), repeat=3):
            v = list(permuted)
            for idx, s in zip(nz, signs):
                v[idx] = v[idx] * fs(s)
            key = vec_key(tuple(v))
            if key not in seen:
                seen.add(key)
                roots.append(tuple(v))
    if len(roots) != 120:
        raise AssertionError(f"H4 generation produced {len(roots)} roots")
    # positivity via a generic rational functional
    lam = vector(1, Fraction(1, 10), Fraction(1, 100), Fraction(1, 1000))
    pos = [r for r in roots if dot(r, lam).sign() > 0]
    if len(pos) != 60:
        raise AssertionError("H4 positivity functional is not generic")
    # simple roots: alpha is simple iff its reflection permutes the other
    # positive roots (the only positive root it negates is alpha itself)
    pos_keys = {vec_key(r) for r in pos}
    simples = []
    for r in pos:
        r_key = vec_key(r)
        simple = True
        for b in pos:
            if vec_key(b) == r_key:
                continue
            if vec_key(reflect(r, b)) not in pos_keys:
                simple = False
                break
        if simple:
            simples.append(r)
    if len(simples) != 4:
        raise AssertionError("H4 simple-root extraction failed")
    # order the simples along the Coxeter chain, 5-edge first
    def edge_order(a, b):
        c2 = dot(a, b) * dot(a, b) / (dot(a, a) * dot(b, b))
        for m_ord, val in ((2, Fraction(0)), (3, Fraction(1, 4)), (4, Fraction(1, 2)), (6, Fraction(3, 4))):
            if c2 == val:
                return m_ord
        if c2 == (fs(3) + FieldScalar.sqrt(5)) * fs(Fraction(1, 8)):
            return 5
        raise AssertionError("unexpected H4 angle")

    chain = _order_chain(simples, edge_order)
    return dim, tuple(chain), tuple(pos)


def _order_chain(simples, edge_order):
    n = len(simples)
    adj = {i: [] for i in range(n)}
    orders = {}
    for i in range(n):
        for j in range(i + 1, n):
            m_ord = edge_order(simples[i], simples[j])
            if m_ord > 2:
                adj[i].append(j)
                adj[j].append(i)
                orders[(i, j)] = orders[(j, i)] = m_ord
    ends = [i for i in range(n) if len(adj[i]) == 1]
    if len(ends) != 2:
        raise AssertionError("simple-root diagram is not a chain")
    # start from the end whose edge has the largest order (the 5-edge end)
    def first_edge(e):
        return orders[(e, adj[e][0])]

    start = max(ends, key=first_edge)
    path = [start]
    prev = None
    cur = start
    while len(path) < n:
        nxts = [j for j in adj[cur] if j != prev]
        prev, cur = cur, nxts[0]
        path.append(cur)
    return [simples[i] for i in path]


# ---------------------------------------------------------------------------
# the RootSystem class
# ---------------------------------------------------------------------------


class RootSystem:
    """An exact reflection arrangement with orbit multiplicities.

    Roots are stored with the positive roots first, followed by their
    negatives in the same order.  ``mult`` maps orbit labels to multiplicity
    values (exact scalars or symbolic parameters)."""

    def __init__(self, name, family, ambient_dim, simples, positives,
                 orbit_labels, mult, param_field, meta=None):
        self.name = name
        self.family = family
        self.ambient_dim = ambient_dim
        self.simple_roots = tuple(simples)
        self.positive_roots = tuple(positives)
        negatives = tuple(tuple(-x for x in r) for r in positives)
        self.roots = self.positive_roots + negatives
        self.orbit_labels = dict(orbit_labels)
        self.mult = dict(mult)
        self.param_field = param_field
        self.meta = dict(meta or {})
        self._index = {vec_key(r): i for i, r in enumerate(self.roots)}
        self._refl_cache = {}
        self._simple_gram_inv = None

    # -- construction ------------------------------------------------------

    @staticmethod
    def build(family: str, n: int | None = None, multiplicities=None):
        family = family.upper() if family not in ("I2",) else family
        if family == "A":
            if n is None or n < 1:
                raise ValueError("type A requires rank n >= 1")
            dim, simples, pos = _roots_type_a(n)
            name = f"A{n}"
        elif family in ("B", "C", "BC"):
            if n is None or n < 1:
                raise ValueError(f"type {family} requires rank n >= 1")
            dim, simples, pos = _roots_type_bcd(family, n)
            name = f"{family}{n}"
        elif family == "D":
            if n is None or n < 2:
                raise ValueError("type D requires rank n >= 2")
            dim, simples, pos = _roots_type_bcd("D", n)
            name = f"D{n}"
        elif family in ("E6", "E7", "E8"):
            dim, simples8, all_roots = _roots_e8()
            keep = {"E6": 6, "E7": 7, "E8": 8}[family]
            rows = [list(s) for s in simples8]
            gram = linalg.mat_mul(rows, linalg.transpose(rows))
            gram_inv = linalg.inverse(gram)
            kept_roots = []
            for r in all_roots:
                rhs = [dot(r, s) for s in simples8]
                coords = linalg.vec_mat(rhs, gram_inv)
                if all(coords[i] == 0 for i in range(keep, 8)):
                    kept_roots.append((r, coords[:keep]))
            pos = tuple(r for r, coords in kept_roots
                        if all(c.sign() >= 0 for c in coords))
            simples = tuple(simples8[:keep])
            expected = {"E6": 36, "E7": 63, "E8": 120}[family]
            if len(pos) != expected:
                raise AssertionError(
                    f"{family} construction produced {len(pos)} positive roots")
            name = family
        elif family == "F4":
            dim, simples, pos = _roots_f4()
            name = "F4"
        elif family == "G2":
            dim, simples, pos = _roots_g2()
            name = "G2"
        elif family == "H4":
            dim, simples, pos = _roots_h4()
            name = "H4"
        elif family == "I2":
            if n is None:
                raise ValueError("I2 requires the dihedral order m")
            dim, simples, pos = _roots_i2(n)
            name = f"I2({n})"
        else:
            raise ValueError(f"unknown family {family!r}")

        orbit_labels = _assign_orbit_labels(dim, simples, pos)
        labels = sorted(set(orbit_labels.values()),
                        key=lambda s: (len(s), s))
        if multiplicities is None:
            pf = ParamField(labels)
            mult = {lab: pf.sym(lab) for lab in labels}
        else:
            pf = None
            mult = {}
            for lab in labels:
                if lab not in multiplicities:
                    raise KeyError(f"multiplicity for orbit {lab!r} missing")
                val = multiplicities[lab]
                if isinstance(val, RatFunc):
                    mult[lab] = val
                else:
                    mult[lab] = FieldScalar.coerce(val)
            for extra in multiplicities:
                if extra not in labels:
                    raise KeyError(f"unknown orbit label {extra!r} "
                                   f"(labels: {labels})")
        return RootSystem(name, family, dim, simples, pos, orbit_labels,
                          mult, pf)

    def with_multiplicities(self, multiplicities):
        mult = {}
        pf = None
        for lab in sorted(set(self.orbit_labels.values())):
            val = multiplicities[lab]
            if isinstance(val, RatFunc):
                mult[lab] = val
            else:
                mult[lab] = FieldScalar.coerce(val)
        return RootSystem(self.name, self.family, self.ambient_dim,
                          self.simple_roots, self.positive_roots,
                          self.orbit_labels, mult, pf, self.meta)

    # -- basic queries -----------------------------------------------------

    @property
    def rank(self) -> int:
        return linalg.rank([list(s) for s in self.simple_roots])

    def root_index(self, v: Vec) -> int:
        return self._index[vec_key(v)]

    def is_root(self, v: Vec) -> bool:
        return vec_key(v) in self._index

    def c_of(self, root: Vec):
        return self.mult[self.orbit_labels[vec_key(root)]]

    def label_of(self, root: Vec) -> str:
        return self.orbit_labels[vec_key(root)]

    def reflection_matrix(self, root: Vec):
        key = vec_key(root)
        mat = self._refl_cache.get(key)
        if mat is None:
            mat = reflection_matrix(root)
            self._refl_cache[key] = mat
        return mat

    def reflect(self, root: Vec, v: Vec) -> Vec:
        return reflect(root, v)

    def weyl_orbit(self, v: Vec):
        """Orbit of an ambient vector under the reflection group, as a
        deterministically ordered tuple."""
        seen = {vec_key(v): v}
        frontier = [v]
        while frontier:
            new = []
            for x in frontier:
                for s in self.simple_roots:
                    y = reflect(s, x)
                    k = vec_key(y)
                    if k not in seen:
                        seen[k] = y
                        new.append(y)
            frontier = new
        return tuple(seen[k] for k in sorted(seen))

    def coxeter_edges(self):
        """Edges (i, j, m) of the diagram on the simple roots, where m is the
        order of s_i s_j (only m > 2 listed)."""
        out = []
        simples = self.simple_roots
        for i in range(len(simples)):
            for j in range(i + 1, len(simples)):
                a, b = simples[i], simples[j]
                c2 = dot(a, b) * dot(a, b) / (dot(a, a) * dot(b, b))
                m_ord = None
                table = ((Fraction(0), 2), (Fraction(1, 4), 3),
                         (Fraction(1, 2), 4), (Fraction(3, 4), 6))
                for val, m_try in table:
                    if c2 == val:
                        m_ord = m_try
                        break
                if m_ord is None:
                    if c2 == (fs(3) + FieldScalar.sqrt(5)) * fs(Fraction(1, 8)):
                        m_ord = 5
                    else:
                        raise AssertionError("unrecognised diagram angle")
                if m_ord > 2:
                    out.append((i, j, m_ord))
        return out

    def simple_coordinates(self, v: Vec):
        """Coordinates of v in the simple-root basis (v must lie in their
        span)."""
        rows = [list(s) for s in self.simple_roots]
        if self._simple_gram_inv is None:
            gram = linalg.mat_mul(rows, linalg.transpose(rows))
            self._simple_gram_inv = linalg.inverse(gram)
        rhs = [dot(v, s) for s in self.simple_roots]
        coords = linalg.vec_mat(rhs, self._simple_gram_inv)
        recon = [_ZERO] * self.ambient_dim
        for c, s in zip(coords, self.simple_roots):
            recon = [r + c * x for r, x in zip(recon, s)]
        if not vec_is_zero(tuple(r - x for r, x in zip(recon, v))):
            raise ValueError("vector not in the span of the simple roots")
        return tuple(coords)


def _assign_orbit_labels(dim, simples, positives):
    """Partition the full root set into reflection-group orbits and assign
    deterministic labels."""
    all_roots = list(positives) + [tuple(-x for x in r) for r in positives]
    index = {vec_key(r): i for i, r in enumerate(all_roots)}
    assigned = {}
    orbits = []
    for r in all_roots:
        k = vec_key(r)
        if k in assigned:
            continue
        frontier = [r]
        members = {k}
        assigned[k] = len(orbits)
        while frontier:
            new = []
            for x in frontier:
                for s in simples:
                    y = reflect(s, x)
                    ky = vec_key(y)
                    if ky not in members:
                        if ky not in index:
                            raise AssertionError("root set not closed under "
                                                 "its own reflections")
                        members.add(ky)
                        assigned[ky] = len(orbits)
                        new.append(y)
            frontier = new
        orbits.append(members)
    norbits = len(orbits)
    order_of_orbit = {}
    nxt = 0
    scan = list(simples) + list(positives)
    for r in scan:
        oi = assigned[vec_key(r)]
        if oi not in order_of_orbit:
            order_of_orbit[oi] = nxt
            nxt += 1
    if norbits == 1:
        names = {0: "c"}
    else:
        names = {oi: f"c{order_of_orbit[oi] + 1}" for oi in order_of_orbit}
    return {k: names[oi] for k, oi in assigned.items()}


# ---------------------------------------------------------------------------
# strata
# ---------------------------------------------------------------------------


class Stratum:
    """A flat of the arrangement: the common fixed space of the mirrors of a
    set of roots, with a chosen tangent basis and an optional half-period
    imaginary shift.

    ``pi_basis`` rows span the tangent space; coordinates written in this
    basis are the stratum's working coordinates.  ``shift_units`` is a tuple
    of integers u so that the base point is x0 = sum_j y_j v_j + i*pi*u with
    the y_j treated as generic symbols."""

    def __init__(self, rs: RootSystem, pi_basis, gamma0=(), shift_units=None,
                 var_names=None, label="", meta=None):
        self.rs = rs
        self.pi_basis = tuple(tuple(FieldScalar.coerce(x) for x in v)
                              for v in pi_basis)
        if linalg.rank([list(v) for v in self.pi_basis]) != len(self.pi_basis):
            raise ValueError("stratum basis is linearly dependent")
        self.gamma0 = tuple(gamma0)
        self.shift_units = tuple(shift_units) if shift_units else \
            tuple(0 for _ in range(rs.ambient_dim))
        if len(self.shift_units) != rs.ambient_dim:
            raise ValueError("shift length mismatch")
        self.n = len(self.pi_basis)
        self.var_names = tuple(var_names) if var_names else \
            tuple(f"y{j + 1}" for j in range(self.n))
        if len(self.var_names) != self.n:
            raise ValueError("variable-name count mismatch")
        self.label = label
        self.meta = dict(meta or {})
        self._dual = None
        self._gram_inv = None
        self._proj = None
        for gi in self.gamma0:
            root = rs.simple_roots[gi]
            if not vec_is_zero(self.tangential_form(root)):
                raise ValueError(
                    "stratum basis is not orthogonal to the parabolic roots")

    @classmethod
    def from_gamma0(cls, rs: RootSystem, simple_indices, var_names=None,
                    label="", meta=None):
        """Stratum cut out by the mirrors of the chosen simple roots, with the
        tangent basis taken from the (rational echelon) nullspace."""
        idx = tuple(simple_indices)
        rows = [list(rs.simple_roots[i]) for i in idx]
        one = _ONE
        if not rows:
            basis = [list(_unit(i, rs.ambient_dim)) for i in
                     range(rs.ambient_dim)]
        else:
            basis = linalg.nullspace(rows, one)
        return cls(rs, [tuple(b) for b in basis], gamma0=idx,
                   var_names=var_names, label=label, meta=meta)

    # -- derived geometry --------------------------------------------------

    def gram_inverse(self):
        if self._gram_inv is None:
            gram = [[dot(u, v) for v in self.pi_basis] for u in self.pi_basis]
            self._gram_inv = linalg.inverse(gram)
        return self._gram_inv

    def dual_basis(self):
        """Vectors u_j in the tangent space with (u_i, v_j) = delta_ij."""
        if self._dual is None:
            ginv = self.gram_inverse()
            dual = []
            for i in range(self.n):
                acc = [_ZERO] * self.rs.ambient_dim
                for j in range(self.n):
                    acc = [a + ginv[i][j] * x
                           for a, x in zip(acc, self.pi_basis[j])]
                dual.append(tuple(acc))
            self._dual = tuple(dual)
        return self._dual

    def tangential_form(self, alpha: Vec):
        """The tuple ((alpha, v_1), ..., (alpha, v_n))."""
        return tuple(dot(alpha, v) for v in self.pi_basis)

    def projection_coords(self, alpha: Vec):
        """Coordinates (in the pi basis) of the orthogonal projection of
        alpha onto the tangent space."""
        rhs = self.tangential_form(alpha)
        ginv = self.gram_inverse()
        return tuple(linalg.vec_mat(list(rhs), ginv))

    def embed(self, coords) -> Vec:
        acc = [_ZERO] * self.rs.ambient_dim
        for c, v in zip(coords, self.pi_basis):
            c = FieldScalar.coerce(c) if not hasattr(c, "nvars") else c
            acc = [a + c * x for a, x in zip(acc, v)]
        return tuple(acc)

    def shift_pairing(self, alpha: Vec) -> int:
        """(alpha, u) for the integer shift vector u; must be an integer."""
        acc = _ZERO
        for a, s in zip(alpha, self.shift_units):
            if s:
                acc = acc + a * fs(s)
            # zero shifts contribute nothing
        frac = _as_fraction(acc)
        if frac is None or frac.denominator != 1:
            raise ValueError("shift pairing is not an integer; the shift "
                             "vector is incompatible with this root system")
        return int(frac)

    def is_affine(self) -> bool:
        return any(self.shift_units)

    # -- projection --------------------------------------------------------

    def project(self) -> "ProjectedSystem":
        if self._proj is None:
            self._proj = ProjectedSystem(self)
        return self._proj

    def singular_root_indices(self):
        """Indices (into rs.roots) of roots whose mirror/level set contains
        the whole (shifted) stratum."""
        out = []
        for i, r in enumerate(self.rs.roots):
            if not all(x == 0 for x in self.tangential_form(r)):
                continue
            if self.is_affine() and self.shift_pairing(r) % 2 != 0:
                continue
            out.append(i)
        return tuple(out)


def _as_fraction(x: FieldScalar):
    data = x.to_json()["terms"]
    if not data:
        return Fraction(0)
    if len(data) == 1 and not data[0]["primes"]:
        return Fraction(data[0]["num"], data[0]["den"])
    return None


class ProjEntry:
    """One projected root class: a nonzero projection direction together with
    its half-period sign class, the contributing roots, and the aggregated
    multiplicity."""

    __slots__ = ("coords", "ahat", "t", "root_indices", "chat", "norm")

    def __init__(self, coords, ahat, t, root_indices, chat):
        self.coords = coords
        self.ahat = ahat
        self.t = t
        self.root_indices = tuple(root_indices)
        self.chat = chat
        self.norm = dot(ahat, ahat)

    def __repr__(self):
        cs = ",".join(str(c) for c in self.coords)
        return f"ProjEntry(({cs}); t={self.t}; fibre={len(self.root_indices)})"


class ProjectedSystem:
    """Projection of the positive roots onto a stratum.

    ``entries``: classes with nonzero projection, keyed by exact projection
    coordinates and sign class.  ``const_entries``: classes with zero
    projection but odd shift pairing (present only for shifted strata; they
    carry no y-dependence).  ``fixed_indices``: positive roots vanishing
    identically on the stratum (excluded from all projected data)."""

    def __init__(self, stratum: Stratum):
        self.stratum = stratum
        rs = stratum.rs
        groups = {}
        const_groups = {}
        fixed = []
        affine = stratum.is_affine()
        for i, r in enumerate(rs.positive_roots):
            coords = stratum.projection_coords(r)
            t = stratum.shift_pairing(r) % 2 if affine else 0
            if all(c == 0 for c in coords):
                if t == 0:
                    fixed.append(i)
                else:
                    const_groups.setdefault((), []).append(i)
                continue
            key = (tuple(_fs_key(c) for c in coords), t)
            groups.setdefault(key, (coords, t, []))[2].append(i)
        entries = []
        for key in sorted(groups):
            coords, t, idxs = groups[key]
            ahat = stratum.embed(coords)
            chat = _sum_mult(rs, idxs)
            entries.append(ProjEntry(coords, ahat, t, idxs, chat))
        self.entries = tuple(entries)
        const_entries = []
        for key in sorted(const_groups):
            idxs = const_groups[key]
            chat = _sum_mult(rs, idxs)
            zero_coords = tuple(_ZERO for _ in range(stratum.n))
            const_entries.append(
                ProjEntry(zero_coords, stratum.embed(zero_coords), 1, idxs,
                          chat))
        self.const_entries = tuple(const_entries)
        self.fixed_indices = tuple(fixed)

    def entry_for(self, coords, t=0):
        key = tuple(_fs_key(FieldScalar.coerce(c)) for c in coords)
        for e in self.entries:
            if tuple(_fs_key(c) for c in e.coords) == key and e.t == t:
                return e
        raise KeyError(f"no projected class with coordinates {coords}, t={t}")

    def lines(self):
        """Group entry indices by proportionality of the projection direction
        (ignoring the sign class)."""
        buckets = {}
        order = []
        for idx, e in enumerate(self.entries):
            lead = None
            for c in e.coords:
                if not (c == 0):
                    lead = c
                    break
            normed = tuple(c / lead for c in e.coords)
            key = tuple(_fs_key(c) for c in normed)
            if key not in buckets:
                buckets[key] = []
                order.append(key)
            buckets[key].append(idx)
        return [buckets[k] for k in order]


def _sum_mult(rs: RootSystem, idxs):
    acc = None
    for i in idxs:
        c = rs.c_of(rs.positive_roots[i])
        acc = c if acc is None else acc + c
    return acc


# ---------------------------------------------------------------------------
# the invariance condition
# ---------------------------------------------------------------------------


class ComponentReport:
    """One connected component of the singular subsystem of a stratum, with
    its quadratic-form equations.

    Each equation is (coeffs, rhs): coeffs maps orbit labels to exact
    scalars, and the condition is sum_lab coeffs[lab] * c_lab == rhs."""

    __slots__ = ("root_indices", "basis", "equations")

    def __init__(self, root_indices, basis, equations):
        self.root_indices = tuple(root_indices)
        self.basis = tuple(basis)
        self.equations = tuple(equations)


class InvarianceReport:
    def __init__(self, stratum: Stratum, components):
        self.stratum = stratum
        self.components = tuple(components)

    def check(self, mult=None):
        """Evaluate every equation at the given (or the root system's own)
        multiplicity values.  Returns (ok, witnesses); each witness is a dict
        naming the component, equation, and both sides."""
        rs = self.stratum.rs
        values = dict(rs.mult if mult is None else mult)
        template = None
        for v in values.values():
            if isinstance(v, RatFunc):
                template = v
                break
        witnesses = []
        for ci, comp in enumerate(self.components):
            for ei, (coeffs, rhs) in enumerate(comp.equations):
                lhs = None
                for lab, coeff in sorted(coeffs.items()):
                    term = values[lab] * coeff
                    if template is not None and isinstance(term, FieldScalar):
                        term = _lift_like(template, term)
                    lhs = term if lhs is None else lhs + term
                if lhs is None:
                    lhs = _ZERO if template is None else \
                        _lift_like(template, _ZERO)
                diff = lhs - rhs if isinstance(lhs, FieldScalar) else \
                    lhs - _lift_like(lhs, rhs)
                if not _ring_is_zero(diff):
                    witnesses.append({
                        "component": ci,
                        "equation": ei,
                        "coefficients": {lab: str(c)
                                         for lab, c in coeffs.items()},
                        "lhs": str(lhs),
                        "rhs": str(rhs),
                    })
        return (not witnesses), witnesses

    def solve(self):
        """Solve the equations for the orbit multiplicities over the exact
        scalar field.  Returns (status, data): status "unique" with a
        label->value dict, "underdetermined" with the echelon relations, or
        "inconsistent" with a witness row."""
        labels = sorted({lab for comp in self.components
                         for coeffs, _ in comp.equations
                         for lab in coeffs})
        rows = []
        for comp in self.components:
            for coeffs, rhs in comp.equations:
                row = [coeffs.get(lab, _ZERO) for lab in labels] + [rhs]
                rows.append(row)
        if not rows:
            return "underdetermined", {"labels": labels, "relations": []}
        ech, pivots = linalg.rref(rows)
        ncols = len(labels)
        for row in ech:
            if all(row[j] == 0 for j in range(ncols)) and not (row[ncols] == 0):
                return "inconsistent", {"labels": labels,
                                        "row": [str(x) for x in row]}
        if len([p for p in pivots if p < ncols]) == ncols:
            sol = {}
            for row, p in zip(ech, pivots):
                if p < ncols:
                    sol[labels[p]] = row[ncols]
            return "unique", sol
        relations = []
        for row, p in zip(ech, pivots):
            if p < ncols:
                relations.append(([str(x) for x in row[:ncols]],
                                  str(row[ncols])))
        return "underdetermined", {"labels": labels, "relations": relations}


def _lift_like(template, scalar: FieldScalar):
    """Lift an exact scalar into the ring of a symbolic template value."""
    if isinstance(template, RatFunc):
        one = template.one_coeff
        from .scalars.poly import Poly
        return RatFunc.from_poly(Poly.const(template.num.nvars, one * scalar),
                                 one)
    return scalar


def _ring_is_zero(x) -> bool:
    if isinstance(x, FieldScalar):
        return x == 0
    if isinstance(x, RatFunc):
        return not x.num.coeffs
    return x == 0


def invariance_condition(stratum: Stratum) -> InvarianceReport:
    """The bilinear admissibility condition for a stratum.

    Roots whose mirror (or shifted level set) contains the whole stratum are
    grouped into connected components by non-orthogonality; on each
    component's span the weighted sum of rank-one forms
    c_alpha (alpha, u)(alpha, v)/(alpha, alpha) must equal the inner product
    (u, v).  Equations are produced for a basis of each span, with the
    multiplicities kept symbolic as orbit labels."""
    rs = stratum.rs
    sing = stratum.singular_root_indices()
    roots = [rs.roots[i] for i in sing]
    # connected components under non-orthogonality
    comp_of = {}
    comps = []
    for pos, r in enumerate(roots):
        if pos in comp_of:
            continue
        cid = len(comps)
        stack = [pos]
        comp_of[pos] = cid
        members = [pos]
        while stack:
            a = stack.pop()
            for b, rb in enumerate(roots):
                if b in comp_of:
                    continue
                if not (dot(roots[a], rb) == 0):
                    comp_of[b] = cid
                    members.append(b)
                    stack.append(b)
        comps.append(members)
    reports = []
    for members in comps:
        member_roots = [roots[p] for p in members]
        ech, pivots = linalg.rref([list(r) for r in member_roots])
        basis = [tuple(row) for row, p in zip(ech, pivots)
                 if p < rs.ambient_dim and not vec_is_zero(tuple(row))]
        equations = []
        for i in range(len(basis)):
            for j in range(i, len(basis)):
                coeffs = {}
                for r in member_roots:
                    lab = rs.label_of(r)
                    val = dot(r, basis[i]) * dot(r, basis[j]) / dot(r, r)
                    coeffs[lab] = coeffs.get(lab, _ZERO) + val
                coeffs = {lab: v for lab, v in coeffs.items() if not (v == 0)}
                rhs = dot(basis[i], basis[j])
                equations.append((coeffs, rhs))
        reports.append(ComponentReport([sing[p] for p in members], basis,
                                       equations))
    return InvarianceReport(stratum, reports)


def stratum_a_family(m: int, k: int, n: int, c=None) -> Stratum:
    """The type-A family stratum: m blocks of k equal coordinates followed by
    n free coordinates in ambient dimension N = m*k + n.  The tangent basis
    is orthonormal: each block direction is normalised by 1/sqrt(k).  The
    multiplicity defaults to 1/k (the value admitting the stratum)."""
    if m < 1 or k < 1 or n < 0:
        raise ValueError("need m >= 1, k >= 1, n >= 0")
    big_n = m * k + n
    if big_n < 2:
        raise ValueError("ambient dimension must be at least 2")
    mult = {"c": Fraction(1, k) if c is None else c}
    rs = RootSystem.build("A", big_n - 1, multiplicities=mult)
    gamma0 = [j * k + i for j in range(m) for i in range(k - 1)]
    inv_sqrt_k = FieldScalar.sqrt(Fraction(1, k))
    basis = []
    for j in range(m):
        v = [_ZERO] * big_n
        for p in range(j * k, (j + 1) * k):
            v[p] = inv_sqrt_k
        basis.append(tuple(v))
    for i in range(n):
        basis.append(_unit(m * k + i, big_n))
    return Stratum(rs, basis, gamma0=gamma0,
                   label=f"A(m={m},k={k},n={n})",
                   meta={"family": "A", "m": m, "k": k, "n": n})


def stratum_b_family(m: int, k: int, l: int, n: int = 0,
                     c1=None, c2=None) -> Stratum:
    """The type-B family stratum: m blocks of k equal coordinates, n free
    coordinates, and l trailing coordinates pinned to zero, in ambient
    dimension N = m*k + n + l.  The tangent basis is orthonormal (block
    directions normalised by 1/sqrt(k)).

    Multiplicity defaults pick a point on the admissible locus:
      * k > 1 forces c1 = 1/k; with l > 0 additionally c2 = 1/2 - (l-1)/k,
        while l = 0 leaves c2 free (default 1/2).
      * k = 1 with l > 0 needs 2*c1*(l-1) + 2*c2 = 1 (default c1 = 1, then
        c2 = 1/2 - (l-1)); l = 0 imposes nothing (defaults 1, 1/2).
    Pass c1/c2 explicitly (numbers or symbols) to override."""
    if m < 0 or k < 1 or l < 0 or n < 0:
        raise ValueError("need m >= 0, k >= 1, l >= 0, n >= 0")
    big_n = m * k + n + l
    if big_n < 2:
        raise ValueError("ambient dimension must be at least 2")
    if c1 is None:
        c1 = Fraction(1, k) if k > 1 else Fraction(1)
    if c2 is None:
        if l > 0:
            c2 = Fraction(1, 2) - Fraction(l - 1, k)
        else:
            c2 = Fraction(1, 2)
    mult = {"c1": c1, "c2": c2}
    rs = RootSystem.build("B", big_n, multiplicities=mult)
    gamma0 = [j * k + i for j in range(m) for i in range(k - 1)]
    if l > 0:
        gamma0.extend(range(big_n - l, big_n))
    inv_sqrt_k = FieldScalar.sqrt(Fraction(1, k))
    basis = []
    for j in range(m):
        v = [_ZERO] * big_n
        for p in range(j * k, (j + 1) * k):
            v[p] = inv_sqrt_k
        basis.append(tuple(v))
    for i in range(n):
        basis.append(_unit(m * k + i, big_n))
    return Stratum(rs, basis, gamma0=gamma0,
                   label=f"B(m={m},k={k},l={l},n={n})",
                   meta={"family": "B", "m": m, "k": k, "l": l, "n": n})


def table_scan(rs: RootSystem, max_gamma_size=None):
    """Enumerate subsets of the simple roots, and for each stratum report the
    solvability of the invariance condition for symbolic multiplicities.

    Returns a list of dicts with the subset, the diagram components, and the
    solve() outcome.  Subsets whose condition is inconsistent are admissible
    for no multiplicity values; "unique"/"underdetermined" rows give the
    admissible values."""
    nsimple = len(rs.simple_roots)
    limit = max_gamma_size if max_gamma_size is not None else nsimple
    out = []
    for size in range(1, limit + 1):
        for subset in itertools.combinations(range(nsimple), size):
            stratum = Stratum.from_gamma0(rs, subset)
            if stratum.n == 0:
                continue
            report = invariance_condition(stratum)
            status, data = report.solve()
            out.append({
                "subset": subset,
                "n_components": len(report.components),
                "status": status,
                "data": data,
            })
    return out
