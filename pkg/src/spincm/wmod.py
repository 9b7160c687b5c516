"""Right modules over the reflection group, their invariant subspaces, and
the deformed reflection matrices acting on them.

Conventions
-----------
* Module elements are row vectors; the group acts on the right, and the
  matrix assigned to a word s_{i1} s_{i2} ... is the product
  R_{i1} R_{i2} ... in the same order, so that u -> u . R_w satisfies
  u . R_v . R_w = u . R_{vw}.
* All generator matrices are verified to satisfy the defining relations of
  the diagram (involutivity and braid relations) at construction time.
* The matrix of the reflection in an arbitrary root is obtained from a word
  in the simple reflections by the standard descent recursion and cached.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from . import linalg
from .rootsys import RootSystem, Stratum, ProjectedSystem, dot, reflect, vec_key
from .scalars.field import FieldScalar
from .scalars.poly import Poly
from .scalars.ratfunc import RatFunc

_ZERO = FieldScalar()
_ONE = FieldScalar.rational(1)


class RelationError(ValueError):
    """A proposed set of generator matrices violates the diagram relations."""


class ZeroMultiplicityError(ZeroDivisionError):
    """A deformed reflection was requested for a class whose aggregated
    multiplicity vanishes."""


def _braid_product(a, b, m):
    """(a b a b ...) with m factors."""
    mats = [a, b] * ((m + 1) // 2)
    prod = mats[0]
    for x in mats[1:m]:
        prod = linalg.mat_mul(prod, x)
    return prod


class WModule:
    """A right module over the reflection group of a root system."""

    def __init__(self, rs: RootSystem, gen_mats, kind: str, meta=None,
                 check: bool = True):
        self.rs = rs
        self.gen_mats = [[[FieldScalar.coerce(x) for x in row] for row in m]
                         for m in gen_mats]
        if len(self.gen_mats) != len(rs.simple_roots):
            raise ValueError("one generator matrix per simple root required")
        self.dim = len(self.gen_mats[0]) if self.gen_mats else 0
        self.kind = kind
        self.meta = dict(meta or {})
        self._refl_cache = {}
        self._word_cache = {}
        if check:
            self._check_relations()

    # -- construction-time checks -----------------------------------------

    def _check_relations(self):
        ident = linalg.identity(self.dim, _ONE)
        for i, m in enumerate(self.gen_mats):
            if not linalg.mat_eq(linalg.mat_mul(m, m), ident):
                raise RelationError(f"generator {i} is not an involution")
        orders = {}
        for i, j, m_ord in self.rs.coxeter_edges():
            orders[(i, j)] = m_ord
        n = len(self.gen_mats)
        for i in range(n):
            for j in range(i + 1, n):
                m_ord = orders.get((i, j), 2)
                lhs = _braid_product(self.gen_mats[i], self.gen_mats[j], m_ord)
                rhs = _braid_product(self.gen_mats[j], self.gen_mats[i], m_ord)
                if not linalg.mat_eq(lhs, rhs):
                    raise RelationError(
                        f"braid relation of order {m_ord} fails for "
                        f"generators {i}, {j}")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def trivial(rs: RootSystem, r: int = 1) -> "WModule":
        ident = linalg.identity(r, _ONE)
        return WModule(rs, [ident for _ in rs.simple_roots], "trivial",
                       check=False)

    @staticmethod
    def reflection(rs: RootSystem) -> "WModule":
        mats = [rs.reflection_matrix(s) for s in rs.simple_roots]
        return WModule(rs, mats, "reflection")

    @staticmethod
    def tensor_power(rs: RootSystem, r: int) -> "WModule":
        """U = (C^r)^(tensor N) for the symmetric group acting on N ambient
        coordinates by permuting tensor factors; requires a type-A system."""
        if rs.family != "A":
            raise ValueError("tensor_power modules require a type A system")
        n_fac = rs.ambient_dim
        dim = r ** n_fac
        mats = []
        for idx, s in enumerate(rs.simple_roots):
            a, b = idx, idx + 1  # s swaps ambient coordinates a, b (0-based)
            rows = [[_ZERO] * dim for _ in range(dim)]
            for code in range(dim):
                digits = _digits(code, r, n_fac)
                digits[a], digits[b] = digits[b], digits[a]
                rows[code][_code(digits, r)] = _ONE
            mats.append(rows)
        return WModule(rs, mats, "tensor_power", meta={"r": r, "N": n_fac})

    @staticmethod
    def polynomial_span(rs: RootSystem, generators) -> "WModule":
        """Module spanned by the given polynomials in the ambient
        coordinates; the action substitutes the reflection into each spanning
        polynomial and re-expresses it in the given basis."""
        gens = list(generators)
        if not gens:
            raise ValueError("empty generator set")
        nv = rs.ambient_dim
        support = sorted({k for g in gens for k in g.coeffs},
                         key=lambda k: (sum(k), k))
        basis_rows = [[g.coeffs.get(k, _ZERO) for k in support] for g in gens]
        if linalg.rank(basis_rows) != len(gens):
            raise ValueError("spanning polynomials are linearly dependent")
        mats = []
        for s in rs.simple_roots:
            m_s = rs.reflection_matrix(s)
            rows = []
            for g in gens:
                mapping = {i: Poly.linear_form([m_s[i][j] for j in range(nv)])
                           for i in range(nv)}
                image = g.substitute(mapping, nv, _ONE)
                coords = _express_in_span(image, basis_rows, support)
                if coords is None:
                    raise ValueError(
                        "the span of the given polynomials is not closed "
                        "under the group action")
                rows.append(coords)
            mats.append(rows)
        return WModule(rs, mats, "polynomial_span",
                       meta={"generators": gens, "support": support})

    @staticmethod
    def regular(rs: RootSystem) -> "WModule":
        """The regular representation: basis indexed by the group elements,
        generators acting by right multiplication."""
        elements, _words, succ = enumerate_group(rs)
        size = len(elements)
        mats = []
        for gi in range(len(rs.simple_roots)):
            rows = [[_ZERO] * size for _ in range(size)]
            for ei in range(size):
                rows[ei][succ[ei][gi]] = _ONE
            mats.append(rows)
        return WModule(rs, mats, "regular", meta={"order": size}, check=False)

    # -- group-element matrices -------------------------------------------

    def word_matrix(self, word):
        """Matrix of the element with the given word (tuple of simple-root
        indices), as a right action: R_{s_{i1} s_{i2} ...} = R_{i1} R_{i2} ..."""
        word = tuple(word)
        if word in self._word_cache:
            return self._word_cache[word]
        m = linalg.identity(self.dim, _ONE)
        for i in word:
            m = linalg.mat_mul(m, self.gen_mats[i])
        self._word_cache[word] = m
        return m

    def action_of_reflection(self, root):
        """Matrix of the reflection in the given root."""
        key = vec_key(root)
        m = self._refl_cache.get(key)
        if m is None:
            word = reflection_word(self.rs, root)
            m = self.word_matrix(word)
            self._refl_cache[key] = m
        return m


def _digits(code: int, r: int, n: int):
    out = []
    for _ in range(n):
        out.append(code % r)
        code //= r
    return out


def _code(digits, r: int) -> int:
    code = 0
    for d in reversed(digits):
        code = code * r + d
    return code


def _express_in_span(poly: Poly, basis_rows, support):
    """Coordinates of a polynomial in the row space of basis_rows (columns
    indexed by the fixed monomial support), or None if outside."""
    vec = [poly.coeffs.get(k, _ZERO) for k in support]
    if any(k not in set(support) for k in poly.coeffs):
        return None
    # solve x . basis = vec  <=>  basis^T x^T = vec^T
    bt = linalg.transpose(basis_rows)
    rows = [list(bt[i]) + [vec[i]] for i in range(len(bt))]
    ech, pivots = linalg.rref(rows)
    ncols = len(basis_rows)
    sol = [_ZERO] * ncols
    for row, p in zip(ech, pivots):
        if p == ncols:
            return None  # inconsistent
        if p < ncols:
            sol[p] = row[ncols]
    # verify (guards against free variables hiding inconsistency)
    for i in range(len(bt)):
        acc = _ZERO
        for j in range(ncols):
            acc = acc + bt[i][j] * sol[j]
        if not (acc == vec[i]):
            return None
    return sol


def reflection_word(rs: RootSystem, root) -> tuple:
    """A word in the simple reflections for the reflection in the given
    (positive or negative) root, via the descent recursion."""
    v = tuple(FieldScalar.coerce(x) for x in root)
    # work with the positive representative
    if not rs.is_root(v):
        raise ValueError("not a root of the system")
    idx = rs.root_index(v)
    if idx >= len(rs.positive_roots):
        v = rs.roots[idx - len(rs.positive_roots)]
    for i, s in enumerate(rs.simple_roots):
        if vec_key(v) == vec_key(s):
            return (i,)
    for i, s in enumerate(rs.simple_roots):
        pairing = dot(v, s)
        if pairing.sign() > 0:
            image = reflect(s, v)
            inner = reflection_word(rs, image)
            return (i,) + inner + (i,)
    raise AssertionError("positive root with no positive simple pairing")


def enumerate_group(rs: RootSystem):
    """Enumerate the reflection group by BFS over the simple generators.

    Returns (elements, words, succ): ambient row-action matrices for each
    element, a word for each, and succ[e][g] = index of (element . s_g)
    composed as right multiplication."""
    n = len(rs.simple_roots)
    gens = [rs.reflection_matrix(s) for s in rs.simple_roots]
    ident = linalg.identity(rs.ambient_dim, _ONE)

    def mkey(m):
        return tuple(vec_key(tuple(row)) for row in m)

    elements = [ident]
    words = [()]
    index = {mkey(ident): 0}
    frontier = [0]
    succ_map = {}
    while frontier:
        new_frontier = []
        for ei in frontier:
            for gi in range(n):
                # right multiplication by the generator: w . s
                m = linalg.mat_mul(elements[ei], gens[gi])
                k = mkey(m)
                if k not in index:
                    index[k] = len(elements)
                    elements.append(m)
                    words.append(words[ei] + (gi,))
                    new_frontier.append(index[k])
                succ_map[(ei, gi)] = index[k]
        frontier = new_frontier
    succ = [[succ_map[(ei, gi)] for gi in range(n)]
            for ei in range(len(elements))]
    return elements, words, succ


# ---------------------------------------------------------------------------
# invariant subspaces
# ---------------------------------------------------------------------------


class InvariantSubspace:
    """The subspace of a module fixed by the parabolic generators of a
    stratum, with inclusion and projection maps."""

    def __init__(self, module: WModule, gamma0):
        self.module = module
        self.gamma0 = tuple(gamma0)
        dim = module.dim
        eq_rows = []
        for gi in self.gamma0:
            m = module.gen_mats[gi]
            for j in range(dim):
                row = [m[i][j] - (_ONE if i == j else _ZERO)
                       for i in range(dim)]
                if not all(x == 0 for x in row):
                    eq_rows.append(row)
        if eq_rows:
            basis = linalg.nullspace(eq_rows, _ONE)
        else:
            basis = [list(r) for r in linalg.identity(dim, _ONE)]
        self.basis = [tuple(b) for b in basis]
        self.dim = len(self.basis)
        if self.dim:
            b = [list(r) for r in self.basis]
            gram = linalg.mat_mul(b, linalg.transpose(b))
            self._proj = linalg.mat_mul(linalg.transpose(b),
                                        linalg.inverse(gram))
        else:
            self._proj = []
        # verify fixedness (construction-time invariant)
        for gi in self.gamma0:
            m = module.gen_mats[gi]
            for u in self.basis:
                if list(linalg.vec_mat(list(u), m)) != list(u):
                    raise AssertionError("invariant basis is not fixed")

    @classmethod
    def from_stratum(cls, module: WModule, stratum: Stratum):
        return cls(module, stratum.gamma0)

    def include(self, small):
        """Row vector on the invariant basis -> row vector in the module."""
        out = [_ZERO] * self.module.dim
        for c, b in zip(small, self.basis):
            out = [o + c * x for o, x in zip(out, b)]
        return tuple(out)

    def project(self, big):
        """Row vector in the module -> coordinates on the invariant basis
        (exact for vectors in the subspace)."""
        return tuple(linalg.vec_mat(list(big), self._proj))

    def compress(self, mat):
        """Restrict an endomorphism that preserves the subspace to the
        invariant basis (entries may be symbolic)."""
        rows = []
        for b in self.basis:
            image = _vec_mat_generic(list(b), mat)
            rows.append(_project_generic(image, self._proj))
        return rows


def _vec_mat_generic(v, m):
    """Row-vector times matrix where entries may live in mixed rings."""
    ncols = len(m[0]) if m else 0
    out = []
    for j in range(ncols):
        acc = None
        for i, vi in enumerate(v):
            term = vi * m[i][j]
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def _project_generic(v, proj):
    ncols = len(proj[0]) if proj else 0
    out = []
    for j in range(ncols):
        acc = None
        for i, vi in enumerate(v):
            term = vi * proj[i][j]
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


# ---------------------------------------------------------------------------
# deformed reflection operators
# ---------------------------------------------------------------------------


def _character_value(module: WModule, chi, root):
    if chi is None:
        return None
    word = reflection_word(module.rs, root)
    val = 1
    for i in word:
        val *= chi[i]
    return val


def validate_character(rs: RootSystem, chi) -> None:
    """chi maps simple-root indices to +-1; it must be constant on simple
    pairs joined by an odd-order edge."""
    for i, j, m_ord in rs.coxeter_edges():
        if m_ord % 2 == 1 and chi[i] != chi[j]:
            raise ValueError("character values must agree on generators "
                             f"joined by an odd edge ({i}, {j})")
    for i, v in chi.items():
        if v not in (1, -1):
            raise ValueError("character values must be +-1")


def p_hat(module: WModule, inv: InvariantSubspace, proj: ProjectedSystem,
          ahat, t: int = 0, chi=None):
    """The deformed reflection matrix of a projected class, restricted to the
    invariant subspace.

    ``ahat`` may be a ProjEntry, projection coordinates (tuple), or an
    ambient vector lying in the stratum's tangent space.  With a character
    ``chi`` (dict: simple index -> +-1), each reflection action P is replaced
    by chi(s) P."""
    entry = _resolve_entry(proj, ahat, t)
    if chi is not None:
        validate_character(module.rs, chi)
    chat = entry.chat
    if _is_zero_value(chat):
        raise ZeroMultiplicityError(
            "aggregated multiplicity vanishes for this projected class; the "
            "deformed reflection is undefined")
    rs = module.rs
    norm = entry.norm
    dim = module.dim
    acc = None
    for i in entry.root_indices:
        gamma = rs.positive_roots[i]
        plain = rs.c_of(gamma) * dot(gamma, gamma)
        # the character twist multiplies the reflection action only; the
        # identity part keeps its plain multiplicity
        p_scale = plain
        if chi is not None:
            p_scale = plain * Fraction(_character_value(module, chi, gamma))
        p_mat = module.action_of_reflection(gamma)
        term = [[p_scale * p_mat[a][b] - (plain if a == b else p_scale * _ZERO)
                 for b in range(dim)] for a in range(dim)]
        acc = term if acc is None else [
            [acc[a][b] + term[a][b] for b in range(dim)] for a in range(dim)]
    inv_factor = _invert_value(chat * norm)
    out = [[acc[a][b] * inv_factor + (_ONE if a == b else _ZERO)
            for b in range(dim)] for a in range(dim)]
    return inv.compress(out)


def _resolve_entry(proj: ProjectedSystem, ahat, t: int):
    from .rootsys import ProjEntry
    if isinstance(ahat, ProjEntry):
        return ahat
    if isinstance(ahat, (tuple, list)) and ahat and \
            not isinstance(ahat[0], (tuple, list)):
        stratum = proj.stratum
        if len(ahat) == stratum.rs.ambient_dim and \
                len(ahat) != stratum.n:
            coords = stratum.projection_coords(tuple(
                FieldScalar.coerce(x) for x in ahat))
        else:
            coords = tuple(FieldScalar.coerce(x) for x in ahat)
        return proj.entry_for(coords, t)
    raise TypeError("ahat must be a ProjEntry, coordinates, or a vector")


def _is_zero_value(x) -> bool:
    if isinstance(x, FieldScalar):
        return x == 0
    if isinstance(x, RatFunc):
        return x.is_zero
    return not x


def _invert_value(x):
    if isinstance(x, FieldScalar):
        return x.inverse()
    return x.inverse() if hasattr(x, "inverse") else Fraction(1) / x


def s_hat_matrix(module: WModule, proj: ProjectedSystem, ahat, t: int = 0):
    """The weighted fibre sum S = sum_fibre c_gamma (gamma, gamma) s_gamma
    in the module's matrix representation."""
    entry = _resolve_entry(proj, ahat, t)
    rs = module.rs
    dim = module.dim
    acc = None
    for i in entry.root_indices:
        gamma = rs.positive_roots[i]
        scale = rs.c_of(gamma) * dot(gamma, gamma)
        p_mat = module.action_of_reflection(gamma)
        term = [[scale * p_mat[a][b] for b in range(dim)] for a in range(dim)]
        acc = term if acc is None else [
            [acc[a][b] + term[a][b] for b in range(dim)] for a in range(dim)]
    return acc


def check_centralizer(module: WModule, proj: ProjectedSystem, ahat,
                      t: int = 0) -> bool:
    """Verify that the weighted fibre sum commutes with every parabolic
    generator of the stratum in this module."""
    s_mat = s_hat_matrix(module, proj, ahat, t)
    for gi in proj.stratum.gamma0:
        g = module.gen_mats[gi]
        left = _mat_mul_generic(g, s_mat)
        right = _mat_mul_generic(s_mat, g)
        for a in range(module.dim):
            for b in range(module.dim):
                if not _is_zero_value(left[a][b] - right[a][b]):
                    return False
    return True


def _mat_mul_generic(a, b):
    n, k = len(a), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(k):
            acc = None
            for l in range(len(b)):
                term = a[i][l] * b[l][j]
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# block transposition sums for the type-A family strata
# ---------------------------------------------------------------------------


def tilde_p(module: WModule, stratum: Stratum, i: int, j: int):
    """Block sums of transposition actions for a type-A family stratum with
    m blocks of size k and n single coordinates (1-based i < j <= m+n):
    single-single pairs give one transposition, block-single pairs sum over
    the block, and block-block pairs sum over both blocks."""
    meta = stratum.meta
    if meta.get("family") != "A":
        raise ValueError("tilde_p requires a type-A family stratum")
    m, k, n = meta["m"], meta["k"], meta["n"]
    if not (1 <= i < j <= m + n):
        raise IndexError("indices out of range")
    rs = module.rs
    nv = rs.ambient_dim

    def transposition(a: int, b: int):
        root = tuple(
            _ONE if p == a - 1 else (-_ONE if p == b - 1 else _ZERO)
            for p in range(nv))
        return module.action_of_reflection(root)

    if i >= m + 1:
        return transposition(m * (k - 1) + i, m * (k - 1) + j)
    if j >= m + 1:
        acc = None
        for r in range((i - 1) * k + 1, i * k + 1):
            t_mat = transposition(r, m * (k - 1) + j)
            acc = t_mat if acc is None else linalg.mat_add(acc, t_mat)
        return acc
    acc = None
    for r in range((i - 1) * k + 1, i * k + 1):
        for s in range((j - 1) * k + 1, j * k + 1):
            t_mat = transposition(r, s)
            acc = t_mat if acc is None else linalg.mat_add(acc, t_mat)
    return acc


# ---------------------------------------------------------------------------
# the diagonal action on vector-valued polynomials
# ---------------------------------------------------------------------------


def act_diagonal(module: WModule, word, vpoly):
    """Action of the group element w with the given word on a vector-valued
    polynomial F (a list of Poly over the ambient coordinates):
    (w F)(x) = F(w^{-1} x) . w^{-1}."""
    rs = module.rs
    nv = rs.ambient_dim
    # For w = s_{i1}...s_{il} and symmetric generator matrices M, the row
    # matrix of the point map x -> w^{-1} x is the product M_{i1}...M_{il}
    # in word order (w x = x . M_{il}...M_{i1}, and inverting reverses it).
    amb = linalg.identity(nv, _ONE)
    for gi in word:
        amb = linalg.mat_mul(amb, rs.reflection_matrix(rs.simple_roots[gi]))
    # (w^{-1} x)_i = sum_j x_j amb[j][i]: substitute column i for variable i
    mapping = {i: Poly.linear_form([amb[j][i] for j in range(nv)])
               for i in range(nv)}
    transformed = [p.substitute(mapping, nv, _ONE) for p in vpoly]
    r_inv = module.word_matrix(tuple(reversed(word)))
    dim = module.dim
    out = []
    for b in range(dim):
        acc = Poly.zero(nv)
        for a in range(dim):
            if not transformed[a].is_zero:
                acc = acc + transformed[a] * r_inv[a][b]
        out.append(acc)
    return out


def diagonal_average(module: WModule, vpoly):
    """The invariant projection (1/|W|) sum_w of the diagonal action."""
    _elements, words, _succ = enumerate_group(module.rs)
    nv = module.rs.ambient_dim
    dim = module.dim
    total = [Poly.zero(nv) for _ in range(dim)]
    for word in words:
        image = act_diagonal(module, word, vpoly)
        total = [t + im for t, im in zip(total, image)]
    scale = Fraction(1, len(words))
    return [t.map_coeffs(lambda c: c * scale) for t in total]
