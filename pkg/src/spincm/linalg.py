"""Small exact linear algebra over any field-like scalar ring.

Vectors are tuples, matrices are tuples of row tuples.  Column-vector
convention for geometry (w acting on points); the representation modules use
row vectors acted on the right and say so locally.
"""

from __future__ import annotations

from typing import Sequence

from .scalars.poly import invert_scalar


def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ValueError("dimension mismatch in dot product")
    total = None
    for a, b in zip(u, v):
        p = a * b
        total = p if total is None else total + p
    return total


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(u, c):
    return tuple(a * c for a in u)


def vec_neg(u):
    return tuple(-a for a in u)


def vec_is_zero(u) -> bool:
    return all(not a for a in u)


def mat_vec(m, v):
    """Column convention: (m v)_i = sum_j m[i][j] v[j]."""
    return tuple(dot(row, v) for row in m)


def vec_mat(v, m):
    """Row convention: (v m)_j = sum_i v[i] m[i][j]."""
    n = len(m[0])
    return tuple(dot(v, tuple(row[j] for row in m)) for j in range(n))


def mat_mul(a, b):
    bt = tuple(zip(*b))
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def mat_add(a, b):
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def mat_scale(a, c):
    return tuple(tuple(x * c for x in row) for row in a)


def identity(n: int, one):
    zero = one - one
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


def transpose(a):
    return tuple(zip(*a))


def mat_eq(a, b) -> bool:
    return all(
        all(x == y for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
    ) and len(a) == len(b)


def solve(a, rhs_cols):
    """Solve a X = B for X by Gauss-Jordan; a square and invertible.

    ``rhs_cols`` is a matrix whose columns are the right-hand sides; returns X
    with the same shape.  Raises ValueError if a is singular.
    """
    n = len(a)
    aug = [list(ra) + list(rb) for ra, rb in zip(a, rhs_cols)]
    width = len(aug[0])
    row = 0
    for col in range(n):
        pivot = None
        for r in range(row, n):
            if aug[r][col]:
                pivot = r
                break
        if pivot is None:
            raise ValueError("singular matrix in solve")
        aug[row], aug[pivot] = aug[pivot], aug[row]
        inv = invert_scalar(aug[row][col])
        aug[row] = [x * inv for x in aug[row]]
        for r in range(n):
            if r != row and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[row])]
        row += 1
    return tuple(tuple(r[n:width]) for r in aug)


def inverse(a):
    n = len(a)
    probe = None
    for row in a:
        for x in row:
            if x:
                probe = x
                break
        if probe is not None:
            break
    if probe is None:
        raise ValueError("zero matrix is singular")
    one = probe * invert_scalar(probe)
    return solve(a, identity(n, one))


def rref(rows):
    """Reduced row echelon form; returns (rref_rows, pivot_columns)."""
    mat = [list(r) for r in rows]
    if not mat:
        return [], []
    ncols = len(mat[0])
    pivots = []
    row = 0
    for col in range(ncols):
        if row >= len(mat):
            break
        pivot = None
        for r in range(row, len(mat)):
            if mat[r][col]:
                pivot = r
                break
        if pivot is None:
            continue
        mat[row], mat[pivot] = mat[pivot], mat[row]
        inv = invert_scalar(mat[row][col])
        mat[row] = [x * inv for x in mat[row]]
        for r in range(len(mat)):
            if r != row and mat[r][col]:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[row])]
        pivots.append(col)
        row += 1
    return [tuple(r) for r in mat[:row]], pivots


def nullspace(rows, one):
    """Basis (as rows) of the right nullspace of the matrix given by rows."""
    if not rows:
        raise ValueError("nullspace of an empty matrix needs a declared width")
    ncols = len(rows[0])
    red, pivots = rref(rows)
    zero = one - one
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = [zero] * ncols
        vec[f] = one
        for r, p in zip(red, pivots):
            vec[p] = -r[f]
        basis.append(tuple(vec))
    return basis


def row_space_contains(basis_rows, vec, one) -> bool:
    """Is vec in the row space of basis_rows (exact)?"""
    red, pivots = rref(list(basis_rows) + [tuple(vec)])
    red2, pivots2 = rref(list(basis_rows))
    return len(red) == len(red2)


def rank(rows) -> int:
    red, _ = rref(rows)
    return len(red)
