"""Small exact linear-algebra helpers over the rationals (``fmpq_mat``)."""

import flint

from .errors import GenericityError
from .jets import as_fmpq

__all__ = ["standard_J", "symplectic_basis", "determinant", "rank", "signature"]


def standard_J(n):
    """Matrix of ``sum dp_i^dq_i`` in the order (p1..pn, q1..qn)."""
    J = flint.fmpq_mat(2 * n, 2 * n)
    for i in range(n):
        J[i, n + i] = 1
        J[n + i, i] = -1
    return J


def _form(M, u, v):
    return (u.transpose() * M * v)[0, 0]


def symplectic_basis(M, first=()):
    """Columns ``B`` with ``B^T M B = J`` for a nondegenerate antisymmetric ``M``.

    Symplectic Gram-Schmidt: the first remaining vector is paired with
    the first remaining vector it does not annihilate.

    Parameters
    ----------
    M : fmpq_mat
    first : sequence of (v, w) column vectors, optional
        Pairs with ``v^T M w = 1`` that become the leading columns of the
        P and Q blocks; the standard basis completes them.

    Raises
    ------
    GenericityError
        If ``M`` is degenerate or a prescribed pair is not normalized.
    """
    dim = M.nrows()
    if dim % 2:
        raise GenericityError("odd-dimensional form is degenerate", "rank")
    n = dim // 2
    vecs = []
    for i in range(dim):
        e = flint.fmpq_mat(dim, 1)
        e[i, 0] = 1
        vecs.append(e)
    P, Q = [], []

    def split_off(v, w):
        P.append(v)
        Q.append(w)
        out = [x + v * (-_form(M, x, w)) + w * _form(M, x, v) for x in vecs]
        # vectors already in the span of the split-off pairs drop out
        return [x for x in out if any(x[r, 0] != 0 for r in range(dim))]

    for v, w in first:
        if _form(M, v, w) != 1:
            raise GenericityError("prescribed pair is not normalized", "pair")
        vecs = split_off(v, w)
    while vecs:
        v = vecs.pop(0)
        j = next((j for j, w in enumerate(vecs) if _form(M, v, w) != 0), None)
        if j is None:
            raise GenericityError("form is degenerate", "rank")
        w = vecs.pop(j)
        vecs = split_off(v, w * (1 / _form(M, v, w)))
    if len(P) != n:
        raise GenericityError("form is degenerate", "rank")
    B = flint.fmpq_mat(dim, dim)
    for i in range(n):
        for r in range(dim):
            B[r, i] = P[i][r, 0]
            B[r, n + i] = Q[i][r, 0]
    return B


def determinant(rows):
    """Exact determinant of a square list of rational rows."""
    if not rows:
        return flint.fmpq(1)
    return flint.fmpq_mat([[as_fmpq(x) for x in r] for r in rows]).det()


def rank(rows):
    if not rows or not rows[0]:
        return 0
    return flint.fmpq_mat([[as_fmpq(x) for x in r] for r in rows]).rank()


def signature(rows):
    """Inertia ``(n_plus, n_minus, n_zero)`` of a symmetric rational matrix.

    Computed by exact symmetric Gaussian elimination (congruence), so no
    eigenvalues are needed.
    """
    A = [[as_fmpq(x) for x in r] for r in rows]
    m = len(A)
    pos = neg = 0
    idx = list(range(m))
    while idx:
        piv = next((i for i in idx if A[i][i] != 0), None)
        if piv is None:
            # bring a nonzero off-diagonal entry onto the diagonal
            pair = next(((i, j) for i in idx for j in idx if i != j and A[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            for k in range(m):
                A[i][k] += A[j][k]
            for k in range(m):
                A[k][i] += A[k][j]
            continue
        a = A[piv][piv]
        if a > 0:
            pos += 1
        else:
            neg += 1
        idx.remove(piv)
        for i in idx:
            f = A[i][piv] / a
            if f == 0:
                continue
            for k in range(m):
                A[i][k] -= f * A[piv][k]
            for k in range(m):
                A[k][i] -= f * A[k][piv]
    return pos, neg, m - pos - neg
