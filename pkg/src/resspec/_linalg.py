"""Small exact-rational linear algebra over ``fractions.Fraction``."""
from __future__ import annotations

from fractions import Fraction as Q
from typing import List, Optional, Sequence

Matrix = List[List[Q]]


def to_q(rows: Sequence[Sequence]) -> Matrix:
    return [[Q(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = to_q(rows)
    if not m:
        return m, []
    n_rows, n_cols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(n_cols):
        piv = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        p = m[r][c]
        m[r] = [x / p for x in m[r]]
        for i in range(n_rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[list[Q]]:
    """Unique solution of ``a x = b`` or None if singular/inconsistent."""
    n = len(a[0])
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    m, piv = rref(aug)
    if n in piv or len(piv) != n:
        return None
    x = [Q(0)] * n
    for i, c in enumerate(piv):
        x[c] = m[i][n]
    return x


def nullspace(rows: Sequence[Sequence], n_cols: int) -> Matrix:
    """Basis of ``{x : rows x = 0}``."""
    if not rows:
        return [[Q(int(i == j)) for j in range(n_cols)] for i in range(n_cols)]
    m, piv = rref(rows)
    free = [c for c in range(n_cols) if c not in piv]
    basis = []
    for f in free:
        v = [Q(0)] * n_cols
        v[f] = Q(1)
        for i, c in enumerate(piv):
            v[c] = -m[i][f]
        basis.append(v)
    return basis


def det(rows: Sequence[Sequence]) -> Q:
    m = to_q(rows)
    n = len(m)
    d = Q(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Q(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        p = m[c][c]
        d *= p
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / p
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def inverse(rows: Sequence[Sequence]) -> Matrix:
    n = len(rows)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(rows)]
    m, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in m]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Q(0)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence], v: Sequence) -> list[Q]:
    return [sum((Q(x) * y for x, y in zip(row, v)), Q(0)) for row in a]


def dot(u: Sequence, v: Sequence) -> Q:
    return sum((Q(a) * b for a, b in zip(u, v)), Q(0))
