"""Root systems and Weyl groups in exact rational arithmetic.

Vectors of ``V`` (the real span of the roots) are tuples of ``Fraction``
holding coordinates in the basis of simple roots.  Coroots are covectors
on the same coordinates.  The analytic layer works in *coroot coordinates*
``x_i = alpha_i^vee(lambda)``; :meth:`RootSystem.to_x` converts.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction as Q
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _linalg as la

Vector = tuple  # tuple[Fraction, ...]

WEYL_BOUND = 100_000


class CartanTypeError(ValueError):
    """Unknown or malformed Cartan type label."""


class WeylBoundExceeded(RuntimeError):
    """The Weyl group is too large to enumerate under the configured bound."""


def cartan_matrix(letter: str, n: int) -> list[list[int]]:
    """Cartan matrix ``a_ij = alpha_i^vee(alpha_j)`` (Bourbaki numbering).

    B_n has alpha_n short, C_n has alpha_n long, G2 has alpha_1 short.
    """
    if n < 1:
        raise CartanTypeError(f"rank must be positive, got {letter}{n}")
    a = [[2 if i == j else 0 for j in range(n)] for i in range(n)]

    def chain(m: int) -> None:
        for i in range(m - 1):
            a[i][i + 1] = a[i + 1][i] = -1

    if letter == "A":
        chain(n)
    elif letter == "B":
        if n < 2:
            raise CartanTypeError("B_n needs n >= 2")
        chain(n)
        a[n - 1][n - 2] = -2
    elif letter == "C":
        if n < 2:
            raise CartanTypeError("C_n needs n >= 2")
        chain(n)
        a[n - 2][n - 1] = -2
    elif letter == "D":
        if n < 4:
            raise CartanTypeError("D_n needs n >= 4")
        chain(n - 1)
        a[n - 3][n - 1] = a[n - 1][n - 3] = -1
    elif letter == "E":
        if n not in (6, 7, 8):
            raise CartanTypeError("E_n needs n in 6, 7, 8")
        # Bourbaki: 1-3-4-5-6-(7-8), 2 attached to 4
        edges = [(1, 3), (3, 4), (4, 5), (5, 6), (2, 4)]
        if n >= 7:
            edges.append((6, 7))
        if n == 8:
            edges.append((7, 8))
        for i, j in edges:
            a[i - 1][j - 1] = a[j - 1][i - 1] = -1
    elif letter == "F":
        if n != 4:
            raise CartanTypeError("F_n needs n = 4")
        chain(4)
        a[1][2] = -2
    elif letter == "G":
        if n != 2:
            raise CartanTypeError("G_n needs n = 2")
        a[0][1] = -3
        a[1][0] = -1
    else:
        raise CartanTypeError(f"unknown Cartan type letter {letter!r}")
    return a


_TYPE_RE = re.compile(r"^([A-Ga-g])(\d+)$")


def parse_cartan_type(label: str) -> list[tuple[str, int]]:
    """Parse ``"A2"``, ``"B3"``, ``"A1xA1"`` into a list of components."""
    parts = [p.strip() for p in str(label).split("x")]
    out = []
    for p in parts:
        m = _TYPE_RE.match(p)
        if not m:
            raise CartanTypeError(f"unknown Cartan type {label!r}")
        out.append((m.group(1).upper(), int(m.group(2))))
    return out


def _block_diag(blocks: Sequence[list[list[int]]]) -> list[list[int]]:
    n = sum(len(b) for b in blocks)
    a = [[0] * n for _ in range(n)]
    k = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                a[k + i][k + j] = x
        k += len(b)
    return a


def _symmetrizer(a: Sequence[Sequence[int]]) -> list[Q]:
    """Squared lengths d_i with d_i a_ij = d_j a_ji, longest root length 2 per component."""
    n = len(a)
    d: list[Q | None] = [None] * n
    for start in range(n):
        if d[start] is not None:
            continue
        comp = [start]
        d[start] = Q(1)
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for j in range(n):
                if a[i][j] != 0 and i != j and d[j] is None:
                    d[j] = d[i] * Q(a[i][j], a[j][i])
                    comp.append(j)
                    queue.append(j)
        top = max(d[i] for i in comp)
        for i in comp:
            d[i] = d[i] * 2 / top
    return d  # type: ignore[return-value]


@dataclass(frozen=True, eq=False)
class WeylElement:
    """Weyl group element: reduced word in simple reflections plus its exact matrix.

    ``matrix`` acts on simple-root coordinates (integer entries).
    """

    word: tuple[int, ...]
    matrix: tuple[tuple[int, ...], ...]
    rs: "RootSystem" = field(repr=False)

    @property
    def length(self) -> int:
        return len(self.word)

    @cached_property
    def np_matrix(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.int64)

    @cached_property
    def x_matrix(self) -> np.ndarray:
        """Action on coroot coordinates: ``x(w lam) = x_matrix @ x(lam)``."""
        return self.rs._cartan_np @ self.np_matrix @ self.rs._cartan_inv_np

    @cached_property
    def root_perm(self) -> tuple[int, ...]:
        """Index permutation of ``rs.roots`` induced by the action."""
        idx = self.rs.root_index
        return tuple(idx[self.act_int(r)] for r in self.rs.roots)

    def act_int(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(sum(m * x for m, x in zip(row, v))) for row in self.matrix)

    def act(self, v: Sequence) -> Vector:
        return tuple(sum((m * Q(x) for m, x in zip(row, v)), Q(0)) for row in self.matrix)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        return self.rs.element(self.word + other.word)

    def inverse(self) -> "WeylElement":
        return self.rs.element(tuple(reversed(self.word)))

    @property
    def key(self) -> bytes:
        return self.np_matrix.tobytes()

    def __eq__(self, other: object) -> bool:
        return isinstance(other, WeylElement) and self.matrix == other.matrix

    def __hash__(self) -> int:
        return hash(self.matrix)


class RootSystem:
    """Finite crystallographic root system given by a Cartan matrix.

    Immutable after construction.  Roots are integer tuples in the simple
    root basis; ``positive`` are ordered by height, then lexicographically.
    """

    def __init__(self, cartan: Sequence[Sequence[int]], cartan_type: str = "custom"):
        self.cartan_type = cartan_type
        self.cartan = tuple(tuple(int(x) for x in row) for row in cartan)
        n = self.rank = len(self.cartan)
        if n == 0:
            raise CartanTypeError("rank 0 root system")
        d = _symmetrizer(self.cartan)
        # (alpha_i, alpha_j) = a_ij d_i / 2
        self.gram = tuple(tuple(Q(self.cartan[i][j]) * d[i] / 2 for j in range(n)) for i in range(n))
        self.positive = self._generate_positive()
        self.roots = self.positive + tuple(tuple(-x for x in r) for r in self.positive)
        self.root_index = {r: i for i, r in enumerate(self.roots)}
        self.simple = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
        self._cartan_np = np.array(self.cartan, dtype=np.int64)
        inv = la.inverse(self.cartan)
        self._cartan_inv_q = inv
        det = la.det(self.cartan)
        self._cartan_inv_np = np.array([[float(x) for x in row] for row in inv])
        self._cartan_det = det

    # -- construction -------------------------------------------------
    def _reflect_int(self, i: int, v: Sequence[int]) -> tuple[int, ...]:
        c = sum(self.cartan[i][j] * v[j] for j in range(self.rank))
        return tuple(v[j] - (c if j == i else 0) for j in range(self.rank))

    def _generate_positive(self) -> tuple[tuple[int, ...], ...]:
        seen = set()
        frontier = [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]
        seen.update(frontier)
        while frontier:
            nxt = []
            for v in frontier:
                for i in range(self.rank):
                    u = self._reflect_int(i, v)
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
            frontier = nxt
        pos = [r for r in seen if all(x >= 0 for x in r)]
        if 2 * len(pos) != len(seen):
            raise ValueError("root closure is not symmetric; bad Cartan matrix")
        return tuple(sorted(pos, key=lambda r: (sum(r), tuple(-x for x in r))))

    # -- geometry -----------------------------------------------------
    def inner(self, u: Sequence, v: Sequence) -> Q:
        return sum((Q(u[i]) * self.gram[i][j] * Q(v[j]) for i in range(self.rank)
                    for j in range(self.rank) if u[i] and v[j]), Q(0))

    @cached_property
    def coroots(self) -> tuple[tuple[Q, ...], ...]:
        """Coroot covectors, aligned with ``roots``: ``alpha^vee(v) = sum coroot[j] v[j]``."""
        out = []
        for r in self.roots:
            nr = self.inner(r, r)
            out.append(tuple(2 * sum((Q(r[i]) * self.gram[i][j] for i in range(self.rank)), Q(0)) / nr
                             for j in range(self.rank)))
        return tuple(out)

    def pairing(self, root_i: int, v: Sequence) -> Q:
        return sum((c * Q(x) for c, x in zip(self.coroots[root_i], v)), Q(0))

    def pairings(self, v: Sequence) -> tuple[Q, ...]:
        """``alpha^vee(v)`` for every root, aligned with ``roots``."""
        v = tuple(Q(x) for x in v)
        return tuple(sum((c * x for c, x in zip(cv, v)), Q(0)) for cv in self.coroots)

    @cached_property
    def coroot_x(self) -> np.ndarray:
        """Integer rows n with ``alpha^vee(lambda) = n . x(lambda)`` for positive roots."""
        # coroot covector c (root coords) = n A  =>  n = c A^{-1}
        rows = []
        for cv in self.coroots[: len(self.positive)]:
            n = [sum((cv[k] * self._cartan_inv_q[k][j] for k in range(self.rank)), Q(0))
                 for j in range(self.rank)]
            assert all(x.denominator == 1 for x in n)
            rows.append([int(x) for x in n])
        return np.array(rows, dtype=np.int64)

    def to_x(self, v: Sequence) -> tuple[Q, ...]:
        """Coroot coordinates ``x_i = alpha_i^vee(v)``."""
        return tuple(la.matvec(self.cartan, v))

    def from_x(self, x: Sequence) -> tuple[Q, ...]:
        return tuple(la.matvec(self._cartan_inv_q, x))

    def root_lengths(self) -> set[Q]:
        return {self.inner(r, r) for r in self.positive}

    # -- Weyl group -----------------------------------------------------
    def element(self, word: Iterable[int]) -> WeylElement:
        """Element for any word; the stored word is the canonical reduced one."""
        m = np.eye(self.rank, dtype=np.int64)
        for i in word:
            m = m @ self._simple_np[i]
        return self._from_matrix(m)

    def _from_matrix(self, m: np.ndarray) -> WeylElement:
        mat = tuple(tuple(int(x) for x in row) for row in m)
        return WeylElement(self._reduced_word(m), mat, self)

    def _reduced_word(self, m: np.ndarray) -> tuple[int, ...]:
        # strip the smallest right descent (w alpha_i < 0) until w = e
        word: list[int] = []
        while True:
            i = next((k for k in range(self.rank) if (m[:, k] <= 0).all()), None)
            if i is None:
                return tuple(reversed(word))
            word.append(i)
            m = m @ self._simple_np[i]

    @cached_property
    def _simple_np(self) -> list[np.ndarray]:
        out = []
        for i in range(self.rank):
            s = np.eye(self.rank, dtype=np.int64)
            s[i, :] -= self._cartan_np[i, :]
            out.append(s)
        return out

    @cached_property
    def order_estimate(self) -> int:
        """|W| from the product formula over components; cheap, no enumeration."""
        return _weyl_order(self)

    def weyl_group(self, bound: int = WEYL_BOUND) -> tuple[WeylElement, ...]:
        return enumerate_weyl(self, bound)

    @cached_property
    def longest(self) -> WeylElement:
        """The longest element, built by descending to the antidominant chamber."""
        v = tuple(Q(1) for _ in range(self.rank))
        # rho-like regular dominant vector in x coords -> root coords
        v = self.from_x(v)
        target = tuple(-x for x in v)
        _, w = dominant_representative(self, target)
        # w target = v  ; longest = w^{-1} maps v to -v, w0 is an involution
        return w.inverse()

    def __repr__(self) -> str:
        return f"RootSystem({self.cartan_type})"


def _weyl_order(rs: RootSystem) -> int:
    # |W| = prod over positive roots of (ht+1)/ht is not general; use the
    # degree formula via exponents: |W| = prod (m_i + 1) with exponents from
    # heights of positive roots (Kostant): number of roots of height k.
    heights: dict[int, int] = {}
    for r in rs.positive:
        h = sum(r)
        heights[h] = heights.get(h, 0) + 1
    # exponents: multiplicity of exponent k = (#height k) - (#height k+1)
    order = 1
    kmax = max(heights)
    for k in range(1, kmax + 1):
        mult = heights.get(k, 0) - heights.get(k + 1, 0)
        order *= (k + 1) ** mult
    return order


def build_root_system(cartan_type: str) -> RootSystem:
    """Root system from a label such as ``"G2"`` or ``"A1xA1"``."""
    comps = parse_cartan_type(cartan_type)
    total = sum(n for _, n in comps)
    if total == 0:
        raise CartanTypeError("rank 0")
    if total > 8:
        raise CartanTypeError(f"total rank {total} exceeds 8")
    blocks = [cartan_matrix(letter, n) for letter, n in comps]
    label = "x".join(f"{l}{n}" for l, n in comps)
    return RootSystem(_block_diag(blocks), label)


def enumerate_weyl(rs: RootSystem, bound: int = WEYL_BOUND) -> tuple[WeylElement, ...]:
    """All Weyl group elements by breadth-first closure; identity first.

    Words are reduced (BFS depth equals length).
    """
    if rs.order_estimate > bound:
        raise WeylBoundExceeded(f"|W| = {rs.order_estimate} exceeds bound {bound}")
    cache = rs.__dict__.get("_weyl_cache")
    if cache is not None:
        return cache
    ident = np.eye(rs.rank, dtype=np.int64)
    seen = {ident.tobytes()}
    out = [rs._from_matrix(ident)]
    frontier = [(ident, ())]
    while frontier:
        nxt = []
        for m, _ in frontier:
            for i in range(rs.rank):
                mm = rs._simple_np[i] @ m
                key = mm.tobytes()
                if key in seen:
                    continue
                seen.add(key)
                out.append(rs._from_matrix(mm))
                nxt.append((mm, ()))
        frontier = nxt
    result = tuple(out)
    rs.__dict__["_weyl_cache"] = result
    return result


def dominant_representative(rs: RootSystem, v: Sequence) -> tuple[Vector, WeylElement]:
    """Return ``(v_dom, w)`` with ``w v = v_dom`` dominant."""
    v = tuple(Q(x) for x in v)
    word: list[int] = []
    while True:
        x = rs.to_x(v)
        i = next((k for k, xi in enumerate(x) if xi < 0), None)
        if i is None:
            break
        v = tuple(v[j] - (x[i] if j == i else 0) for j in range(rs.rank))
        word.append(i)
    return v, rs.element(tuple(reversed(word)))


def is_dominant(rs: RootSystem, v: Sequence) -> bool:
    return all(x >= 0 for x in rs.to_x(v))


def inversion_set(w: WeylElement) -> frozenset[int]:
    """Indices of positive roots sent to negative roots by ``w`` (the set Phi(w))."""
    npos = len(w.rs.positive)
    perm = w.root_perm
    return frozenset(i for i in range(npos) if perm[i] >= npos)


def sub_root_system(rs: RootSystem, root_indices: Iterable[int]) -> tuple[RootSystem, list[int]]:
    """Closed subsystem spanned by the given roots, with its simple roots.

    Returns the intrinsic root system and the indices (into ``rs.roots``) of
    its simple roots, so that sub-simple root k is ``rs.roots[simple[k]]``.
    """
    idx = set(root_indices)
    npos = len(rs.positive)
    pos = sorted(i for i in idx if i < npos)
    pos_set = set(pos)
    simple = []
    for i in pos:
        r = rs.roots[i]
        decomposable = False
        for j in pos:
            diff = tuple(a - b for a, b in zip(r, rs.roots[j]))
            k = rs.root_index.get(diff)
            if k is not None and k in pos_set:
                decomposable = True
                break
        if not decomposable:
            simple.append(i)
    if not simple:
        raise ValueError("empty subsystem")
    cart = [[int(rs.pairing(i, rs.roots[j])) for j in simple] for i in simple]
    return RootSystem(cart, "sub"), simple
