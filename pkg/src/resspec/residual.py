"""Residual subspaces, their centers and stabilizers, and the orbit dictionary."""
from __future__ import annotations

import itertools
import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction as Q
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from . import _linalg as la
from .rootsys import (RootSystem, WeylElement, dominant_representative, enumerate_weyl,
                      sub_root_system)

POINT_RANK_BOUND = 4


class RankBoundExceeded(RuntimeError):
    pass


def _qvec(v: Sequence) -> tuple[Q, ...]:
    return tuple(Q(x) for x in v)


@dataclass(frozen=True)
class ResidualCertificate:
    n1: int
    n0: int
    codim: int

    @property
    def residual(self) -> bool:
        return self.n1 == self.n0 + self.codim


@dataclass(eq=False)
class AffineSubspace:
    """``L = center + span(direction)`` with ``center`` orthogonal to the span."""

    rs: RootSystem
    center: tuple
    direction: tuple  # tuple of basis vectors of V^L

    @classmethod
    def through(cls, rs: RootSystem, point: Sequence, direction: Sequence[Sequence] = ()) -> "AffineSubspace":
        """Affine subspace through ``point``; the center is computed by orthogonal projection."""
        p = _qvec(point)
        basis = _independent([_qvec(b) for b in direction])
        if basis:
            g = [[rs.inner(a, b) for b in basis] for a in basis]
            rhs = [rs.inner(a, p) for a in basis]
            coef = la.solve(g, rhs)
            p = tuple(x - sum((c * b[i] for c, b in zip(coef, basis)), Q(0)) for i, x in enumerate(p))
        return cls(rs, p, tuple(basis))

    @property
    def dim(self) -> int:
        return len(self.direction)

    @property
    def codim(self) -> int:
        return self.rs.rank - self.dim

    @cached_property
    def phi_L(self) -> frozenset[int]:
        return parabolic_subsystem(self)

    @cached_property
    def constants(self) -> dict[int, Q]:
        """Constant value of each coroot in ``phi_L`` on L."""
        return {i: self.rs.pairing(i, self.center) for i in sorted(self.phi_L)}

    def contains(self, v: Sequence) -> bool:
        v = _qvec(v)
        d = [list(b) for b in self.direction] + [[x - c for x, c in zip(v, self.center)]]
        return la.rank(d) == self.dim

    def same_as(self, other: "AffineSubspace") -> bool:
        return self.center == other.center and la.rank(
            [list(b) for b in self.direction] + [list(b) for b in other.direction]) == self.dim == other.dim

    def image(self, w: WeylElement) -> "AffineSubspace":
        return AffineSubspace(self.rs, w.act(self.center), tuple(w.act(b) for b in self.direction))

    def negated(self) -> "AffineSubspace":
        return AffineSubspace(self.rs, tuple(-x for x in self.center), self.direction)

    def key(self) -> tuple:
        """Canonical hashable key (center plus row-reduced direction)."""
        m, _ = la.rref([list(b) for b in self.direction]) if self.direction else ([], [])
        return self.center, tuple(tuple(r) for r in m if any(r))


def _independent(vectors: list) -> list:
    out: list = []
    for v in vectors:
        if la.rank([list(x) for x in out] + [list(v)]) > len(out):
            out.append(v)
    return out


def parabolic_subsystem(L: AffineSubspace) -> frozenset[int]:
    """Indices of roots whose coroots are constant on L."""
    rs = L.rs
    return frozenset(i for i in range(len(rs.roots))
                     if all(rs.pairing(i, b) == 0 for b in L.direction))


def is_residual(L: AffineSubspace) -> ResidualCertificate:
    vals = L.constants
    n1 = sum(1 for v in vals.values() if v == 1)
    n0 = sum(1 for v in vals.values() if v == 0)
    return ResidualCertificate(n1, n0, L.codim)


@dataclass(eq=False)
class ResidualSubspace(AffineSubspace):
    """A residual subspace chosen with dominant center.

    ``levi`` is the simple-root subset J of a standard representative
    ``c_std + V^J`` in the same W-orbit and ``lam`` its center, which is
    dominant for the Levi subsystem.
    """

    levi: tuple = ()
    lam: tuple = ()
    certificate: Optional[ResidualCertificate] = None

    @property
    def distinguished(self) -> bool:
        return self.dim == 0

    @cached_property
    def marks(self) -> tuple[int, ...]:
        x = self.rs.to_x(self.center)
        out = []
        for v in x:
            v2 = 2 * v
            assert v2.denominator == 1, "non-integral mark"
            out.append(int(v2))
        return tuple(out)

    @cached_property
    def standard(self) -> AffineSubspace:
        """The standard-Levi representative ``lam + V^J``."""
        return AffineSubspace.through(self.rs, self.lam, _levi_complement(self.rs, self.levi))


def _levi_complement(rs: RootSystem, J: Sequence[int]) -> list:
    """Basis of V^J: vectors killed by the simple coroots in J."""
    if not J:
        return [list(e) for e in la.to_q(rs.simple)]
    rows = [list(rs.coroots[j]) for j in J]
    return la.nullspace(rows, rs.rank)


def _levi_roots(rs: RootSystem, J: Sequence[int]) -> list[int]:
    Js = set(J)
    return [i for i, r in enumerate(rs.roots) if all(r[k] == 0 for k in range(rs.rank) if k not in Js)]


def residual_points(rs: RootSystem, J: Sequence[int]) -> list[tuple]:
    """Residual points of (V_J, Phi_J) that are dominant for W_J.

    Solves ``alpha^vee(c) = 1`` on every independent |J|-subset of positive
    coroots of Phi_J inside V_J.
    """
    J = tuple(J)
    if not J:
        return [tuple(Q(0) for _ in range(rs.rank))]
    if len(J) > POINT_RANK_BOUND:
        raise RankBoundExceeded(f"Levi rank {len(J)} exceeds point bound {POINT_RANK_BOUND}")
    npos = len(rs.positive)
    roots_J = _levi_roots(rs, J)
    pos_J = [i for i in roots_J if i < npos]
    found: dict[tuple, None] = {}
    for subset in itertools.combinations(pos_J, len(J)):
        # unknowns: coordinates of c on the simple roots in J
        a = [[rs.coroots[i][j] for j in J] for i in subset]
        sol = la.solve(a, [1] * len(J))
        if sol is None:
            continue
        c = [Q(0)] * rs.rank
        for j, v in zip(J, sol):
            c[j] = v
        c = tuple(c)
        if any(rs.pairing(j, c) < 0 for j in J):
            continue
        vals = [rs.pairing(i, c) for i in roots_J]
        n1 = sum(1 for v in vals if v == 1)
        n0 = sum(1 for v in vals if v == 0)
        if n1 == n0 + len(J):
            found.setdefault(c, None)
    return list(found)


def enumerate_residual(rs: RootSystem) -> list[ResidualSubspace]:
    """One residual subspace with dominant center per W-orbit, ordered by center height."""
    reps: dict[tuple, ResidualSubspace] = {}
    for k in range(rs.rank + 1):
        for J in itertools.combinations(range(rs.rank), k):
            for c in residual_points(rs, J):
                cdom, w = dominant_representative(rs, c)
                if cdom in reps:
                    continue
                std = AffineSubspace.through(rs, c, _levi_complement(rs, J))
                cert = is_residual(std)
                if not cert.residual:
                    raise AssertionError("standard candidate failed the residual test")
                L = ResidualSubspace(rs, cdom, tuple(w.act(b) for b in std.direction),
                                     levi=J, lam=c, certificate=cert)
                reps[cdom] = L
    out = list(reps.values())
    out.sort(key=lambda L: (sum(L.marks), L.marks))
    return out


# -- stabilizers ---------------------------------------------------------

@dataclass
class StabilizerData:
    stab: list
    fix: list
    cosets: list  # representatives of stab/fix, i.e. W(L)
    m_o: int
    images: list  # distinct w(L), with a representative w each

    @property
    def weyl_L_order(self) -> int:
        return len(self.cosets)


def _phi_image(w: WeylElement, phi: frozenset[int]) -> frozenset[int]:
    perm = w.root_perm
    return frozenset(perm[i] for i in phi)


def stabilizer_data(L: AffineSubspace) -> StabilizerData:
    rs = L.rs
    W = enumerate_weyl(rs)
    stab, fix = [], []
    images: dict[tuple, WeylElement] = {}
    for w in W:
        M = L.image(w)
        images.setdefault(M.key(), w)
        if w.act(L.center) != L.center or _phi_image(w, L.phi_L) != L.phi_L:
            continue
        stab.append(w)
        if all(w.act(b) == b for b in L.direction):
            fix.append(w)
    # coset representatives of stab / fix
    fix_set = set(fix)
    cosets: list = []
    covered: set = set()
    for w in stab:
        if w in covered:
            continue
        cosets.append(w)
        covered.update(w * f for f in fix_set)
    m_o = len(W) // len(stab)
    assert m_o == len(images)
    return StabilizerData(stab, fix, cosets, m_o, [(w, L.image(w)) for w in images.values()])


def negative_in_orbit(L: AffineSubspace) -> Optional[WeylElement]:
    """Some w with w(L^t) = -c_L + iV^L, or None."""
    target = L.negated()
    tkey = target.key()
    for w in enumerate_weyl(L.rs):
        if L.image(w).key() == tkey:
            return w
    return None


# -- orbit dictionary ------------------------------------------------------

@dataclass
class NilpotentOrbit:
    marks: tuple
    levi: tuple
    distinguished: bool
    lam: tuple
    a_order: int
    m_o: int
    label: str
    table_hit: bool = True
    subspace: Optional[ResidualSubspace] = field(default=None, repr=False)


def load_orbit_table(path: Optional[str | Path] = None) -> dict:
    """Orbit table ``{type: [{marks, label, a_order}, ...]}``; shipped copy by default."""
    if path is None:
        text = resources.files("resspec").joinpath("data/orbit_tables.json").read_text()
    else:
        text = Path(path).read_text()
    data = json.loads(text)
    return {k: v for k, v in data.items() if not k.startswith("_")}


def orbit_of(L: ResidualSubspace, orbit_table: Optional[dict] = None) -> NilpotentOrbit:
    table = load_orbit_table() if orbit_table is None else orbit_table
    entries = table.get(L.rs.cartan_type, [])
    hit = next((e for e in entries if tuple(e["marks"]) == L.marks), None)
    if hit is None:
        warnings.warn(f"no orbit-table entry for {L.rs.cartan_type} marks {L.marks}; |A| defaults to 1")
        label, a_order = "marks" + "".join(map(str, L.marks)), 1
    else:
        label, a_order = hit["label"], int(hit["a_order"])
    m_o = stabilizer_data(L).m_o
    return NilpotentOrbit(L.marks, L.levi, L.distinguished, L.lam, a_order, m_o, label,
                          hit is not None, L)


def nilpotent_orbits(rs: RootSystem, orbit_table: Optional[dict] = None) -> list[NilpotentOrbit]:
    return [orbit_of(L, orbit_table) for L in enumerate_residual(rs)]


def distinguished_orbits(rs: RootSystem, orbit_table: Optional[dict] = None) -> list[NilpotentOrbit]:
    return [o for o in nilpotent_orbits(rs, orbit_table) if o.distinguished]


def levi_root_system(L: AffineSubspace) -> tuple[RootSystem, list[int], tuple]:
    """Intrinsic root system of Phi_L, its simple roots, and c_L in their basis."""
    sub, simple = sub_root_system(L.rs, L.phi_L)
    basis = [L.rs.roots[i] for i in simple]
    a = [[Q(b[k]) for b in basis] for k in range(L.rs.rank)]
    coef, piv = la.rref([row + [c] for row, c in zip(a, L.center)])
    c_sub = [Q(0)] * len(basis)
    for i, p in enumerate(piv):
        if p < len(basis):
            c_sub[p] = coef[i][len(basis)]
    return sub, simple, tuple(c_sub)


def g_function_roots(L: AffineSubspace) -> list[tuple[int, Q]]:
    """Factors (root index, shift) of the separating function g for the center class of L.

    ``g(lam) = prod (alpha^vee(lam) - alpha^vee(c_L))`` over roots with
    coroot nonconstant on L; it vanishes on every other subspace M with
    the same center (some such coroot is constant on M) but not on L.
    """
    rs = L.rs
    c_vals = rs.pairings(L.center)
    return [(i, c_vals[i]) for i in range(len(rs.positive)) if i not in L.phi_L]
