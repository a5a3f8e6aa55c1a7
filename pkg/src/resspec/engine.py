"""Residue engine: contour shifts and iterated residues on an affine arrangement.

Everything geometric is exact and lives in coroot coordinates ``x = A lambda``,
where each pole hyperplane ``alpha^vee = k`` has an integer row.  A term is a
nested residue along a chain of crossings, integrated over ``p + i V^L`` with
measure ``dy / (2 pi)^{dim L}`` in the canonical basis of ``V^L``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction as Q
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np

from . import _linalg as la
from .analytic import A_c, KernelExpr, circle_mean, eta_kernel, generic_direction, omega_kernel, problematic_roots
from .quadrature import DEFAULT_RADIUS, QuadResult, integrate
from .rootsys import RootSystem, WeylElement

N_CIRCLE = 24
RADIUS_CAP = 0.25
VANISH_REL = 1e-9
PERTURB_BUDGET = 32


class NonGenericError(RuntimeError):
    pass


class PositivityViolation(RuntimeError):
    """A contour segment left the region where the denominators of r are safe."""

    def __init__(self, w, flat, point, root):
        self.w, self.flat, self.point, self.root = w, flat, point, root
        super().__init__(f"positivity certificate failed: w={w} L={flat} p={[str(v) for v in point]} root={root}")


# ---------------------------------------------------------------- flats

def _qt(v) -> tuple:
    return tuple(Q(x) for x in v)


@dataclass(frozen=True)
class Flat:
    """``{x : E x = b}`` kept in reduced row echelon form."""

    rank: int
    eqs: tuple  # ((row, value), ...)

    @classmethod
    def whole(cls, rank: int) -> "Flat":
        return cls(rank, ())

    @classmethod
    def from_equations(cls, rank: int, rows, vals) -> Optional["Flat"]:
        if not rows:
            return cls.whole(rank)
        m, piv = la.rref([list(r) + [v] for r, v in zip(rows, vals)])
        if rank in piv:
            return None  # empty
        eqs = tuple((tuple(row[:rank]), row[rank]) for row in m if any(x != 0 for x in row))
        return cls(rank, eqs)

    @property
    def key(self) -> tuple:
        return self.eqs

    @cached_property
    def direction(self) -> tuple:
        if not self.eqs:
            return tuple(tuple(Q(int(i == j)) for j in range(self.rank)) for i in range(self.rank))
        return tuple(tuple(v) for v in la.nullspace([list(r) for r, _ in self.eqs], self.rank))

    @property
    def dim(self) -> int:
        return self.rank - len(self.eqs)

    def contains(self, p) -> bool:
        return all(la.dot(r, p) == v for r, v in self.eqs)

    def meet(self, row, val) -> Optional["Flat"]:
        return Flat.from_equations(self.rank, [r for r, _ in self.eqs] + [_qt(row)],
                                   [v for _, v in self.eqs] + [Q(val)])

    def inside(self, row, val) -> bool:
        """True when the flat lies in the hyperplane ``row . x = val``."""
        return self.meet(row, val) == self

    def constant_on(self, row) -> bool:
        return all(la.dot(row, b) == 0 for b in self.direction)

    def center(self, gram_x) -> tuple:
        """Point of the flat closest to the origin for the metric ``gram_x``."""
        if not self.eqs:
            return tuple(Q(0) for _ in range(self.rank))
        p = [Q(0)] * self.rank
        piv = [next(i for i, x in enumerate(r) if x != 0) for r, _ in self.eqs]
        for (r, v), c in zip(self.eqs, piv):
            p[c] = v
        B = self.direction
        if not B:
            return tuple(p)
        gb = [la.matvec(gram_x, b) for b in B]
        lhs = [[la.dot(b1, g2) for g2 in gb] for b1 in B]
        rhs = [-la.dot(g, p) for g in gb]
        z = la.solve(lhs, rhs)
        return tuple(p[i] + sum((zk * b[i] for zk, b in zip(z, B)), Q(0)) for i in range(self.rank))

    def __str__(self) -> str:
        if not self.eqs:
            return "V"
        parts = []
        for r, v in self.eqs:
            parts.append("+".join(f"{x}*x{i + 1}" for i, x in enumerate(r) if x) + f"={v}")
        return "{" + ", ".join(parts) + "}"


@dataclass(frozen=True)
class Hyperplane:
    row: tuple
    value: Q


@dataclass(frozen=True)
class Slab:
    """Region ``0 < Re(row . x + shift) < 1`` where a rho-denominator can vanish."""

    row: tuple
    shift: Q


@dataclass(frozen=True)
class CrossStep:
    u: tuple  # exact direction, row(u) = 1 for the crossed row
    exclude: frozenset  # hyperplane indices through the new flat, not through the old
    flat: Flat  # flat after the step


@dataclass
class Term:
    chain: tuple
    coef: Q
    base: tuple


@dataclass
class Piece:
    """One contribution: a bundle of terms on a flat at a common base point."""

    flat: Flat
    center: tuple
    base: tuple
    terms: list
    kind: str  # "point" or "integral"
    w: Optional[tuple] = None


@dataclass
class ShiftResult:
    pieces: list
    events: list
    dropped: list = field(default_factory=list)


# ---------------------------------------------------------------- engine

class ResidueEngine:
    """Shift algorithm for one meromorphic integrand ``F`` on ``V_C``."""

    def __init__(self, rs: RootSystem, F: KernelExpr, *, w: Optional[WeylElement] = None,
                 start: Optional[Sequence] = None, plan: str = "lexmin", seed: int = 0,
                 n_circle: int = N_CIRCLE, vanish_rel: float = VANISH_REL,
                 perturb_budget: int = PERTURB_BUDGET, check_positivity: bool = True):
        self.rs = rs
        self.F = F
        self.w = w
        self.plan = plan
        self.n_circle = n_circle
        self.vanish_rel = vanish_rel
        self.perturb_budget = perturb_budget
        self.check_positivity = check_positivity and w is not None
        self.rng = np.random.default_rng(seed)
        r = rs.rank
        if start is None:
            start = [tuple(Q(3, 2) for _ in range(r))]
        elif not isinstance(start[0], (list, tuple)):
            start = [start]
        # several starts split the functional evenly: X_{V,p} does not depend on p
        self.starts = [_qt(p) for p in start]
        self.start = self.starts[0]
        seen = {}
        for a, _ in F.poles():
            seen[(tuple(Q(v) for v in a.row), -Q(a.shift))] = None
        self.hyperplanes = [Hyperplane(row, val) for row, val in seen]
        self.slabs = [Slab(tuple(Q(v) for v in a.row), Q(a.shift)) for a in F.rho_denominators()]
        self._h_rows = np.array([[float(v) for v in h.row] for h in self.hyperplanes]).reshape(-1, r)
        self._h_vals = np.array([float(h.value) for h in self.hyperplanes])
        self._s_rows = np.array([[float(v) for v in s.row] for s in self.slabs]).reshape(-1, r)
        self._s_shift = np.array([float(s.shift) for s in self.slabs])
        ainv = rs._cartan_inv_q
        g = rs.gram
        # metric on x-coordinates and its dual on covectors
        self.gram_x = la.matmul(la.matmul([list(c) for c in zip(*ainv)], g), ainv)
        a = [[Q(v) for v in row] for row in rs.cartan]
        self._dual = np.array([[float(v) for v in row] for row in la.matmul(la.matmul(a, la.inverse(g)),
                                                                           [list(c) for c in zip(*a)])])
        self._roots_of_unity = np.exp(2j * np.pi * (np.arange(n_circle) + 0.5) / n_circle)
        self.events: list = []

    # -- bookkeeping --------------------------------------------------
    def _log(self, kind: str, **data) -> None:
        rec = {"event": kind}
        if self.w is not None:
            rec["w"] = list(self.w.word)
        for k, v in data.items():
            if isinstance(v, Flat):
                v = str(v)
            elif isinstance(v, tuple) and v and isinstance(v[0], Q):
                v = [str(x) for x in v]
            elif isinstance(v, Q):
                v = str(v)
            rec[k] = v
        self.events.append(rec)

    def _subspace(self, flat: Flat):
        from .residual import AffineSubspace
        c = flat.center(self.gram_x)
        return AffineSubspace(self.rs, self.rs.from_x(c), tuple(self.rs.from_x(b) for b in flat.direction))

    def positivity_roots(self, flat: Flat) -> frozenset:
        if not self.check_positivity:
            return frozenset()
        return problematic_roots(self.rs, self.w, self._subspace(flat))

    def _certify(self, flat: Flat, S: frozenset, points) -> None:
        for p in points:
            for k in sorted(S):
                if la.dot(self.rs.coroot_x[k].tolist(), p) <= 0:
                    raise PositivityViolation(self.w.word if self.w else None, str(flat), p, k)

    # -- geometry -----------------------------------------------------
    def _crossings(self, flat: Flat, p: tuple, q: tuple):
        """Crossings of the segment ``[p, q]`` inside ``flat``; None if not generic."""
        d = tuple(b - a for a, b in zip(p, q))
        hits: dict = {}
        for idx, h in enumerate(self.hyperplanes):
            if flat.constant_on(h.row):
                continue
            ld = la.dot(h.row, d)
            if ld == 0:
                continue
            t = (h.value - la.dot(h.row, p)) / ld
            if t == 0 or t == 1:
                return None
            if 0 < t < 1:
                M = flat.meet(h.row, h.value)
                hits.setdefault(M, []).append((t, idx, ld))
        out = []
        times = set()
        for M, lst in hits.items():
            ts = {t for t, _, _ in lst}
            if len(ts) != 1:
                return None
            t = lst[0][0]
            if t in times:
                return None
            times.add(t)
            pm = tuple(a + t * b for a, b in zip(p, d))
            # no other hyperplane may pass through the crossing point
            for idx, h in enumerate(self.hyperplanes):
                if M.constant_on(h.row) or any(idx == j for _, j, _ in lst):
                    continue
                if la.dot(h.row, pm) == h.value:
                    return None
            _, idx0, ld0 = lst[0]
            u = tuple(b / ld0 for b in d)
            exclude = frozenset(j for j, h in enumerate(self.hyperplanes)
                                if M.inside(h.row, h.value) and not flat.inside(h.row, h.value))
            sigma = -1 if ld0 > 0 else 1
            out.append((t, M, pm, u, exclude, sigma))
        out.sort(key=lambda e: e[0])
        return out

    def _det_T(self, flat: Flat, M: Flat, u: tuple) -> Q:
        BL = flat.direction
        cols = list(M.direction) + [u]
        gl = [[la.dot(a, b) for b in BL] for a in BL]
        T = []
        for c in cols:
            T.append(la.solve(gl, [la.dot(a, c) for a in BL]))
        return abs(la.det([list(col) for col in zip(*T)]))

    def _random_in(self, flat: Flat, scale: Q) -> tuple:
        out = [Q(0)] * self.rs.rank
        for b in flat.direction:
            c = Q(int(self.rng.integers(-512, 513)), 512) * scale
            out = [o + c * bi for o, bi in zip(out, b)]
        return tuple(out)

    def _emit(self, flat: Flat, term: Term, path: list, nxt: dict) -> None:
        for a, b in zip(path, path[1:]):
            for t, M, pm, u, exclude, sigma in self._crossings(flat, a, b):
                coef = term.coef * sigma * self._det_T(flat, M, u)
                new = Term(term.chain + (CrossStep(u, exclude, M),), coef, pm)
                nxt.setdefault(M, []).append(new)
                self._log("cross", flat=flat, into=M, at=pm, coef=coef, depth=len(new.chain))

    def _path(self, flat: Flat, p: tuple, q: tuple, S: frozenset, fixed_end: bool = True) -> list:
        """A generic polygonal path from p to q inside ``flat``."""
        self._certify(flat, S, [p, q])
        if self._crossings(flat, p, q) is not None:
            return [p, q]
        span = max((abs(float(x - y)) for x, y in zip(p, q)), default=1.0) or 1.0
        for attempt in range(self.perturb_budget):
            scale = Q(1, 8) * Q(span).limit_denominator(64) / (attempt + 1)
            mid = tuple((a + b) / 2 + c for a, b, c in zip(p, q, self._random_in(flat, scale)))
            legs = [(p, mid), (mid, q)]
            if all(self._crossings(flat, a, b) is not None for a, b in legs):
                try:
                    self._certify(flat, S, [mid])
                except PositivityViolation:
                    continue
                self._log("perturb", flat=flat, attempt=attempt, via=mid)
                return [p, mid, q]
        raise NonGenericError(f"no generic path in {flat} after {self.perturb_budget} attempts")

    def _epsilon_point(self, flat: Flat, p0: tuple, c: tuple, S: frozenset) -> tuple:
        dist = []
        cf = np.array([float(v) for v in c])
        for h in self.hyperplanes:
            val = float(la.dot(h.row, c) - h.value)
            if val != 0:
                n = np.array([float(v) for v in h.row])
                dist.append(abs(val) / math.sqrt(n @ self._dual @ n))
        eps = 0.5 * min(dist) if dist else 0.5
        diff = np.array([float(a - b) for a, b in zip(p0, c)])
        g = np.array([[float(v) for v in row] for row in self.gram_x])
        norm = math.sqrt(max(diff @ g @ diff, 0.0))
        s0 = 1.0 if norm == 0 else min(1.0, 0.9 * eps / norm)
        for attempt in range(self.perturb_budget):
            s = Q(s0).limit_denominator(4096) * Q(64 - attempt, 64)
            jitter = self._random_in(flat, Q(1, 64) * Q(eps).limit_denominator(4096) * s) if attempt else (0,) * len(c)
            e = tuple(ci + s * (pi - ci) + ji for ci, pi, ji in zip(c, p0, jitter))
            if self._crossings(flat, p0, e) is None:
                continue
            try:
                self._certify(flat, S, [e])
            except PositivityViolation:
                if attempt == self.perturb_budget - 1:
                    raise
                continue
            return e
        raise NonGenericError(f"no generic epsilon point in {flat}")

    # -- numerics -----------------------------------------------------
    def _radius(self, z: np.ndarray, step: CrossStep) -> np.ndarray:
        u = np.array([float(v) for v in step.u])
        best = np.full(z.shape[0], RADIUS_CAP / 0.25)
        if self._h_rows.size:
            nu = self._h_rows @ u
            mask = np.abs(nu) > 1e-14
            for j in step.exclude:
                mask[j] = False
            if mask.any():
                t = (self._h_vals[mask][None, :] - z @ self._h_rows[mask].T) / nu[mask][None, :]
                best = np.minimum(best, np.abs(t).min(axis=1))
        if self._s_rows.size:
            au = self._s_rows @ u
            re = (z @ self._s_rows.T).real + self._s_shift[None, :]
            for j in range(len(self.slabs)):
                if abs(au[j]) < 1e-14:
                    continue
                rj = re[:, j]
                d = np.where(rj <= 0, -rj, np.where(rj >= 1, rj - 1, np.inf)) / abs(au[j])
                best = np.minimum(best, d)
        return 0.25 * best

    def residue_values(self, F: Callable, chain: tuple, z: np.ndarray, level: Optional[int] = None):
        """Nested residue of ``F`` along ``chain`` at points ``z`` of the last flat; (value, magnitude)."""
        if level is None:
            level = len(chain)
        if level == 0:
            v = np.asarray(F(z), dtype=complex)
            return v, np.abs(v)
        step = chain[level - 1]
        u = np.array([float(x) for x in step.u])
        rad = self._radius(z, step)
        t = rad[:, None] * self._roots_of_unity[None, :]
        pts = z[:, None, :] + t[:, :, None] * u[None, None, :]
        v, mag = self.residue_values(F, chain, pts.reshape(-1, z.shape[1]), level - 1)
        n = self.n_circle
        v = v.reshape(-1, n)
        mag = mag.reshape(-1, n)
        return (t * v).mean(axis=1), (np.abs(t) * mag).mean(axis=1)

    def bundle_values(self, F: Callable, terms: list, z: np.ndarray):
        tot = np.zeros(z.shape[0], dtype=complex)
        scale = np.zeros(z.shape[0])
        for tm in terms:
            v, m = self.residue_values(F, tm.chain, z)
            tot += float(tm.coef) * v
            scale += abs(float(tm.coef)) * m
        return tot, scale

    def _vanishes(self, flat: Flat, base: tuple, terms: list, n: int = 3) -> bool:
        B = np.array([[float(v) for v in b] for b in flat.direction])
        p = np.array([float(v) for v in base])
        y = self.rng.normal(scale=1.0, size=(n, flat.dim))
        z = p[None, :] + 1j * (y @ B)
        tot, scale = self.bundle_values(self.F, terms, z.astype(complex))
        return bool(np.all(np.abs(tot) <= self.vanish_rel * scale + 1e-300))

    # -- algorithm ----------------------------------------------------
    def run(self) -> ShiftResult:
        r = self.rs.rank
        V = Flat.whole(r)
        wt = Q(1, len(self.starts))
        current = {V: [Term((), wt, p) for p in self.starts]}
        pieces, dropped = [], []
        self._log("start", at=[[str(v) for v in p] for p in self.starts], plan=self.plan)
        for _ in range(r + 1):
            nxt: dict = {}
            for flat in sorted(current, key=lambda f: (f.dim, str(f))):
                self._process(flat, current[flat], nxt, pieces, dropped)
            current = nxt
            if not current:
                break
        return ShiftResult(pieces, self.events, dropped)

    def _process(self, flat: Flat, terms: list, nxt: dict, pieces: list, dropped: list) -> None:
        S = self.positivity_roots(flat)
        bases = sorted({t.base for t in terms})
        p0 = bases[0] if self.plan == "lexmin" else bases[-1]
        bundle = []
        for tm in terms:
            if tm.base != p0:
                self._emit(flat, tm, self._path(flat, tm.base, p0, S), nxt)
            bundle.append(Term(tm.chain, tm.coef, p0))
        wd = self.w.word if self.w is not None else None
        c = flat.center(self.gram_x)
        if flat.dim == 0:
            pieces.append(Piece(flat, c, p0, bundle, "point", wd))
            return
        if self._vanishes(flat, p0, bundle):
            dropped.append(flat)
            self._log("vanish", flat=flat, n_terms=len(bundle))
            return
        e = self._epsilon_point(flat, p0, c, S)
        path = self._path(flat, p0, e, S)
        for tm in bundle:
            self._emit(flat, tm, path, nxt)
        pieces.append(Piece(flat, c, e, [Term(t.chain, t.coef, e) for t in bundle], "integral", wd))
        self._log("piece", flat=flat, center=c, at=e, n_terms=len(bundle))

    # -- evaluation ---------------------------------------------------
    def evaluate(self, piece: Piece, F: Optional[Callable] = None, tol: float = 1e-10,
                 radius: float = DEFAULT_RADIUS) -> QuadResult:
        F = self.F if F is None else F
        p = np.array([float(v) for v in piece.base])
        if piece.kind == "point":
            v, _ = self.bundle_values(F, piece.terms, p[None, :].astype(complex))
            return QuadResult(complex(v[0]), 0.0, 1, True)
        B = np.array([[float(v) for v in b] for b in piece.flat.direction])
        d = piece.flat.dim

        def g(y):
            z = p[None, :] + 1j * (y @ B)
            return self.bundle_values(F, piece.terms, z.astype(complex))[0]

        res = integrate(g, d, tol=tol * (2 * math.pi) ** d, radius=radius)
        return res.scaled((2 * math.pi) ** (-d))


def contour_integral(rs: RootSystem, F: Callable, base: Sequence, tol: float = 1e-10,
                     radius: float = DEFAULT_RADIUS) -> QuadResult:
    """``(2 pi)^{-r} int_{R^r} F(base + i y) dy`` in coroot coordinates."""
    p = np.array([float(v) for v in base])
    r = rs.rank
    res = integrate(lambda y: np.asarray(F((p[None, :] + 1j * y).astype(complex)), dtype=complex),
                    r, tol=tol * (2 * math.pi) ** r, radius=radius)
    return res.scaled((2 * math.pi) ** (-r))


def write_audit(path: str, events: list) -> None:
    with open(path, "a") as fh:
        for e in events:
            fh.write(json.dumps(e, default=str) + "\n")


# ---------------------------------------------------------------- Y-masses

def y_masses(rs: RootSystem, seed: int = 0) -> tuple[dict, list]:
    """Point masses ``{c: Y({c})}`` of the eta-functional, ``c`` in coroot coordinates.

    Only the point pieces of the shift are evaluated; the integrand has no
    test function, so the residues are the masses themselves.
    """
    eng = ResidueEngine(rs, eta_kernel(rs), seed=seed)
    res = eng.run()
    out: dict = {}
    for pc in res.pieces:
        if pc.kind == "point":
            out[pc.center] = out.get(pc.center, 0.0) + eng.evaluate(pc).value
    return out, res.events


_Y_CACHE: dict = {}


def _masses_cached(sub: RootSystem, seed: int) -> dict:
    key = (tuple(tuple(int(v) for v in row) for row in sub.cartan), seed)
    if key not in _Y_CACHE:
        _Y_CACHE[key] = y_masses(sub, seed)[0]
    return _Y_CACHE[key]


def y_mass(L, seed: int = 0) -> complex:
    """``Y_{Phi_L, c_L}({c_L})`` computed in the sub-system of ``Phi_L``; 1 when ``L = V``."""
    from .residual import levi_root_system
    if L.dim == L.rs.rank:
        return 1.0 + 0j
    sub, _, c_sub = levi_root_system(L)
    return complex(_masses_cached(sub, seed).get(tuple(sub.to_x(c_sub)), 0.0))


def y_mass_report(rs: RootSystem, orbit_table: Optional[dict] = None, seed: int = 0,
                  threshold: float = 1e-10) -> list:
    """Y-masses over every W-image of each residual orbit, with the positivity check."""
    from .residual import nilpotent_orbits, stabilizer_data
    rows = []
    for o in nilpotent_orbits(rs, orbit_table):
        reps = []
        for w, M in stabilizer_data(o.subspace).images:
            m = y_mass(M, seed)
            reps.append({"w": list(w.word), "center": [str(v) for v in M.center],
                         "mass": m.real, "imag": m.imag})
        best = max(r["mass"] for r in reps)
        rows.append({"label": o.label, "marks": list(o.marks), "representatives": reps,
                     "max_mass": best, "positive": best > threshold})
    return rows


def xy_relation_check(rs: RootSystem, c: Sequence, w: WeylElement, fs: Sequence, tol: float = 1e-8,
                      radius: float = 0.1, seed: int = 0) -> dict:
    """Compare ``X_{wc}(f)`` with ``Y_c(A_{wc}(f) o w)`` at a residual point ``c`` (root coordinates).

    The left side is the sum of the omega-shift pieces centred at ``wc``;
    the right side is ``Y({c}) A_{wc}(f)(wc)``, the average evaluated by a
    circle mean since its singularities at ``wc`` are removable.
    """
    c = _qt(c)
    wc = w.act(c)
    wc_x = tuple(rs.to_x(wc))
    mass = y_masses(rs, seed)[0].get(tuple(rs.to_x(c)), 0.0)
    d = generic_direction(rs.rank)
    rows = []
    for f in fs:
        eng = ResidueEngine(rs, omega_kernel(rs) * f, seed=seed)
        res = eng.run()
        lhs = sum((eng.evaluate(pc, tol=tol).value for pc in res.pieces if pc.center == wc_x), 0j)
        avg = A_c(rs, wc, f)
        p = np.array([[float(v) for v in wc_x]], dtype=complex)
        rhs = complex(mass * circle_mean(avg, p, d, radius)[0])
        rows.append({"lhs": lhs, "rhs": rhs, "abs_diff": abs(lhs - rhs)})
    ok = all(r["abs_diff"] <= tol * max(1.0, abs(r["rhs"])) for r in rows)
    return {"center": [str(v) for v in c], "w": list(w.word), "y_mass": complex(mass),
            "rows": rows, "passed": ok}
