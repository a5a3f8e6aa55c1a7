"""Kernel algebra: c-functions, rho backends, r-ratios, averaging operators, test functions.

Points of ``V_C`` are complex arrays of *coroot coordinates*
``x_i = alpha_i^vee(lambda)``, shape ``(m, rank)``.  A positive coroot is
the integer row ``rs.coroot_x[k]``, so ``alpha_k^vee(lambda) = n_k . x``,
and ``w`` acts by ``x -> w.x_matrix @ x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels as K
from . import _linalg as la
from .rootsys import RootSystem, WeylElement, enumerate_weyl, inversion_set

Evaluable = Callable[[np.ndarray], np.ndarray]


def as_points(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=complex))


# ---------------------------------------------------------------- rho backends

class PrecisionError(RuntimeError):
    pass


class RhoBackend:
    name = "abstract"
    trivial = False

    def __call__(self, s) -> np.ndarray:
        raise NotImplementedError

    def in_zero_strip(self, re_s: float) -> bool:
        """Whether zeros may occur at real part ``re_s``."""
        return False


class TrivialRho(RhoBackend):
    """rho = 1."""

    name = "trivial"
    trivial = True

    def __call__(self, s) -> np.ndarray:
        return np.ones(np.shape(s), dtype=complex)


class CompletedRiemann(RhoBackend):
    """rho(s) = s (s - 1) pi^{-s/2} Gamma(s/2) zeta(s).

    Euler-Maclaurin for zeta and Lanczos for Gamma on Re s >= 1/2; the
    functional equation supplies the rest.
    """

    name = "riemann"
    k_terms = 12

    def __init__(self, prec: float = 1e-12):
        self.prec = float(prec)

    def in_zero_strip(self, re_s: float) -> bool:
        return 0.0 < re_s < 1.0

    def terms_for(self, s: np.ndarray) -> int:
        s = np.asarray(s, dtype=complex)
        if s.size == 0:
            return 16
        t = np.where(s.real < 0.5, 1 - s, s)
        amax = float(np.max(np.abs(t))) + 2 * self.k_terms + 2
        sig = float(np.min(t.real))
        # bound on the first omitted Euler-Maclaurin term, relative to zeta
        b = abs(K._BERN[self.k_terms]) if self.k_terms < len(K._BERN) else 1e-30
        for n in (16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512, 1024, 2048):
            err = b * amax ** (2 * self.k_terms + 1) * n ** (-sig - 2 * self.k_terms - 1)
            if err < self.prec:
                return n
        raise PrecisionError(f"zeta precision {self.prec:g} not reachable; attained {err:.3g}")

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        return K.rho_riemann(s, self.terms_for(s), self.k_terms)

    def unreflected(self, s) -> np.ndarray:
        """Same function without the functional equation (Euler-Maclaurin at s itself).

        Only Gamma is reflected; used to test ``rho(s) = rho(1 - s)``.
        """
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        n = self.terms_for(np.concatenate([s, 1 - s]))
        lg = K.lgamma(s / 2)
        return s * np.exp(lg - (s / 2) * math.log(math.pi)) * K._sm1_zeta_np(s, n, self.k_terms)


def get_backend(name: str = "trivial", zeta_prec: float = 1e-12) -> RhoBackend:
    if isinstance(name, RhoBackend):
        return name
    if name == "trivial":
        return TrivialRho()
    if name == "riemann":
        return CompletedRiemann(zeta_prec)
    raise ValueError(f"unknown rho backend {name!r}")


def rho_eval(backend: RhoBackend, s) -> np.ndarray:
    return backend(s)


# ---------------------------------------------------------------- affine functionals

@dataclass(frozen=True)
class AffineFunctional:
    """``x -> row . x + shift`` on coroot coordinates; exact rational data."""

    row: tuple
    shift: Q = Q(0)

    @classmethod
    def coroot(cls, rs: RootSystem, k: int, shift=0) -> "AffineFunctional":
        return cls(tuple(int(v) for v in rs.coroot_x[k]), Q(shift))

    def exact(self, x: Sequence) -> Q:
        return sum((Q(a) * Q(b) for a, b in zip(self.row, x)), Q(0)) + self.shift

    def __call__(self, x) -> np.ndarray:
        return as_points(x) @ np.array(self.row, dtype=float) + float(self.shift)

    def compose(self, m: np.ndarray) -> "AffineFunctional":
        """Functional ``x -> self(m @ x)`` (``m`` exact integer or rational)."""
        r = tuple(sum(Q(self.row[i]) * Q(m[i][j]) for i in range(len(self.row))) for j in range(len(self.row)))
        return AffineFunctional(r, self.shift)


# ---------------------------------------------------------------- test functions

@dataclass(frozen=True)
class TestFunction:
    """Sum of spline-sinc atoms in coroot coordinates.

    atom = coeff * exp(xi0 . x) * prod_j ((1 - exp(-h_j t_j)) / (h_j t_j))^N_j,
    ``t_j = forms[j] . x``.  Entire, with vertical decay of order N_j.
    """

    __test__ = False  # not a pytest class

    coeff: np.ndarray  # (a,)
    xi0: np.ndarray  # (a, r)
    forms: np.ndarray  # (a, j, r)
    h: np.ndarray  # (a, j)
    npow: np.ndarray  # (a, j)

    @property
    def rank(self) -> int:
        return self.xi0.shape[1]

    @classmethod
    def zero(cls, rank: int) -> "TestFunction":
        return cls(np.zeros(0, complex), np.zeros((0, rank)), np.zeros((0, 0, rank)),
                   np.zeros((0, 0)), np.zeros((0, 0), dtype=np.int64))

    @classmethod
    def atom(cls, coeff: complex, forms, h=1.0, npow=8, xi0=None, centered: bool = True) -> "TestFunction":
        forms = np.atleast_2d(np.asarray(forms, dtype=float))
        nj, r = forms.shape
        h = np.broadcast_to(np.asarray(h, dtype=float), (nj,)).copy()
        npow = np.broadcast_to(np.asarray(npow, dtype=np.int64), (nj,)).copy()
        x0 = np.zeros(r) if xi0 is None else np.asarray(xi0, dtype=float)
        if centered:
            # sinh form: exp(h t / 2)^N (1 - e^{-ht})^N / (ht)^N, even in t
            x0 = x0 + ((h * npow / 2)[:, None] * forms).sum(axis=0)
        return cls(np.array([coeff], complex), x0[None, :], forms[None], h[None], npow[None])

    @classmethod
    def random(cls, rank: int, rng: np.random.Generator, n_atoms: int = 2, npow: int = 8,
               h: float = 0.5, shift_scale: float = 0.3, forms=None) -> "TestFunction":
        """Random sum of coordinate atoms with random coefficients and small exponential shifts."""
        forms = np.eye(rank) if forms is None else np.asarray(forms, dtype=float)
        out = cls.zero(rank)
        for _ in range(n_atoms):
            c = complex(rng.normal(), rng.normal()) / math.sqrt(2 * n_atoms)
            xi = rng.uniform(-shift_scale, shift_scale, size=rank)
            hh = h * rng.uniform(0.8, 1.25, size=forms.shape[0])
            out = out + cls.atom(c, forms, hh, npow, xi0=xi)
        return out

    def __call__(self, x) -> np.ndarray:
        return K.atoms(as_points(x), self.coeff, self.xi0, self.forms, self.h, self.npow)

    def _padded(self, nj: int):
        a = self.coeff.shape[0]
        if self.forms.shape[1] == nj:
            return self.forms, self.h, self.npow
        f = np.zeros((a, nj, self.rank))
        h = np.ones((a, nj))
        n = np.zeros((a, nj), dtype=np.int64)
        k = self.forms.shape[1]
        f[:, :k], h[:, :k], n[:, :k] = self.forms, self.h, self.npow
        return f, h, n

    def __add__(self, other: "TestFunction") -> "TestFunction":
        nj = max(self.forms.shape[1], other.forms.shape[1])
        f1, h1, n1 = self._padded(nj)
        f2, h2, n2 = other._padded(nj)
        return TestFunction(np.concatenate([self.coeff, other.coeff]), np.concatenate([self.xi0, other.xi0]),
                            np.concatenate([f1, f2]), np.concatenate([h1, h2]), np.concatenate([n1, n2]))

    def __mul__(self, other):
        if not isinstance(other, TestFunction):
            return TestFunction(self.coeff * complex(other), self.xi0, self.forms, self.h, self.npow)
        a, b = self.coeff.shape[0], other.coeff.shape[0]
        if a == 0 or b == 0:
            return TestFunction.zero(self.rank)
        ia, ib = np.repeat(np.arange(a), b), np.tile(np.arange(b), a)
        return TestFunction(self.coeff[ia] * other.coeff[ib], self.xi0[ia] + other.xi0[ib],
                            np.concatenate([self.forms[ia], other.forms[ib]], axis=1),
                            np.concatenate([self.h[ia], other.h[ib]], axis=1),
                            np.concatenate([self.npow[ia], other.npow[ib]], axis=1))

    __rmul__ = __mul__

    def compose(self, m: np.ndarray) -> "TestFunction":
        """``x -> self(m @ x)``."""
        m = np.asarray(m, dtype=float)
        return TestFunction(self.coeff, self.xi0 @ m, self.forms @ m, self.h, self.npow)

    def minus(self) -> "TestFunction":
        """phi^-(x) = conj(phi(conj x))."""
        return TestFunction(np.conj(self.coeff), self.xi0, self.forms, self.h, self.npow)

    def weyl(self, w: WeylElement) -> "TestFunction":
        """``lambda -> self(w lambda)``."""
        return self.compose(w.x_matrix)

    @property
    def decay_order(self) -> int:
        if self.npow.size == 0:
            return 0
        return int(self.npow.sum(axis=1).min())


def isotropic_forms(rs: RootSystem) -> np.ndarray:
    """Rows t = sqrt(2) G^{1/2} A^{-1} x: orthonormal coordinates for the W-invariant form.

    Atoms built on these forms decay at the same rate in every Weyl image.
    For A1 the single form is x itself.
    """
    g = np.array([[float(v) for v in row] for row in rs.gram])
    vals, vecs = np.linalg.eigh(g)
    root = vecs @ np.diag(np.sqrt(vals)) @ vecs.T
    return math.sqrt(2) * root @ rs._cartan_inv_np


def random_pair(rs: RootSystem, rng: np.random.Generator, **kw) -> tuple:
    """Two random test functions on isotropic forms."""
    f = isotropic_forms(rs)
    return (TestFunction.random(rs.rank, rng, forms=f, **kw), TestFunction.random(rs.rank, rng, forms=f, **kw))


# ---------------------------------------------------------------- kernel expressions

@dataclass(frozen=True)
class KernelExpr:
    """scalar * prod rational^p * prod rho(.)^p * prod test functions."""

    rank: int
    rational: tuple = ()  # ((AffineFunctional, power), ...)
    rho: tuple = ()
    backend: RhoBackend = field(default_factory=TrivialRho)
    scalar: complex = 1.0
    tests: tuple = ()

    def __mul__(self, other):
        if isinstance(other, KernelExpr):
            return KernelExpr(self.rank, self.rational + other.rational, self.rho + other.rho,
                              self.backend, self.scalar * other.scalar, self.tests + other.tests)
        if isinstance(other, TestFunction):
            return KernelExpr(self.rank, self.rational, self.rho, self.backend, self.scalar,
                              self.tests + (other,))
        return KernelExpr(self.rank, self.rational, self.rho, self.backend, self.scalar * other, self.tests)

    __rmul__ = __mul__

    def compose(self, m) -> "KernelExpr":
        m = np.asarray(m)
        return KernelExpr(self.rank, tuple((a.compose(m), p) for a, p in self.rational),
                          tuple((a.compose(m), p) for a, p in self.rho), self.backend, self.scalar,
                          tuple(t.compose(m.astype(float)) for t in self.tests))

    def _arrays(self, factors):
        if not factors:
            z = np.zeros((0, self.rank))
            return z, np.zeros(0), np.zeros(0, dtype=np.int64)
        rows = np.array([[float(v) for v in a.row] for a, _ in factors])
        shifts = np.array([float(a.shift) for a, _ in factors])
        pw = np.array([p for _, p in factors], dtype=np.int64)
        return rows, shifts, pw

    def rational_part(self, x) -> np.ndarray:
        rows, shifts, pw = self._arrays(self.rational)
        return K.affine_prod(as_points(x), rows, shifts, pw)

    def rho_part(self, x) -> np.ndarray:
        x = as_points(x)
        out = np.ones(x.shape[0], dtype=complex)
        if self.backend.trivial or not self.rho:
            return out
        for a, p in self.rho:
            out = out * self.backend(a(x)) ** p
        return out

    def __call__(self, x) -> np.ndarray:
        x = as_points(x)
        out = self.scalar * self.rational_part(x) * self.rho_part(x)
        for t in self.tests:
            out = out * t(x)
        return out

    def poles(self) -> list[tuple[AffineFunctional, int]]:
        """Rational pole hyperplanes with their orders."""
        acc: dict = {}
        for a, p in self.rational:
            acc[a] = acc.get(a, 0) + p
        return [(a, -p) for a, p in acc.items() if p < 0]

    def rho_denominators(self) -> list[AffineFunctional]:
        if self.backend.trivial:
            return []
        acc: dict = {}
        for a, p in self.rho:
            acc[a] = acc.get(a, 0) + p
        return [a for a, p in acc.items() if p < 0]


# ---------------------------------------------------------------- c-functions

class Pole:
    """Marker for an exact pole hit."""

    def __repr__(self) -> str:
        return "Pole"


POLE = Pole()


def coroot_values(rs: RootSystem, x) -> np.ndarray:
    """alpha^vee(lambda) for positive roots, shape (m, npos)."""
    return as_points(x) @ rs.coroot_x.T.astype(float)


def c_hecke(rs: RootSystem, x, sign: int = 1) -> np.ndarray:
    """c_H(lambda) (sign +1) or c_H(-lambda) (sign -1) = prod (s+1)/s at s = +-alpha^vee(lambda)."""
    s = sign * coroot_values(rs, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.prod((s + 1) / s, axis=1)


def c_hecke_exact(rs: RootSystem, x: Sequence, sign: int = 1):
    """Exact value at rational coroot coordinates, or POLE."""
    out = Q(1)
    for n in rs.coroot_x:
        s = sign * sum((Q(int(a)) * Q(b) for a, b in zip(n, x)), Q(0))
        if s == 0:
            return POLE
        out *= (s + 1) / s
    return out


def easycomp_check(rs: RootSystem, w: WeylElement, lam: Sequence, f: Callable = lambda s: s + 1) -> bool:
    """Exact check of phi(w lam)/phi(lam) = prod_{Phi(w)} f(-a)/f(a), phi = prod_{Phi^+} f.

    ``lam`` is a rational vector in root coordinates.
    """
    npos = len(rs.positive)
    vals = rs.pairings(lam)[:npos]
    wvals = rs.pairings(w.act(lam))[:npos]
    lhs = Q(math.prod(f(v) for v in wvals)) / math.prod(f(v) for v in vals)
    rhs = Q(1)
    for i in inversion_set(w):
        rhs *= Q(f(-vals[i])) / f(vals[i])
    return lhs == rhs


# ---------------------------------------------------------------- r-ratios

def r_ratio(rs: RootSystem, w: WeylElement, backend: RhoBackend) -> KernelExpr:
    """r(lam) / r(w lam) = prod_{Phi(w)} rho(alpha^vee) / rho(alpha^vee + 1)."""
    rho = []
    for k in sorted(inversion_set(w)):
        rho.append((AffineFunctional.coroot(rs, k, 0), 1))
        rho.append((AffineFunctional.coroot(rs, k, 1), -1))
    return KernelExpr(rs.rank, (), tuple(rho), backend)


def r_function(rs: RootSystem, backend: RhoBackend, x, sign: int = 1) -> np.ndarray:
    """r(sign * lambda) = prod_{alpha > 0} rho(sign * alpha^vee(lambda))."""
    if backend.trivial:
        return np.ones(as_points(x).shape[0], dtype=complex)
    s = sign * coroot_values(rs, x)
    return np.prod(backend(s), axis=1)


def completed_zeta(backend: RhoBackend, s) -> np.ndarray:
    """Lambda(s) = rho(s) / (s (s - 1))."""
    s = np.asarray(s, dtype=complex)
    return backend(s) / (s * (s - 1))


def c_global(rs: RootSystem, backend: RhoBackend, x) -> np.ndarray:
    """c(lam) = prod 1 / (s^2 Lambda(-s)), s = alpha^vee(lam)."""
    s = coroot_values(rs, x)
    return np.prod(1.0 / (s * s * completed_zeta(backend, -s)), axis=1)


@dataclass
class LedgerClass:
    key: tuple  # (constant value on vL, coefficients on a basis of V^{vL})
    multiplicity: int
    numerators: list  # root indices beta with rho(beta^vee) restricting to key
    denominators: list  # root indices alpha with rho(alpha^vee + 1) restricting to key

    @property
    def constant(self) -> bool:
        return all(c == 0 for c in self.key[1])

    @property
    def value(self) -> Q:
        return self.key[0]


@dataclass
class RestrictionLedger:
    classes: list
    constant_product: complex
    total_in: int
    total_out: int

    def nonconstant(self) -> list:
        return [c for c in self.classes if not c.constant]

    def net_denominators(self) -> list:
        return [c for c in self.nonconstant() if c.multiplicity < 0]


def restrict_functional(rs: RootSystem, root: int, shift: Q, point: Sequence, direction: Sequence) -> tuple:
    """Restriction of ``alpha^vee + shift`` to ``point + span(direction)`` (root-basis vectors)."""
    const = rs.pairing(root, point) + shift
    return const, tuple(rs.pairing(root, b) for b in direction)


def restrict_ratio(rs: RootSystem, w: WeylElement, v: WeylElement, L, backend: Optional[RhoBackend] = None
                   ) -> RestrictionLedger:
    """Group the factors of r(lam)/r(w lam) by their restriction to vL and net the powers."""
    point = v.act(L.center)
    direction = [v.act(b) for b in L.direction]
    classes: dict = {}
    inv = sorted(inversion_set(w))
    for k in inv:
        kn = restrict_functional(rs, k, Q(0), point, direction)
        kd = restrict_functional(rs, k, Q(1), point, direction)
        classes.setdefault(kn, LedgerClass(kn, 0, [], []))
        classes.setdefault(kd, LedgerClass(kd, 0, [], []))
        classes[kn].multiplicity += 1
        classes[kn].numerators.append(k)
        classes[kd].multiplicity -= 1
        classes[kd].denominators.append(k)
    out = sorted(classes.values(), key=lambda c: (not c.constant, c.key))
    const = 1.0 + 0j
    if backend is not None and not backend.trivial:
        for c in out:
            if c.constant and c.multiplicity:
                const *= complex(backend(np.array([complex(c.value)]))[0]) ** c.multiplicity
    return RestrictionLedger(out, const, len(inv), len(inv))


def problematic_roots(rs: RootSystem, w: WeylElement, L) -> frozenset[int]:
    """S(w, L): roots of Phi(w) whose rho(alpha^vee + 1) survives, nonconstant, in the denominator on L."""
    e = rs.element(())
    led = restrict_ratio(rs, w, e, L)
    out = set()
    for c in led.net_denominators():
        out.update(c.denominators)
    return frozenset(out)


def cancellation_violations(rs: RootSystem, w: WeylElement, v: WeylElement, L) -> list:
    """Roots alpha in a nonconstant net-denominator class on vL with alpha^vee(v c_L) < 0."""
    led = restrict_ratio(rs, w, v, L)
    vc = v.act(L.center)
    bad = []
    for c in led.net_denominators():
        for k in c.denominators:
            if rs.pairing(k, vc) < 0:
                bad.append(k)
    return bad


def cancellation_scan(rs: RootSystem, literal: bool = False) -> dict:
    """Exhaustive check of the cancellation claim over residual L and (v, w).

    A pair is in scope when ``X_{v c_L}`` is numerically nonzero (proxy at
    ``v``) and ``R_{phi,w}`` does not vanish on ``vL`` (proxy at
    ``w v w_0``).  ``literal=True`` drops the first condition.
    """
    from .residual import enumerate_residual
    W = enumerate_weyl(rs)
    w0 = max(W, key=lambda u: u.length)
    n_pairs = n_scope = 0
    bad = []
    for L in enumerate_residual(rs):
        for v in W:
            x_ok = literal or nonvanishing_proxy(v, L)
            for w in W:
                n_pairs += 1
                if not (x_ok and nonvanishing_proxy(w * v * w0, L)):
                    continue
                n_scope += 1
                for k in cancellation_violations(rs, w, v, L):
                    bad.append({"center": [str(c) for c in L.center], "v": list(v.word),
                                "w": list(w.word), "root": k})
    return {"pairs": n_pairs, "in_scope": n_scope, "violations": bad}


# ---------------------------------------------------------------- averaging operators

def average(rs: RootSystem, group: Sequence[WeylElement], f: Evaluable, sign: int = 1) -> Evaluable:
    """lambda -> |G|^{-1} sum_{u in G} c_H^{sign}(u lambda) f(u lambda)."""
    mats = [np.asarray(u.x_matrix, dtype=float) for u in group]

    def g(x):
        x = as_points(x)
        acc = np.zeros(x.shape[0], dtype=complex)
        for m in mats:
            ux = x @ m.T
            acc = acc + c_hecke(rs, ux, sign) * f(ux)
        return acc / len(mats)

    return g


def isotropy(rs: RootSystem, c: Sequence) -> list[WeylElement]:
    """W_c for a rational point c (root coordinates)."""
    c = tuple(Q(v) for v in c)
    return [w for w in enumerate_weyl(rs) if w.act(c) == c]


def fixator(L) -> list[WeylElement]:
    rs = L.rs
    return [w for w in enumerate_weyl(rs)
            if w.act(L.center) == L.center and all(w.act(b) == b for b in L.direction)]


def A_c(rs: RootSystem, c: Sequence, f: Evaluable, sign: int = 1) -> Evaluable:
    return average(rs, isotropy(rs, c), f, sign)


def A_L(L, f: Evaluable, sign: int = 1) -> Evaluable:
    return average(L.rs, fixator(L), f, sign)


def circle_mean(g: Evaluable, x, direction, radius: float = 0.25, n: int = 24) -> np.ndarray:
    """Mean of g over a circle around each point; equals g there when g is holomorphic nearby."""
    x = as_points(x)
    d = np.asarray(direction, dtype=complex)
    d = d / np.linalg.norm(d)
    th = 2 * np.pi * (np.arange(n) + 0.5) / n
    pts = (x[:, None, :] + radius * np.exp(1j * th)[None, :, None] * d[None, None, :]).reshape(-1, x.shape[1])
    return g(pts).reshape(x.shape[0], n).mean(axis=1)


GENERIC_DIRECTION_SEED = 20240611


def generic_direction(rank: int, seed: int = GENERIC_DIRECTION_SEED) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.normal(size=rank) + 1j * rng.normal(size=rank)


def pole_distance(rs: RootSystem, x, exempt: Optional[Sequence[int]] = None) -> np.ndarray:
    """Distance (in coroot units) from each point to the nearest hyperplane alpha^vee = 0, -1 or 1 not exempt."""
    vals = coroot_values(rs, x)
    d = np.full(vals.shape[0], np.inf)
    ex = set(exempt or ())
    for k in range(vals.shape[1]):
        if k in ex:
            continue
        for z in (-1.0, 0.0, 1.0):
            d = np.minimum(d, np.abs(vals[:, k] - z) / np.linalg.norm(rs.coroot_x[k]))
    return d


def regularized(g: Evaluable, rank: int, radius: float = 0.25, n: int = 24, seed: int = GENERIC_DIRECTION_SEED
                ) -> Evaluable:
    """Evaluate g through a circle mean in a fixed generic direction (removes removable singularities)."""
    d = generic_direction(rank, seed)
    return lambda x: circle_mean(g, x, d, radius, n)


# ---------------------------------------------------------------- R_phi and integrands

def _rational_ratio_factors(rs: RootSystem, inv) -> tuple:
    """prod_{Phi(w)} (x+1)/(x-1): c_H(-w lam) / c_H(-lam)."""
    out = []
    for k in sorted(inv):
        out.append((AffineFunctional.coroot(rs, k, 1), 1))
        out.append((AffineFunctional.coroot(rs, k, -1), -1))
    return tuple(out)


def c_hecke_expr(rs: RootSystem, sign: int = 1) -> KernelExpr:
    fac = []
    for k in range(len(rs.positive)):
        a = AffineFunctional.coroot(rs, k, 0)
        row = tuple(sign * v for v in a.row)
        fac.append((AffineFunctional(row, Q(1)), 1))
        fac.append((AffineFunctional(row, Q(0)), -1))
    return KernelExpr(rs.rank, tuple(fac))


def build_R_phi(rs: RootSystem, phi: TestFunction, backend: RhoBackend) -> dict:
    """{w.word: R_{phi,w}} with R_{phi,w}(lam) = c_H(-w lam) phi^-(-w lam) r(lam)/r(w lam)."""
    out = {}
    ch = c_hecke_expr(rs, -1)
    fm = phi.minus()
    for w in enumerate_weyl(rs):
        m = np.asarray(w.x_matrix)
        term = ch.compose(np.rint(m).astype(int)) * fm.compose(-m) * r_ratio(rs, w, backend)
        out[w.word] = KernelExpr(rs.rank, term.rational, term.rho, backend, term.scalar, term.tests)
    return out


def R_phi(rs: RootSystem, phi: TestFunction, backend: RhoBackend) -> Evaluable:
    family = list(build_R_phi(rs, phi, backend).values())
    return lambda x: sum(k(x) for k in family)


def integrand_family(rs: RootSystem, phi: TestFunction, psi: TestFunction, backend: RhoBackend) -> dict:
    """{w.word: psi R_{phi,w} / c_H(-lam)} in reduced form.

    psi(lam) phi^-(-w lam) prod_{Phi(w)} (x+1)/(x-1) rho(x)/rho(x+1), x = alpha^vee(lam).
    """
    out = {}
    fm = phi.minus()
    for w in enumerate_weyl(rs):
        inv = inversion_set(w)
        rr = r_ratio(rs, w, backend)
        expr = KernelExpr(rs.rank, _rational_ratio_factors(rs, inv), rr.rho, backend, 1.0,
                          (psi * fm.compose(-np.asarray(w.x_matrix)),))
        out[w.word] = expr
    return out


def omega_kernel(rs: RootSystem) -> KernelExpr:
    """1 / c_H(-lam) = prod x/(x-1)."""
    fac = []
    for k in range(len(rs.positive)):
        fac.append((AffineFunctional.coroot(rs, k, 0), 1))
        fac.append((AffineFunctional.coroot(rs, k, -1), -1))
    return KernelExpr(rs.rank, tuple(fac))


def eta_kernel(rs: RootSystem) -> KernelExpr:
    """1 / (c_H(lam) c_H(-lam)) = prod x^2 / ((x-1)(x+1))."""
    fac = []
    for k in range(len(rs.positive)):
        fac.append((AffineFunctional.coroot(rs, k, 0), 2))
        fac.append((AffineFunctional.coroot(rs, k, -1), -1))
        fac.append((AffineFunctional.coroot(rs, k, 1), -1))
    return KernelExpr(rs.rank, tuple(fac))


# ---------------------------------------------------------------- nonvanishing proxy

def subspace_points(L, rng: np.random.Generator, n: int, scale: float = 1.5) -> np.ndarray:
    """Random generic complex points of L_C in coroot coordinates."""
    rs = L.rs
    c = np.array([float(v) for v in rs.to_x(L.center)])
    if L.dim == 0:
        return np.repeat(c[None, :].astype(complex), n, axis=0)
    B = np.array([[float(v) for v in rs.to_x(b)] for b in L.direction])  # (d, r)
    z = rng.normal(scale=scale, size=(n, L.dim)) + 1j * rng.normal(scale=scale, size=(n, L.dim))
    return c[None, :] + z @ B


def restricted_value(L, f: Evaluable, x) -> np.ndarray:
    """Restriction to L of an element of the local ring at L, via a small circle mean."""
    rs = L.rs
    d = generic_direction(rs.rank)
    dist = pole_distance(rs, x, exempt=[k for k in L.phi_L if k < len(rs.positive)])
    r = np.minimum(0.25, 0.25 * dist)
    out = np.empty(as_points(x).shape[0], dtype=complex)
    for i, p in enumerate(as_points(x)):
        out[i] = circle_mean(f, p[None, :], d, float(r[i]) if np.isfinite(r[i]) else 0.25, 32)[0]
    return out


def proxy_panel(rank: int, seed: int = 7, size: int = 3) -> list[TestFunction]:
    rng = np.random.default_rng(seed)
    return [TestFunction.random(rank, rng, n_atoms=1, npow=2, h=0.7, shift_scale=0.8) for _ in range(size)]


def nonvanishing_proxy(w: WeylElement, L, samples: int = 4, tol: float = 1e-8, seed: int = 11) -> bool:
    """Numeric test that A^{wL}(f) restricted to wL is not identically zero for some panel atom."""
    from .residual import AffineSubspace

    rs = L.rs
    M = AffineSubspace(rs, w.act(L.center), tuple(w.act(b) for b in L.direction))
    rng = np.random.default_rng(seed)
    pts = subspace_points(M, rng, samples, scale=0.6)
    fix = fixator(M)
    for f in proxy_panel(rs.rank):
        g = average(rs, fix, f, 1)
        vals = restricted_value(M, g, pts)
        scale = np.abs(f(pts)).max() + 1e-300
        if np.max(np.abs(vals)) > tol * scale:
            return True
    return False
