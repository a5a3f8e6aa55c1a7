"""Spectral side: residual measures, orbit contributions and the decomposition check."""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from functools import lru_cache
from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Optional, Sequence

import numpy as np

from . import _linalg as la
from .analytic import (RhoBackend, TestFunction, as_points, c_hecke, circle_mean, fixator,
                       generic_direction, get_backend, integrand_family, r_function)
from .engine import Flat, ResidueEngine, contour_integral, write_audit
from ._parallel import pmap
from .quadrature import DEFAULT_RADIUS, ZERO, QuadResult, integrate
from .residual import NilpotentOrbit, ResidualSubspace, nilpotent_orbits
from .rootsys import RootSystem, WeylElement, dominant_representative, enumerate_weyl

SCHEMA_VERSION = 1


# ---------------------------------------------------------------- measures

@lru_cache(maxsize=None)
def _x_basis(L) -> np.ndarray:
    """Canonical basis of V^L in coroot coordinates (rows)."""
    rs = L.rs
    rows = [rs.to_x(b) for b in L.direction]
    flat = Flat.from_equations(rs.rank, _orth_rows(rs, rows), [Q(0)] * (rs.rank - len(rows)))
    return np.array([[float(v) for v in b] for b in flat.direction]).reshape(len(rows), rs.rank)


def _orth_rows(rs: RootSystem, rows) -> list:
    """Integer covectors (in x-coordinates) cutting out span(rows)."""
    from . import _linalg as la
    if not rows:
        return [[Q(int(i == j)) for j in range(rs.rank)] for i in range(rs.rank)]
    return la.nullspace([list(r) for r in rows], rs.rank)


def generic_a_order(L, orbit: NilpotentOrbit) -> int:
    """Component-group order used in the density of nu_L.

    For a distinguished orbit this is |A_o|.  Otherwise it is the group of
    the distinguished Levi orbit at a generic point of L^t; when c_L is the
    regular point of Phi_L that group is trivial because the center of a
    Levi of an adjoint group is connected.
    """
    if orbit.distinguished or L.dim == 0 or not L.phi_L:
        return orbit.a_order
    from .residual import levi_root_system
    rs = L.rs
    simple = levi_root_system(L)[1]
    if all(rs.pairing(i, L.center) == 1 for i in simple):
        return 1
    warnings.warn(f"non-regular Levi orbit for {orbit.label}; using |A_o| = {orbit.a_order}")
    return orbit.a_order


def nu_prefactor(L, orbit: NilpotentOrbit) -> Q:
    """|W(Phi_L)_c| / |A| * |prod' a(c)| / |prod' (a(c) + 1)| over a in Phi_L."""
    rs = L.rs
    vals = rs.pairings(L.center)
    num, den = Q(1), Q(1)
    for i in L.phi_L:
        a = vals[i]
        if a != 0:
            num *= a
        if a + 1 != 0:
            den *= a + 1
    return Q(len(fixator(L)), generic_a_order(L, orbit)) * abs(num) / abs(den)


def measure_jacobian(L) -> Q:
    """dlam^L = J dy: Lebesgue measure on V^L with dlam = dlam^L x dlam_L.

    ``dlam_L`` on V/V^L is normalized by the coroot lattice of Phi_L and
    ``y`` are coordinates in the canonical basis of V^L.
    """
    rs = L.rs
    if L.dim == 0 or not L.phi_L:
        return Q(1)
    from .residual import levi_root_system
    simple = levi_root_system(L)[1]
    npos = len(rs.positive)
    N = [[Q(int(v)) * (1 if i < npos else -1) for v in rs.coroot_x[i % npos]] for i in simple]
    Nt = [list(c) for c in zip(*N)]
    U = la.matmul(Nt, la.inverse(la.matmul(N, Nt)))  # N U = I
    B = [[Q(v).limit_denominator(10 ** 6) for v in row] for row in _x_basis(L)]
    return abs(la.det(B + [list(c) for c in zip(*U)]))


def _nu_raw(L, lam: np.ndarray) -> np.ndarray:
    rs = L.rs
    vals = lam @ rs.coroot_x.T.astype(float)
    out = np.ones(vals.shape[0], dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(len(rs.positive)):
            if k in L.phi_L:
                continue
            x = vals[:, k]
            out *= x * x / ((x - 1) * (x + 1))
    return out


def nu_density(L, y: np.ndarray, reg: float = 1e-2, n: int = 16) -> np.ndarray:
    """Density of nu_L against dy / (2 pi)^d at c_L + i (y @ B), without the prefactor.

    ``prod_{alpha in Phi \\ Phi_L} alpha^vee/(alpha^vee - 1)``; on L^t the factors for
    alpha and -w_L alpha are complex conjugate, so for a standard L this is
    ``prod_{Phi^+ \\ Phi_L} (c^2 + y^2) / ((c - 1)^2 + y^2)``.  Removable
    singularities are evaluated by a small circle mean.
    """
    rs = L.rs
    y = np.atleast_2d(np.asarray(y, dtype=float))
    lam = _lambda(L, y)
    out = _nu_raw(L, lam)
    vals = lam @ rs.coroot_x.T.astype(float)
    keep = [k for k in range(len(rs.positive)) if k not in L.phi_L]
    bad = ~np.isfinite(out)
    if keep:
        v = vals[:, keep]
        bad |= (np.minimum(np.abs(v - 1), np.abs(v + 1)) < 10 * reg).any(axis=1)
    if bad.any():
        B = _x_basis(L)
        d = generic_direction(L.dim) if L.dim else np.zeros(0)
        d = d / np.linalg.norm(d)
        th = np.exp(2j * np.pi * (np.arange(n) + 0.5) / n)
        yb = y[bad].astype(complex)
        pts = yb[:, None, :] + reg * th[None, :, None] * d[None, None, :]
        c = lam[bad][:, None, :] - 1j * (yb @ B)[:, None, :]
        lp = (c + 1j * (pts @ B)).reshape(-1, rs.rank)
        out[bad] = _nu_raw(L, lp).reshape(-1, n).mean(axis=1)
    return out.real


def mu_constant(L, orbit: NilpotentOrbit) -> Q:
    """|W| times the prefactor of nu_L and the Jacobian of dlam^L."""
    return len(enumerate_weyl(L.rs)) * nu_prefactor(L, orbit) * measure_jacobian(L)


def mu_density(L, orbit: NilpotentOrbit, y: np.ndarray, backend: RhoBackend,
               const: Optional[Q] = None) -> np.ndarray:
    """Density of mu = |W| nu / (r(-lam) r(lam)) against dy / (2 pi)^d at c_L + i (y @ B)."""
    rs = L.rs
    lam = _lambda(L, y)
    rr = r_function(rs, backend, lam, 1) * r_function(rs, backend, lam, -1)
    const = mu_constant(L, orbit) if const is None else const
    return (float(const) * nu_density(L, y) / rr).real


def _lambda(L, y) -> np.ndarray:
    rs = L.rs
    c = np.array([float(v) for v in rs.to_x(L.center)])
    return c[None, :] + 1j * (np.atleast_2d(y) @ _x_basis(L))


# ---------------------------------------------------------------- A_0

def A0(rs: RootSystem, f, backend: RhoBackend, radius: float = 0.25, n: int = 24):
    """lam -> |W|^{-1} sum_v c_H(v lam) r(v lam) f(v lam), evaluated by a circle mean."""
    mats = [np.asarray(w.x_matrix, dtype=float) for w in enumerate_weyl(rs)]

    def raw(x):
        x = as_points(x)
        acc = np.zeros(x.shape[0], dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            for m in mats:
                ux = x @ m.T
                acc = acc + c_hecke(rs, ux, 1) * r_function(rs, backend, ux, 1) * f(ux)
        return acc / len(mats)

    d = generic_direction(rs.rank)
    rows = rs.coroot_x.astype(float)

    def g(x):
        x = as_points(x)
        out = raw(x)
        near = np.abs(x @ rows.T).min(axis=1) < 1e-3
        if near.any():
            out[near] = circle_mean(raw, x[near], d, radius, n)
        return out

    return g


# ---------------------------------------------------------------- inner products

def direct_inner(rs: RootSystem, phi: TestFunction, psi: TestFunction, backend: RhoBackend,
                 start: Optional[Sequence] = None, tol: float = 1e-10,
                 radius: float = DEFAULT_RADIUS) -> QuadResult:
    """(theta_phi, theta_psi) as one contour integral far in the positive chamber."""
    fam = list(integrand_family(rs, phi, psi, backend).values())
    p = start if start is not None else [Q(3, 2)] * rs.rank
    return contour_integral(rs, lambda x: sum(F(x) for F in fam), p, tol=tol, radius=radius)


def spectral_term(orbit: NilpotentOrbit, phi: TestFunction, psi: TestFunction, backend: RhoBackend,
                  tol: float = 1e-10, radius: float = DEFAULT_RADIUS) -> QuadResult:
    """m_o int_{L^t} A_0(r phi^-)(-lam) A_0(r psi)(lam) d mu_L."""
    L = orbit.subspace
    rs = L.rs
    a_phi = A0(rs, phi.minus(), backend)
    a_psi = A0(rs, psi, backend)
    d = L.dim
    const = mu_constant(L, orbit)

    def g(y):
        lam = _lambda(L, y)
        return a_phi(-lam) * a_psi(lam) * mu_density(L, orbit, y, backend, const)

    res = integrate(g, d, tol=tol * (2 * math.pi) ** d / orbit.m_o, radius=radius)
    return res.scaled(orbit.m_o * (2 * math.pi) ** (-d))


def center_class(rs: RootSystem, c_x: Sequence) -> tuple:
    """Dominant representative (root coordinates) of a center given in x-coordinates."""
    return dominant_representative(rs, rs.from_x(c_x))[0]


@dataclass
class Decomposition:
    cartan_type: str
    direct: QuadResult
    engine: dict  # orbit label -> QuadResult; empty when the engine was skipped
    spectral: dict  # orbit label -> QuadResult
    remainder: QuadResult  # engine pieces whose center class is not residual
    events: list = field(default_factory=list)
    tolerance: float = 1e-6
    backend: str = "trivial"
    audit_ref: Optional[str] = None

    @property
    def engine_total(self) -> Optional[complex]:
        if not self.engine:
            return None
        return sum(v.value for v in self.engine.values()) + self.remainder.value

    @property
    def spectral_total(self) -> complex:
        return sum(v.value for v in self.spectral.values())

    @property
    def abs_diff(self) -> float:
        return abs(self.direct.value - self.spectral_total)

    @property
    def passed(self) -> bool:
        return self.abs_diff <= self.tolerance

    def as_dict(self) -> dict:
        def c(z):
            return None if z is None else [float(np.real(z)), float(np.imag(z))]
        return {
            "schema_version": SCHEMA_VERSION,
            "type": self.cartan_type,
            "rho": self.backend,
            "orbits": list(self.spectral),
            "per_orbit_values": [{"label": k, "spectral": c(self.spectral[k].value),
                                  "spectral_error": self.spectral[k].error,
                                  "engine": c(self.engine[k].value) if self.engine else None}
                                 for k in self.spectral],
            "direct_value": c(self.direct.value),
            "spectral_value": c(self.spectral_total),
            "engine_value": c(self.engine_total),
            "engine_remainder": c(self.remainder.value) if self.engine else None,
            "abs_diff": self.abs_diff,
            "tolerances": {"match": self.tolerance, "direct_error": self.direct.error},
            "status": "PASS" if self.passed else "FAIL",
            "audit_ref": self.audit_ref,
        }


def engine_by_orbit(rs: RootSystem, phi: TestFunction, psi: TestFunction, backend: RhoBackend,
                    orbits: list, plan: str = "lexmin", seed: int = 0, tol: float = 1e-10,
                    radius: float = DEFAULT_RADIUS, start: Optional[Sequence] = None):
    """Run the shift algorithm for every w and group the pieces by center class."""
    keys = {o.subspace.center: o.label for o in orbits}
    out = {o.label: QuadResult(0j, 0.0, 0, True) for o in orbits}
    rem = QuadResult(0j, 0.0, 0, True)
    events = []
    fam = integrand_family(rs, phi, psi, backend)
    for w in enumerate_weyl(rs):
        eng = ResidueEngine(rs, fam[w.word], w=w, plan=plan, seed=seed, start=start)
        res = eng.run()
        events.extend(res.events)
        for pc in res.pieces:
            val = eng.evaluate(pc, tol=tol, radius=radius)
            lab = keys.get(center_class(rs, pc.center))
            if lab is None:
                rem = rem + val
            else:
                out[lab] = out[lab] + val
    return out, rem, events


def verify_decomposition(rs: RootSystem, phi: TestFunction, psi: TestFunction,
                         backend: Optional[RhoBackend] = None, orbit_table: Optional[dict] = None,
                         plan: str = "lexmin", seed: int = 0, tol: float = 1e-10,
                         radius: float = DEFAULT_RADIUS, match_tol: float = 1e-6,
                         engine: str = "always", audit: Optional[str] = None) -> Decomposition:
    """Direct inner product against the orbit sum; ``engine`` is "always" or "on_failure".

    A failed comparison always runs the shift algorithm so that its audit
    log is attached (and written to ``audit`` when given).
    """
    backend = backend or get_backend("trivial")
    orbits = nilpotent_orbits(rs, orbit_table)
    direct = direct_inner(rs, phi, psi, backend, tol=tol, radius=radius)
    vals = pmap(lambda o: spectral_term(o, phi, psi, backend, tol, radius), orbits)
    spec = {o.label: v for o, v in zip(orbits, vals)}
    dec = Decomposition(rs.cartan_type, direct, {}, spec, ZERO, [], match_tol, backend.name)
    if engine == "always" or not dec.passed:
        dec.engine, dec.remainder, dec.events = engine_by_orbit(rs, phi, psi, backend, orbits,
                                                                plan, seed, tol, radius)
        if audit:
            write_audit(audit, dec.events)
            dec.audit_ref = audit
    return dec


def decomposition_csv(dec: Decomposition) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf)
    wr.writerow(["orbit", "engine_re", "engine_im", "spectral_re", "spectral_im"])
    for k in dec.spectral:
        e = dec.engine[k].value if dec.engine else complex("nan")
        s = dec.spectral[k].value
        wr.writerow([k, e.real, e.imag, s.real, s.imag])
    return buf.getvalue()


def to_json(obj: dict) -> str:
    return json.dumps(obj, indent=1, default=str)


# ---------------------------------------------------------------- positivity

def form_positivity(rs: RootSystem, phis: Sequence[TestFunction], backend: Optional[RhoBackend] = None,
                    orbit_table: Optional[dict] = None, tol: float = 1e-10, floor: float = -1e-8) -> list:
    """<phi, phi>_o per orbit; each must be real and at least ``floor``."""
    backend = backend or get_backend("trivial")
    rows = []
    for o in nilpotent_orbits(rs, orbit_table):
        for k, phi in enumerate(phis):
            v = spectral_term(o, phi, phi, backend, tol).value
            rows.append({"label": o.label, "index": k, "value": v.real, "imag": v.imag,
                         "ok": v.real >= floor and abs(v.imag) <= 1e-8 * max(1.0, abs(v))})
    return rows


def density_samples(L, rng: np.random.Generator, n: int = 1000, scale: float = 3.0) -> np.ndarray:
    """nu_L density (with prefactor dropped) at ``n`` random points of L^t."""
    if L.dim == 0:
        return nu_density(L, np.zeros((1, 0)))
    return nu_density(L, rng.normal(scale=scale, size=(n, L.dim)))


# ---------------------------------------------------------------- normalization

def normalization_factor(rs: RootSystem, x, backend: Optional[RhoBackend] = None) -> np.ndarray:
    """|W|^{-1} c_H(-lam) r(-lam) at coroot coordinates ``x``."""
    backend = backend or get_backend("trivial")
    x = as_points(x)
    return c_hecke(rs, x, -1) * r_function(rs, backend, x, -1) / len(enumerate_weyl(rs))


# ---------------------------------------------------------------- Satake star

class ExpSum:
    """``t -> sum_k a_k q^{mu_k . x}``: a Satake image on coroot coordinates."""

    def __init__(self, mus, coef, q: float = 2.0):
        self.mus = np.atleast_2d(np.asarray(mus, dtype=float))
        self.coef = np.asarray(coef, dtype=complex)
        self.q = q

    def __call__(self, x) -> np.ndarray:
        x = as_points(x)
        return np.exp(math.log(self.q) * (x @ self.mus.T)) @ self.coef

    def star(self) -> "ExpSum":
        """``S(h*)(t) = conj(S(h)(conj(t)^{-1}))``, i.e. ``a*_mu = conj(a_{-mu})``."""
        return ExpSum(-self.mus, np.conj(self.coef), self.q)

    @classmethod
    def random_invariant(cls, rs: RootSystem, rng: np.random.Generator, n_orbits: int = 2,
                         bound: int = 2, q: float = 2.0) -> "ExpSum":
        mats = [np.asarray(w.x_matrix, dtype=np.int64) for w in enumerate_weyl(rs)]
        mus, coef = [], []
        for _ in range(n_orbits):
            mu = rng.integers(-bound, bound + 1, size=rs.rank)
            a = complex(rng.normal(), rng.normal())
            # x(w lam) = M x(lam), so the orbit of the covector mu is {mu M}
            for m in {tuple(int(v) for v in mu @ M) for M in mats}:
                mus.append(m)
                coef.append(a)
        return cls(mus, coef, q)


def conj_witness(L) -> Optional[WeylElement]:
    """An element w with w c_L = -c_L fixing V^L pointwise, so -w lam = conj(lam) on L^t."""
    neg = tuple(-v for v in L.center)
    for w in enumerate_weyl(L.rs):
        if w.act(L.center) == neg and all(w.act(b) == b for b in L.direction):
            return w
    return None


def satake_star_check(orbit: NilpotentOrbit, rng: np.random.Generator, n_params: int = 10,
                      n_elements: int = 5, tol: float = 1e-10) -> dict:
    """chi_lam(h*) = conj(chi_lam(h)) at random tempered lam, with the exact conj witness."""
    L = orbit.subspace
    rs = L.rs
    w = conj_witness(L)
    exact = w is not None
    hs = [ExpSum.random_invariant(rs, rng) for _ in range(n_elements)]
    worst = 0.0
    cx = rs.to_x(L.center)
    for _ in range(n_params):
        y = [Q(int(rng.integers(-20, 21)), int(rng.integers(1, 8))) for _ in range(L.dim)]
        yv = tuple(sum((c * b[k] for c, b in zip(y, L.direction)), Q(0)) for k in range(rs.rank))
        if exact:
            # -conj(c + i y) = -c + i y = w (c + i y)
            exact = w.act(yv) == yv
        lam = np.array([[float(c) + 1j * float(v) for c, v in zip(cx, rs.to_x(yv))]])
        for h in hs:
            a = complex(h.star()(lam)[0])
            b = np.conj(complex(h(lam)[0]))
            worst = max(worst, abs(a - b) / max(1.0, abs(b)))
    return {"label": orbit.label, "witness": list(w.word) if w is not None else None,
            "exact_conj": bool(exact), "max_rel_err": float(worst),
            "passed": bool(exact and worst <= tol)}


# ---------------------------------------------------------------- discrete spectrum

def discrete_spectrum_report(rs: RootSystem, backend: Optional[RhoBackend] = None,
                             orbit_table: Optional[dict] = None) -> list:
    """One row per distinguished orbit: parameter, point mass of mu, m_o and |W(L)|."""
    from .residual import stabilizer_data
    backend = backend or get_backend("trivial")
    rows = []
    for o in nilpotent_orbits(rs, orbit_table):
        if not o.distinguished:
            continue
        L = o.subspace
        mass = float(mu_density(L, o, np.zeros((1, 0)), backend)[0])
        rows.append({"label": o.label, "marks": list(o.marks),
                     "lambda": [str(v) for v in L.center], "mu_mass": mass, "m_o": o.m_o,
                     "weyl_L_order": stabilizer_data(L).weyl_L_order, "a_order": o.a_order,
                     "table_hit": o.table_hit})
    return rows


def rows_csv(rows: list) -> str:
    buf = io.StringIO()
    if rows:
        wr = csv.DictWriter(buf, fieldnames=list(rows[0]))
        wr.writeheader()
        for r in rows:
            wr.writerow({k: " ".join(map(str, v)) if isinstance(v, list) else v for k, v in r.items()})
    return buf.getvalue()
