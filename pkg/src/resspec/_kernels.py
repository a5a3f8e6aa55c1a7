"""Hot numeric kernels with a numba path and a pure-numpy path.

Set ``RESSPEC_NUMBA=0`` to force numpy; the default uses numba when it
imports.  Both paths take and return the same arrays.
"""
from __future__ import annotations

import math
import os

import numpy as np

_want = os.environ.get("RESSPEC_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    if not _want:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

BACKEND = "numba" if HAVE_NUMBA else "numpy"

# Lanczos g = 7, n = 9
_LANCZOS = np.array([
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
])

# B_{2k} / (2k)!
_BERN = np.array([
    1 / 6 / 2, -1 / 30 / 24, 1 / 42 / 720, -1 / 30 / 40320, 5 / 66 / 3628800,
    -691 / 2730 / 479001600, 7 / 6 / 87178291200, -3617 / 510 / 20922789888000,
    43867 / 798 / 6402373705728000, -174611 / 330 / 2432902008176640000,
    854513 / 138 / 1.1240007277776077e21, -236364091 / 2730 / 6.204484017332394e23,
    8553103 / 6 / 4.0329146112660565e26, -23749461029 / 870 / 3.0488834461171384e29,
])


# ---------------------------------------------------------------- gamma

@njit(cache=True)
def _lgamma_nb(z: complex) -> complex:
    # valid for Re z >= 0.5
    z = z - 1.0
    x = _LANCZOS[0] + 0j
    for i in range(1, 9):
        x += _LANCZOS[i] / (z + i)
    t = z + 7.5
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * np.log(t) - t + np.log(x)


def _lgamma_np(z: np.ndarray) -> np.ndarray:
    z = z - 1.0
    x = np.full(z.shape, _LANCZOS[0], dtype=complex)
    for i in range(1, 9):
        x = x + _LANCZOS[i] / (z + i)
    t = z + 7.5
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * np.log(t) - t + np.log(x)


# ---------------------------------------------------------------- zeta

@njit(cache=True, fastmath=True)
def _sm1_zeta_nb(s: complex, n_terms: int, k_terms: int) -> complex:
    """(s - 1) zeta(s) by Euler-Maclaurin; finite at s = 1."""
    acc = 0j
    for n in range(1, n_terms):
        ln = math.log(n)
        mag = math.exp(-s.real * ln)
        acc += complex(mag * math.cos(s.imag * ln), -mag * math.sin(s.imag * ln))
    N = float(n_terms)
    lnN = math.log(N)
    Ns = np.exp(-s * lnN)
    tail = Ns / 2
    fall = s  # s (s+1) ... (s+2k-2)
    powk = Ns / N  # N^{-s-1}
    for k in range(k_terms):
        tail += _BERN[k] * fall * powk
        fall = fall * (s + 2 * k + 1) * (s + 2 * k + 2)
        powk = powk / (N * N)
    return (s - 1) * (acc + tail) + N * Ns


def _sm1_zeta_np(s: np.ndarray, n_terms: int, k_terms: int) -> np.ndarray:
    n = np.arange(1, n_terms, dtype=float)
    acc = np.exp(-np.multiply.outer(s, np.log(n))).sum(axis=-1)
    N = float(n_terms)
    Ns = np.exp(-s * math.log(N))
    tail = Ns / 2
    fall = s.copy()
    powk = Ns / N
    for k in range(k_terms):
        tail = tail + _BERN[k] * fall * powk
        fall = fall * (s + 2 * k + 1) * (s + 2 * k + 2)
        powk = powk / (N * N)
    return (s - 1) * (acc + tail) + N * Ns


# ---------------------------------------------------------------- rho

@njit(cache=True)
def _rho_riemann_nb(s_arr, n_terms, k_terms):
    out = np.empty(s_arr.shape[0], dtype=np.complex128)
    for i in range(s_arr.shape[0]):
        s = s_arr[i]
        if s.real < 0.5:
            s = 1.0 - s
        lg = _lgamma_nb(s / 2)
        pref = s * np.exp(lg - (s / 2) * math.log(math.pi))
        out[i] = pref * _sm1_zeta_nb(s, n_terms, k_terms)
    return out


def _rho_riemann_np(s_arr, n_terms, k_terms):
    s = np.where(s_arr.real < 0.5, 1.0 - s_arr, s_arr)
    lg = _lgamma_np(s / 2)
    pref = s * np.exp(lg - (s / 2) * math.log(math.pi))
    return pref * _sm1_zeta_np(s, n_terms, k_terms)


def rho_riemann(s, n_terms: int, k_terms: int) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(s, dtype=np.complex128).ravel())
    if HAVE_NUMBA:
        out = _rho_riemann_nb(a, n_terms, k_terms)
    else:
        out = _rho_riemann_np(a, n_terms, k_terms)
    return out.reshape(np.shape(s))


def lgamma(z) -> np.ndarray:
    """log Gamma(z) with reflection for Re z < 1/2."""
    z = np.asarray(z, dtype=complex)
    refl = z.real < 0.5
    zz = np.where(refl, 1 - z, z)
    lg = _lgamma_np(zz)
    return np.where(refl, np.log(np.pi / np.sin(np.pi * z)) - lg, lg)


# ---------------------------------------------------------------- atoms

@njit(cache=True)
def _ipow(z: complex, n: int) -> complex:
    out = 1 + 0j
    while n > 0:
        if n & 1:
            out *= z
        z *= z
        n >>= 1
    return out


@njit(cache=True)
def _atoms_nb(x, coeff, xi0, forms, h, npow):
    """sum_a coeff[a] e^{xi0[a].x} prod_j ((1 - e^{-h t}) / (h t))^N, t = forms[a, j].x"""
    m, r = x.shape
    na, nj = h.shape
    out = np.zeros(m, dtype=np.complex128)
    for p in range(m):
        acc = 0j
        for a in range(na):
            e = 0j
            for k in range(r):
                e += xi0[a, k] * x[p, k]
            val = coeff[a] * np.exp(e)
            for j in range(nj):
                if npow[a, j] == 0:
                    continue
                t = 0j
                for k in range(r):
                    t += forms[a, j, k] * x[p, k]
                z = h[a, j] * t
                if abs(z) < 1e-3:
                    s = 1 - z / 2 + z * z / 6 - z * z * z / 24 + z * z * z * z / 120
                else:
                    s = (1 - np.exp(-z)) / z
                val *= _ipow(s, npow[a, j])
            acc += val
        out[p] = acc
    return out


def _sinc_np(z: np.ndarray) -> np.ndarray:
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    big = -np.expm1(-zs) / zs
    ser = 1 - z / 2 + z * z / 6 - z ** 3 / 24 + z ** 4 / 120
    return np.where(small, ser, big)


def _atoms_np(x, coeff, xi0, forms, h, npow):
    # x (m, r); forms (a, j, r)
    e = x @ xi0.T  # (m, a)
    val = coeff[None, :] * np.exp(e)
    t = np.einsum("ajr,mr->maj", forms, x)
    s = _sinc_np(h[None, :, :] * t)
    val = val * np.prod(s ** npow[None, :, :], axis=2)
    return val.sum(axis=1)


def atoms(x, coeff, xi0, forms, h, npow) -> np.ndarray:
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=np.complex128)))
    if coeff.shape[0] == 0:
        return np.zeros(x.shape[0], dtype=np.complex128)
    if HAVE_NUMBA:
        return _atoms_nb(x, coeff, xi0, forms, h, npow)
    return _atoms_np(x, coeff, xi0, forms, h, npow)


# ---------------------------------------------------------------- rational products

@njit(cache=True)
def _affine_prod_nb(x, rows, shifts, powers):
    m, r = x.shape
    out = np.ones(m, dtype=np.complex128)
    for p in range(m):
        acc = 1 + 0j
        for i in range(rows.shape[0]):
            v = shifts[i] + 0j
            for k in range(r):
                v += rows[i, k] * x[p, k]
            pw = powers[i]
            if pw > 0:
                for _ in range(pw):
                    acc *= v
            else:
                for _ in range(-pw):
                    acc /= v
        out[p] = acc
    return out


def _affine_prod_np(x, rows, shifts, powers):
    v = x @ rows.T + shifts[None, :]
    return np.prod(v.astype(complex) ** powers[None, :], axis=1)


def affine_prod(x, rows, shifts, powers) -> np.ndarray:
    """prod_i (rows[i].x + shifts[i])^powers[i] at each point."""
    x = np.ascontiguousarray(np.atleast_2d(np.asarray(x, dtype=np.complex128)))
    if rows.shape[0] == 0:
        return np.ones(x.shape[0], dtype=np.complex128)
    if HAVE_NUMBA:
        return _affine_prod_nb(x, np.ascontiguousarray(rows, dtype=np.float64),
                               np.ascontiguousarray(shifts, dtype=np.float64),
                               np.ascontiguousarray(powers, dtype=np.int64))
    return _affine_prod_np(x, rows.astype(float), shifts.astype(float), powers.astype(np.int64))
