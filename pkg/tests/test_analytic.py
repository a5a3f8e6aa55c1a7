from __future__ import annotations

from fractions import Fraction as Q

import numpy as np
import pytest

from resspec.analytic import (POLE, PrecisionError, TestFunction, c_hecke, c_hecke_exact, cancellation_scan,
                              circle_mean, completed_zeta, easycomp_check, get_backend, isotropic_forms,
                              r_function, r_ratio, random_pair)
from resspec.rootsys import build_root_system, enumerate_weyl

mpmath = pytest.importorskip("mpmath")


def _mp_rho(s):
    s = mpmath.mpc(s)
    return complex(s * (s - 1) * mpmath.pi ** (-s / 2) * mpmath.gamma(s / 2) * mpmath.zeta(s))


def test_trivial_backend():
    b = get_backend("trivial")
    assert np.all(b(np.array([0.3 + 2j, -4.0])) == 1)


@pytest.mark.parametrize("s", [2.0, 0.5 + 14.1347j, -1.5 + 3j, 0.25 - 7j, 3 + 40j])
def test_riemann_vs_mpmath(s):
    b = get_backend("riemann", 1e-12)
    want = _mp_rho(s)
    assert abs(b(np.array([s]))[0] - want) <= 1e-10 * max(1.0, abs(want))


def test_riemann_functional_equation():
    b = get_backend("riemann")
    s = np.array([0.2 + 1j, 0.7 - 5j, -2 + 3j])
    assert np.allclose(b(s), b(1 - s), rtol=1e-11)
    assert np.allclose(b.unreflected(s), b(s), rtol=1e-10)


def test_zeta_pole_and_value():
    b = get_backend("riemann")
    # Lambda(2) = pi^{-1} Gamma(1) zeta(2) = pi / 6
    assert abs(completed_zeta(b, np.array([2.0]))[0] - np.pi / 6) < 1e-12


def test_precision_error():
    with pytest.raises(PrecisionError):
        get_backend("riemann", 1e-40)(np.array([0.5 + 1e4j]))


def test_unknown_backend():
    with pytest.raises(ValueError):
        get_backend("dirichlet")


def test_c_hecke_exact_matches_float():
    rs = build_root_system("B2")
    x = (Q(1, 3), Q(2, 7))
    assert abs(float(c_hecke_exact(rs, x)) - c_hecke(rs, np.array([[1 / 3, 2 / 7]]))[0]) < 1e-13
    assert c_hecke_exact(rs, (Q(0), Q(1, 2))) is POLE


@pytest.mark.parametrize("t", ["A2", "B2", "G2"])
def test_easycomp(t):
    rs = build_root_system(t)
    lam = rs.from_x((Q(2, 7), Q(5, 13)))
    assert all(easycomp_check(rs, w, lam) for w in enumerate_weyl(rs))


def test_r_ratio_matches_r_function():
    rs = build_root_system("A2")
    b = get_backend("riemann")
    x = np.array([[0.3 + 0.7j, -0.2 + 1.1j]])
    for w in enumerate_weyl(rs):
        lhs = r_ratio(rs, w, b)(x)[0]
        rhs = r_function(rs, b, x)[0] / r_function(rs, b, x @ w.x_matrix.T)[0]
        assert abs(lhs - rhs) <= 1e-9 * abs(rhs)


def test_test_function_algebra():
    rs = build_root_system("B2")
    rng = np.random.default_rng(1)
    f, g = random_pair(rs, rng)
    x = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    assert np.allclose((f + g)(x), f(x) + g(x))
    assert np.allclose((f * g)(x), f(x) * g(x))
    assert np.allclose(f.minus()(x), np.conj(f(np.conj(x))))
    w = enumerate_weyl(rs)[3]
    assert np.allclose(f.weyl(w)(x), f(x @ w.x_matrix.T))
    assert np.all(TestFunction.zero(2)(x) == 0)


def test_isotropic_forms_invariant():
    # the quadratic form t.t is W-invariant
    rs = build_root_system("G2")
    F = isotropic_forms(rs)
    q = F.T @ F
    for w in enumerate_weyl(rs):
        m = w.x_matrix
        assert np.allclose(m.T @ q @ m, q)


def test_circle_mean_holomorphic():
    g = lambda z: np.exp(z[:, 0]) * z[:, 1] ** 2
    x = np.array([[0.3, -1.0], [1.0 + 1j, 2.0]])
    assert np.allclose(circle_mean(g, x, [1.0, 0.5j], 0.2), g(x), atol=1e-12)


@pytest.mark.parametrize("t", ["A1", "A2"])
def test_cancellation_scope(t):
    out = cancellation_scan(build_root_system(t))
    assert out["violations"] == []
    assert 0 < out["in_scope"] <= out["pairs"]


def test_cancellation_literal_fails_a2():
    out = cancellation_scan(build_root_system("A2"), literal=True)
    assert out["violations"]
