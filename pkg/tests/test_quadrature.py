from __future__ import annotations

import math

import numpy as np
import pytest

from resspec.quadrature import ZERO, QuadResult, integrate


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_gaussian(dim):
    res = integrate(lambda y: np.exp(-np.sum(y * y, axis=1)), dim, tol=1e-12)
    assert res.converged
    assert abs(res.value - math.pi ** (dim / 2)) < 1e-11


def test_algebraic_decay():
    # int dy / (1 + y^2)^4 = 5 pi / 16
    res = integrate(lambda y: 1 / (1 + y[:, 0] ** 2) ** 4, 1, tol=1e-10)
    assert res.converged and abs(res.value - 5 * math.pi / 16) < 1e-9


def test_oscillating_complex():
    # Fourier transform of a gaussian
    res = integrate(lambda y: np.exp(-y[:, 0] ** 2 + 1j * y[:, 0]), 1, tol=1e-12)
    assert abs(res.value - math.sqrt(math.pi) * math.exp(-0.25)) < 1e-11


def test_sinh_map():
    res = integrate(lambda y: 1 / (1 + y[:, 0] ** 2), 1, tol=1e-8, map="sinh", radius=1e9, max_level=7)
    assert abs(res.value - math.pi) < 1e-6


def test_dim_zero():
    res = integrate(lambda y: np.full(y.shape[0], 2.5 + 1j), 0)
    assert res.value == 2.5 + 1j and res.n_points == 1


def test_result_arithmetic():
    a = QuadResult(1 + 1j, 1e-12, 10, True)
    b = (a + ZERO).scaled(-2)
    assert b.value == -2 - 2j and b.error == 2e-12 and b.n_points == 10
    assert not (a + QuadResult(0j, 0.0, 1, False)).converged
