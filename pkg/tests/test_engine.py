from __future__ import annotations

from fractions import Fraction as Q

import numpy as np
import pytest

from resspec.analytic import TestFunction, omega_kernel, random_pair
from resspec.engine import ResidueEngine, contour_integral, xy_relation_check, y_mass, y_masses
from resspec.residual import enumerate_residual
from resspec.rootsys import build_root_system, enumerate_weyl


def _shift_total(eng, tol=1e-10):
    res = eng.run()
    return sum((eng.evaluate(pc, tol=tol).value for pc in res.pieces), 0j), res


@pytest.mark.parametrize("t", ["A1", "A2"])
def test_shift_preserves_integral(t):
    rs = build_root_system(t)
    f = random_pair(rs, np.random.default_rng(3))[0]
    F = omega_kernel(rs) * f
    eng = ResidueEngine(rs, F)
    total, res = _shift_total(eng, tol=1e-9)
    direct = contour_integral(rs, F, eng.start, tol=1e-9).value
    assert abs(total - direct) < 1e-7
    assert any(pc.kind == "point" for pc in res.pieces)


def test_start_independence():
    rs = build_root_system("A1")
    F = omega_kernel(rs) * random_pair(rs, np.random.default_rng(5))[0]
    a, _ = _shift_total(ResidueEngine(rs, F, start=(Q(3, 2),)))
    b, _ = _shift_total(ResidueEngine(rs, F, start=[(Q(3, 2),), (Q(7, 3),)]))
    assert abs(a - b) < 1e-9


def test_zero_function():
    rs = build_root_system("A2")
    eng = ResidueEngine(rs, omega_kernel(rs) * TestFunction.zero(2))
    total, _ = _shift_total(eng)
    assert total == 0


@pytest.mark.parametrize("t,mass", [("A1", 0.5), ("A2", 1 / 3), ("B2", 3 / 8), ("G2", 5 / 12)])
def test_regular_y_mass(t, mass):
    rs = build_root_system(t)
    top = max(y_masses(rs)[0].items(), key=lambda kv: sum(kv[0]))
    assert abs(top[1] - mass) < 1e-9


def test_y_mass_whole_space_and_levi():
    rs = build_root_system("B2")
    for L in enumerate_residual(rs):
        m = y_mass(L)
        if L.dim == rs.rank:
            assert m == 1
        assert m.real > 0 and abs(m.imag) < 1e-12


def test_xy_relation_a1():
    rs = build_root_system("A1")
    fs = list(random_pair(rs, np.random.default_rng(2)))
    for w in enumerate_weyl(rs):
        out = xy_relation_check(rs, (Q(1, 2),), w, fs)
        assert out["passed"], out
