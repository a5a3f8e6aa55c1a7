from __future__ import annotations

import json

import numpy as np
import pytest

from resspec.analytic import get_backend, random_pair
from resspec.residual import nilpotent_orbits
from resspec.rootsys import build_root_system
from resspec.spectrum import (ExpSum, conj_witness, decomposition_csv, density_samples,
                              discrete_spectrum_report, mu_density, normalization_factor, nu_density,
                              rows_csv, satake_star_check, spectral_term, verify_decomposition)


def _orbits(t):
    return {o.label: o for o in nilpotent_orbits(build_root_system(t))}


def test_nu_density_a1():
    o = _orbits("A1")
    y = np.array([[0.0], [0.5], [3.0]])
    # tempered line: prod over +-alpha of x/(x-1) at x = iy
    assert np.allclose(nu_density(o["[1,1]"].subspace, y), (y[:, 0] ** 2) / (1 + y[:, 0] ** 2))
    assert np.allclose(nu_density(o["[2]"].subspace, np.zeros((1, 0))), 1.0)


def test_nu_density_removable_point():
    # the A2 line through c with alpha^vee(c) = 1 for one root crosses x = +-1 elsewhere
    L = _orbits("A2")["[2,1]"].subspace
    v = nu_density(L, np.linspace(-2, 2, 41)[:, None])
    assert np.all(np.isfinite(v))


@pytest.mark.parametrize("t", ["A2", "B2", "G2"])
def test_density_nonnegative(t):
    rng = np.random.default_rng(0)
    for o in nilpotent_orbits(build_root_system(t)):
        assert density_samples(o.subspace, rng, n=200).min() >= -1e-12


def test_mu_density_riemann_positive():
    b = get_backend("riemann")
    o = _orbits("A1")["[1,1]"]
    v = mu_density(o.subspace, o, np.linspace(-5, 5, 11)[:, None], b)
    # nu vanishes to second order at y = 0
    assert abs(v[5]) < 1e-14 and np.all(np.delete(v, 5) > 0)


def test_normalization_factor():
    rs = build_root_system("A1")
    # |W|^{-1} c_H(-lam) at x = 2 is (1/2)(1/2)
    assert abs(normalization_factor(rs, [[2.0]])[0] - 0.25) < 1e-15


@pytest.mark.parametrize("t,n", [("A1", 1), ("A2", 1), ("B2", 1), ("G2", 2)])
def test_discrete_report(t, n):
    rows = discrete_spectrum_report(build_root_system(t))
    assert len(rows) == n
    assert all(r["mu_mass"] > 0 and r["table_hit"] for r in rows)
    assert rows_csv(rows).count("\n") == n + 1


def test_hermitian_symmetry():
    rs = build_root_system("A1")
    phi, psi = random_pair(rs, np.random.default_rng(4))
    b = get_backend("trivial")
    for o in nilpotent_orbits(rs):
        a = spectral_term(o, phi, psi, b, 1e-10).value
        c = spectral_term(o, psi, phi, b, 1e-10).value
        assert abs(a - np.conj(c)) < 1e-9


def test_expsum_star():
    rs = build_root_system("B2")
    rng = np.random.default_rng(8)
    h = ExpSum.random_invariant(rs, rng)
    t = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    assert np.allclose(h.star()(t), np.conj(h(-np.conj(t))))


@pytest.mark.parametrize("t", ["A2", "B2", "G2"])
def test_satake_star(t):
    rng = np.random.default_rng(1)
    for o in nilpotent_orbits(build_root_system(t)):
        assert conj_witness(o.subspace) is not None
        out = satake_star_check(o, rng, 4, 3)
        assert out["passed"], out


def test_verify_a1_roundtrip(tmp_path):
    rs = build_root_system("A1")
    phi, psi = random_pair(rs, np.random.default_rng(0))
    audit = tmp_path / "audit.jsonl"
    dec = verify_decomposition(rs, phi, psi, tol=1e-10, audit=str(audit))
    assert dec.passed and dec.abs_diff < 1e-8
    assert abs(dec.engine_total - dec.direct.value) < 1e-8
    d = json.loads(json.dumps(dec.as_dict(), default=str))
    assert d["status"] == "PASS" and {r["label"] for r in d["per_orbit_values"]} == {"[1,1]", "[2]"}
    assert audit.read_text().strip()
    assert decomposition_csv(dec).count("\n") >= 2
