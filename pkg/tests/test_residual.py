from __future__ import annotations

import json
from fractions import Fraction as Q

import pytest

from resspec.residual import (AffineSubspace, distinguished_orbits, enumerate_residual, is_residual,
                              levi_root_system, load_orbit_table, negative_in_orbit, nilpotent_orbits,
                              stabilizer_data)
from resspec.rootsys import build_root_system, enumerate_weyl

# residual classes match nilpotent orbits of the dual group
COUNTS = {"A1": 2, "A2": 3, "B2": 4, "G2": 5, "A3": 5, "B3": 8, "C3": 7}
DISTINGUISHED = {"A1": 1, "A2": 1, "B2": 1, "G2": 2, "A3": 1, "B3": 2, "C3": 1}


@pytest.mark.parametrize("t", sorted(COUNTS))
def test_counts(t):
    rs = build_root_system(t)
    assert len(enumerate_residual(rs)) == COUNTS[t]
    assert len(distinguished_orbits(rs)) == DISTINGUISHED[t]


@pytest.mark.parametrize("t", ["A2", "B2", "G2", "A3"])
def test_certificates(t):
    for L in enumerate_residual(build_root_system(t)):
        cert = is_residual(L)
        assert cert.residual and cert == L.certificate
        assert cert.n1 == cert.n0 + L.codim


def test_g2_centers():
    rs = build_root_system("G2")
    pts = {L.marks for L in enumerate_residual(rs) if L.dim == 0}
    labels = {o.marks: o.label for o in nilpotent_orbits(rs)}
    assert {labels[m] for m in pts} == {"G2", "G2(a1)"}


def test_non_residual_point():
    rs = build_root_system("A2")
    L = AffineSubspace.through(rs, rs.from_x((Q(1, 3), Q(1, 5))))
    assert not is_residual(L).residual


def test_orbit_stabilizer():
    rs = build_root_system("B2")
    W = enumerate_weyl(rs)
    for L in enumerate_residual(rs):
        sd = stabilizer_data(L)
        assert len(W) == sd.m_o * len(sd.stab)
        assert len(sd.stab) % len(sd.fix) == 0
        assert sd.weyl_L_order == len(sd.stab) // len(sd.fix)


def test_regular_point_is_self_dual():
    # the regular-orbit center is W-conjugate to its negative
    rs = build_root_system("A2")
    top = next(L for L in enumerate_residual(rs) if L.dim == 0)
    w = negative_in_orbit(top)
    assert w is not None
    assert top.image(w).key() == top.negated().key()


def test_levi_root_system():
    rs = build_root_system("B2")
    for L in enumerate_residual(rs):
        sub, simple, c_sub = levi_root_system(L) if L.phi_L else (None, [], ())
        if sub is not None:
            assert sub.rank == L.codim
            assert len(sub.roots) == len(L.phi_L)


def test_orbit_table_override(tmp_path):
    table = load_orbit_table()
    table["B2"] = [e for e in table["B2"] if e["label"] != "[2,2]"]
    path = tmp_path / "t.json"
    path.write_text(json.dumps(table))
    with pytest.warns(UserWarning):
        orbits = nilpotent_orbits(build_root_system("B2"), load_orbit_table(path))
    miss = [o for o in orbits if not o.table_hit]
    assert len(miss) == 1 and miss[0].a_order == 1
