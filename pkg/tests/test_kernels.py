from __future__ import annotations

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from resspec import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba path disabled")


def _atom_args(rng, m=50, a=3, j=2, r=2):
    x = rng.normal(size=(m, r)) + 1j * rng.normal(size=(m, r))
    x[0] = 0  # removable point of the sinc factor
    return (x, rng.normal(size=a) + 1j * rng.normal(size=a), rng.normal(size=(a, r)),
            rng.normal(size=(a, j, r)), rng.uniform(0.3, 1.0, size=(a, j)),
            rng.integers(0, 9, size=(a, j)).astype(np.int64))


@needs_numba
def test_atoms_parity():
    args = _atom_args(np.random.default_rng(0))
    a = np.array([K._atoms_nb(*args)]).ravel()
    b = K._atoms_np(*args)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


@needs_numba
def test_affine_prod_parity():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(40, 3)) + 1j * rng.normal(size=(40, 3))
    rows = rng.integers(-2, 3, size=(4, 3)).astype(float)
    shifts = rng.normal(size=4)
    powers = np.array([1, -1, 2, -2], dtype=np.int64)
    assert np.allclose(K._affine_prod_nb(x, rows, shifts, powers), K._affine_prod_np(x, rows, shifts, powers),
                       rtol=1e-12)


@needs_numba
def test_rho_parity():
    s = np.array([0.5 + 3j, 2.0 + 0j, -1.5 + 7j, 0.1 - 20j])
    assert np.allclose(K._rho_riemann_nb(s, 64, 12), K._rho_riemann_np(s, 64, 12), rtol=1e-12)


def test_lgamma_known():
    z = np.array([1.0, 2.0, 5.0, 0.5])
    want = [0.0, 0.0, np.log(24.0), 0.5 * np.log(np.pi)]
    assert np.allclose(K.lgamma(z).real, want, atol=1e-13)


def test_env_flag_selects_numpy():
    code = ("import json, numpy as np; from resspec import _kernels as K; from resspec.analytic import get_backend;"
            "print(json.dumps([K.BACKEND, [str(v) for v in get_backend('riemann')(np.array([0.5+3j, 2.0]))]]))")
    outs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, RESSPEC_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        outs[flag] = json.loads(res.stdout)
    assert outs["0"][0] == "numpy"
    a = np.array([complex(v) for v in outs["0"][1]])
    b = np.array([complex(v) for v in outs["1"][1]])
    assert np.allclose(a, b, rtol=1e-12)
