"""Time the hot kernels on the numba and numpy paths.

Each path runs in its own interpreter because ``RESSPEC_NUMBA`` is read at
import.  Usage: ``python benchmarks/bench_kernels.py [--points N] [--repeat K]``.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from resspec import _kernels as K

m, repeat = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
x = rng.normal(size=(m, 2)) + 1j * rng.normal(size=(m, 2))
atom = (rng.normal(size=4) + 0j, rng.normal(size=(4, 2)), rng.normal(size=(4, 2, 2)),
        rng.uniform(0.3, 1.0, size=(4, 2)), np.full((4, 2), 8, dtype=np.int64))
rows = rng.integers(-2, 3, size=(6, 2)).astype(float)
shifts = rng.normal(size=6)
powers = np.array([1, -1, 1, -1, 2, -2], dtype=np.int64)
s = 0.5 + 1j * rng.normal(scale=20, size=m // 10)
cases = {
    "atoms": lambda: K.atoms(x, *atom),
    "affine_prod": lambda: K.affine_prod(x, rows, shifts, powers),
    "rho_riemann": lambda: K.rho_riemann(s, 64, 12),
}
out = {"backend": K.BACKEND}
for name, fn in cases.items():
    fn()  # compile / warm up
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps(out))
"""


def run(flag: str, points: int, repeat: int) -> dict:
    env = dict(os.environ, RESSPEC_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", CHILD, str(points), str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    nb, npy = run("1", args.points, args.repeat), run("0", args.points, args.repeat)
    print(f"{'kernel':<12} {nb['backend']:>10} {npy['backend']:>10} {'speedup':>8}")
    for k in ("atoms", "affine_prod", "rho_riemann"):
        print(f"{k:<12} {nb[k] * 1e3:9.2f}ms {npy[k] * 1e3:9.2f}ms {npy[k] / nb[k]:7.2f}x")


if __name__ == "__main__":
    main()
