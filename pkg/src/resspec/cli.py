"""``resspec`` command line: one verb per pipeline, JSON by default.

Exit codes: 0 success, 1 a check failed, 2 bad input, 3 any other error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .analytic import get_backend, random_pair
from .engine import PERTURB_BUDGET, y_mass_report
from .quadrature import DEFAULT_RADIUS
from .residual import enumerate_residual, load_orbit_table, nilpotent_orbits, stabilizer_data
from .rootsys import CartanTypeError, build_root_system, enumerate_weyl
from .spectrum import (SCHEMA_VERSION, decomposition_csv, discrete_spectrum_report, generic_a_order,
                       measure_jacobian, mu_constant, nu_prefactor, rows_csv, satake_star_check,
                       verify_decomposition)

VERBS = ("roots", "residual", "orbits", "measures", "y-masses", "verify", "star-check", "report")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="resspec", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=VERBS)
    p.add_argument("cartan_type", help="e.g. A1, B2, G2, A1xA1")
    p.add_argument("--rho", choices=("trivial", "riemann"), default="trivial")
    p.add_argument("--zeta-prec", type=float, default=1e-12, help="target accuracy of zeta")
    p.add_argument("--tol", type=float, default=1e-8, help="quadrature tolerance")
    p.add_argument("--match-tol", type=float, default=None,
                   help="direct vs spectral tolerance (default 1e-6, or 1e-5 with riemann)")
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS, help="truncation radius")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=5, help="test-function pairs for verify")
    p.add_argument("--samples", type=int, default=10, help="tempered parameters for star-check")
    p.add_argument("--elements", type=int, default=5, help="test elements for star-check")
    p.add_argument("--engine", choices=("always", "on_failure"), default="always")
    p.add_argument("--orbit-table", default=None, help="JSON orbit table overriding the shipped one")
    p.add_argument("--audit", default=None, help="append the shift audit (JSON lines) here")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    return p


def _q(v) -> list:
    return [str(x) for x in v]


def cmd_roots(rs, args) -> dict:
    return {"rank": rs.rank, "cartan": [list(r) for r in rs.cartan],
            "gram": [_q(r) for r in rs.gram], "n_roots": len(rs.roots),
            "weyl_order": len(enumerate_weyl(rs)),
            "rows": [{"root": list(r), "coroot_x": [int(v) for v in n]}
                     for r, n in zip(rs.positive, rs.coroot_x)]}


def cmd_residual(rs, args) -> dict:
    table = load_orbit_table(args.orbit_table)
    labels = {o.subspace.center: o.label for o in nilpotent_orbits(rs, table)}
    rows = []
    for L in enumerate_residual(rs):
        cert = L.certificate
        rows.append({"label": labels.get(L.center), "center": _q(L.center), "marks": list(L.marks),
                     "dim": L.dim, "levi": list(L.levi), "n1": cert.n1, "n0": cert.n0,
                     "codim": cert.codim})
    return {"rows": rows}


def cmd_orbits(rs, args) -> dict:
    rows = [{"label": o.label, "marks": list(o.marks), "distinguished": o.distinguished,
             "levi": list(o.levi), "a_order": o.a_order, "m_o": o.m_o, "table_hit": o.table_hit}
            for o in nilpotent_orbits(rs, load_orbit_table(args.orbit_table))]
    return {"rows": rows}


def cmd_measures(rs, args) -> dict:
    rows = []
    for o in nilpotent_orbits(rs, load_orbit_table(args.orbit_table)):
        L = o.subspace
        rows.append({"label": o.label, "dim": L.dim, "a_order": o.a_order,
                     "a_generic": generic_a_order(L, o), "nu_prefactor": str(nu_prefactor(L, o)),
                     "jacobian": str(measure_jacobian(L)), "mu_constant": str(mu_constant(L, o)),
                     "m_o": o.m_o, "weyl_L_order": stabilizer_data(L).weyl_L_order,
                     "table_hit": o.table_hit})
    return {"rows": rows}


def cmd_y_masses(rs, args) -> dict:
    rows = y_mass_report(rs, load_orbit_table(args.orbit_table), seed=args.seed)
    return {"rows": rows, "status": "PASS" if all(r["positive"] for r in rows) else "FAIL"}


def cmd_verify(rs, args) -> dict:
    backend = get_backend(args.rho, args.zeta_prec)
    match = args.match_tol if args.match_tol is not None else (1e-5 if args.rho == "riemann" else 1e-6)
    table = load_orbit_table(args.orbit_table)
    rng = np.random.default_rng(args.seed)
    results = []
    for _ in range(args.pairs):
        phi, psi = random_pair(rs, rng)
        dec = verify_decomposition(rs, phi, psi, backend, table, seed=args.seed, tol=args.tol,
                                   radius=args.radius, match_tol=match, engine=args.engine,
                                   audit=args.audit)
        results.append(dec)
    out = {"results": [d.as_dict() for d in results],
           "status": "PASS" if all(d.passed for d in results) else "FAIL",
           "perturb_budget": PERTURB_BUDGET}
    out["_csv"] = "".join(decomposition_csv(d) for d in results)
    return out


def cmd_star_check(rs, args) -> dict:
    rng = np.random.default_rng(args.seed)
    rows = [satake_star_check(o, rng, args.samples, args.elements)
            for o in nilpotent_orbits(rs, load_orbit_table(args.orbit_table))]
    return {"rows": rows, "status": "PASS" if all(r["passed"] for r in rows) else "FAIL"}


def cmd_report(rs, args) -> dict:
    backend = get_backend(args.rho, args.zeta_prec)
    return {"rows": discrete_spectrum_report(rs, backend, load_orbit_table(args.orbit_table))}


COMMANDS = {"roots": cmd_roots, "residual": cmd_residual, "orbits": cmd_orbits,
            "measures": cmd_measures, "y-masses": cmd_y_masses, "verify": cmd_verify,
            "star-check": cmd_star_check, "report": cmd_report}


def _text(out: dict) -> str:
    lines = [f"{k}: {v}" for k, v in out.items() if k not in ("rows", "results")]
    for r in out.get("rows", []) + out.get("results", []):
        lines.append("  " + "  ".join(f"{k}={v}" for k, v in r.items()))
    return "\n".join(lines) + "\n"


def _emit(out: dict, fmt: str) -> None:
    csv_text = out.pop("_csv", None)
    if fmt == "csv":
        sys.stdout.write(csv_text if csv_text is not None else rows_csv(out.get("rows", [])))
    elif fmt == "text":
        sys.stdout.write(_text(out))
    else:
        sys.stdout.write(json.dumps(out, indent=1, default=str) + "\n")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        rs = build_root_system(args.cartan_type)
    except CartanTypeError as e:
        _emit({"schema_version": SCHEMA_VERSION, "error": "unknown Cartan type", "detail": str(e)}, "json")
        return 2
    head = {"schema_version": SCHEMA_VERSION, "verb": args.verb, "type": rs.cartan_type,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
    try:
        out = {**head, **COMMANDS[args.verb](rs, args)}
    except (ValueError, KeyError) as e:
        _emit({**head, "error": type(e).__name__, "detail": str(e)}, "json")
        return 2
    except Exception as e:  # any module error is reported, never swallowed
        _emit({**head, "error": type(e).__name__, "detail": str(e)}, "json")
        return 3
    _emit(out, args.format)
    return 1 if out.get("status") == "FAIL" else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
