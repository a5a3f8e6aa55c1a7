"""Generator for the shipped nilpotent-orbit table.

Marks are the weighted Dynkin diagrams of nilpotent orbits of the dual Lie
algebra, read in the simple coroots of the given type.  Classical entries
come from partitions; G2 is entered by hand.  Run as a module to rewrite
``data/orbit_tables.json``.
"""
from __future__ import annotations

import json
from collections import Counter
from pathlib import Path


def partitions(n: int, cap: int | None = None):
    """Partitions of n in weakly decreasing order."""
    cap = n if cap is None else cap
    if n == 0:
        yield ()
        return
    for p in range(min(n, cap), 0, -1):
        for rest in partitions(n - p, p):
            yield (p,) + rest


def _h_values(part) -> list[int]:
    vals = []
    for p in part:
        vals.extend(range(p - 1, -p, -2))
    return sorted(vals, reverse=True)


def _label(part) -> str:
    return "[" + ",".join(map(str, part)) + "]"


def _type_a(n: int) -> list[dict]:
    out = []
    for part in partitions(n + 1):
        h = _h_values(part)
        out.append({"marks": [h[i] - h[i + 1] for i in range(n)], "label": _label(part), "a_order": 1})
    return out


def _type_b(n: int) -> list[dict]:
    """B_n: orbits of sp(2n), adjoint group PSp(2n)."""
    out = []
    for part in partitions(2 * n):
        mult = Counter(part)
        if any(p % 2 and m % 2 for p, m in mult.items()):
            continue
        h = _h_values(part)[:n]
        marks = [h[i] - h[i + 1] for i in range(n - 1)] + [2 * h[n - 1]]
        even = [p for p in mult if p % 2 == 0]
        b = len(even)
        if any(mult[p] % 2 for p in even):
            b -= 1
        out.append({"marks": marks, "label": _label(part), "a_order": 2 ** b})
    return out


def _type_c(n: int) -> list[dict]:
    """C_n: orbits of so(2n+1), adjoint group SO(2n+1)."""
    out = []
    for part in partitions(2 * n + 1):
        mult = Counter(part)
        if any(p % 2 == 0 and m % 2 for p, m in mult.items()):
            continue
        h = _h_values(part)[:n]
        marks = [h[i] - h[i + 1] for i in range(n - 1)] + [h[n - 1]]
        a = len([p for p in mult if p % 2])
        out.append({"marks": marks, "label": _label(part), "a_order": 2 ** (a - 1)})
    return out


# alpha_1 short.  The dual G2 swaps root lengths.
_G2 = [
    {"marks": [0, 0], "label": "0", "a_order": 1},
    {"marks": [1, 0], "label": "A1", "a_order": 1},
    {"marks": [0, 1], "label": "~A1", "a_order": 1},
    {"marks": [2, 0], "label": "G2(a1)", "a_order": 6},
    {"marks": [2, 2], "label": "G2", "a_order": 1},
]


def build_table() -> dict:
    table: dict = {"_note": "weighted Dynkin marks on simple coroots; a_order = |A(o)| in the adjoint dual group"}
    for n in range(1, 5):
        table[f"A{n}"] = _type_a(n)
    for n in range(2, 5):
        table[f"B{n}"] = _type_b(n)
        table[f"C{n}"] = _type_c(n)
    table["G2"] = _G2
    for k, v in table.items():
        if isinstance(v, list):
            v.sort(key=lambda e: (sum(e["marks"]), e["marks"]))
    return table


def main() -> None:
    path = Path(__file__).parent / "data" / "orbit_tables.json"
    path.parent.mkdir(exist_ok=True)
    path.write_text(json.dumps(build_table(), indent=1) + "\n")


if __name__ == "__main__":
    main()
