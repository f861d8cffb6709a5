"""Algebraic (n, n^d) combinatorial designs from low-degree polynomials.

Row ``i`` collects the grid points ``(u, q_i(u))`` for ``u < n^d`` where the
coefficients of ``q_i`` are the ``n`` bits of ``i``. Point ``(u, v)`` is column
``u*p + v``. Two distinct rows share at most ``n - 1`` points because their
difference is a nonzero polynomial of degree at most ``n - 1``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import BudgetError, ShapeError
from .finite_field import Poly, PrimeField, find_prime_in, poly_eval

MAX_ROW_BITS = 12
MAX_COLUMNS = 1 << 22


@dataclass(frozen=True)
class Design:
    n: int
    d: int
    p: int
    m: int
    rows: Tuple[Tuple[int, ...], ...]

    @property
    def N(self) -> int:
        return len(self.rows)

    @property
    def width(self) -> int:
        """Row size ``n**d`` (number of base-circuit inputs)."""
        return self.n ** self.d

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "d": self.d, "p": self.p, "m": self.m, "rows": [list(r) for r in self.rows]})

    @classmethod
    def from_json(cls, text: str) -> "Design":
        raw = json.loads(text)
        return cls(raw["n"], raw["d"], raw["p"], raw["m"], tuple(tuple(r) for r in raw["rows"]))


def build_design(n: int, d: int) -> Design:
    if d < 2:
        raise ShapeError("design exponent d must be at least 2")
    if n < 1:
        raise ShapeError("row-index length n must be positive")
    if n > MAX_ROW_BITS:
        raise BudgetError(f"2^{n} rows exceed the budget 2^{MAX_ROW_BITS}")
    width = n**d
    p = find_prime_in(width, 2 * width)
    m = p * width
    if m > MAX_COLUMNS:
        raise BudgetError(f"m = {m} columns exceeds the budget")
    field = PrimeField(p)
    rows = []
    for i in range(1 << n):
        q = Poly.from_bits(i, n)
        rows.append(tuple(u * p + poly_eval(q, u % p, field) for u in range(width)))
    return Design(n, d, p, m, tuple(rows))


def _as_bits(w, m: int) -> np.ndarray:
    w = np.asarray(w, dtype=np.uint8)
    if w.shape != (m,):
        raise ShapeError(f"seed must have {m} bits, got shape {w.shape}")
    return w


def select_bits(D: Design, i: int, w: Sequence[int]) -> np.ndarray:
    """``w`` restricted to row ``i``, in increasing column order."""
    if not 0 <= i < D.N:
        raise ShapeError(f"row {i} outside 0..{D.N - 1}")
    return _as_bits(w, D.m)[list(D.rows[i])]


def verify_design(D: Design) -> Dict:
    sizes = [len(r) for r in D.rows]
    sets = [frozenset(r) for r in D.rows]
    worst = 0
    for a, b in itertools.combinations(range(len(sets)), 2):
        worst = max(worst, len(sets[a] & sets[b]))
    in_range = all(0 <= c < D.m for r in D.rows for c in r)
    ordered = all(list(r) == sorted(set(r)) for r in D.rows)
    ok = (
        D.m == D.p * D.width
        and all(s == D.width for s in sizes)
        and worst <= D.n
        and in_range
        and ordered
    )
    return {
        "n": D.n,
        "d": D.d,
        "p": D.p,
        "m": D.m,
        "rows": D.N,
        "row_sizes": sorted(set(sizes)),
        "max_intersection": worst,
        "pass": bool(ok),
    }


def agreement_positions(D: Design, i: int, j: int) -> List[int]:
    """Offsets ``u`` at which rows ``i`` and ``j`` pick the same column."""
    return [u for u in range(D.width) if D.rows[i][u] == D.rows[j][u]]
