"""Prime search and polynomial arithmetic over GF(p)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

from .errors import BudgetError, NotFoundError, ShapeError

PRIME_CAP = 10**6


def is_prime(k: int) -> bool:
    if k < 2:
        return False
    if k % 2 == 0:
        return k == 2
    f = 3
    while f * f <= k:
        if k % f == 0:
            return False
        f += 2
    return True


def find_prime_in(lo: int, hi: int, cap: int = PRIME_CAP) -> int:
    """Smallest prime in ``[lo, hi]``."""
    if not 2 <= lo <= hi:
        raise ShapeError(f"need 2 <= lo <= hi, got [{lo}, {hi}]")
    if hi > cap:
        raise BudgetError(f"prime search above the cap {cap}")
    for k in range(lo, hi + 1):
        if is_prime(k):
            return k
    raise NotFoundError(f"no prime in [{lo}, {hi}]")


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ShapeError(f"{self.p} is not prime")


@dataclass(frozen=True)
class Poly:
    """Coefficients over GF(p), lowest degree first."""

    coeffs: Tuple[int, ...]

    @classmethod
    def reduced(cls, coeffs: Sequence[int], field: PrimeField) -> "Poly":
        return cls(tuple(int(c) % field.p for c in coeffs))

    @classmethod
    def from_bits(cls, i: int, length: int) -> "Poly":
        """Polynomial whose coefficient ``u`` is bit ``u`` of ``i``."""
        return cls(tuple((i >> u) & 1 for u in range(length)))

    def degree(self) -> int:
        nz = [k for k, c in enumerate(self.coeffs) if c]
        return nz[-1] if nz else -1


def poly_eval(q: Poly, x: int, field: PrimeField) -> int:
    if not 0 <= x < field.p:
        raise ShapeError(f"point {x} outside GF({field.p})")
    acc = 0
    for c in reversed(q.coeffs):
        acc = (acc * x + c) % field.p
    return acc
