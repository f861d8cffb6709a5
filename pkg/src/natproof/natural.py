"""Exact natural properties from brute-force minimum circuit size.

A property over ``N = 2**n``-bit strings is stored as a lookup table with one
boolean per string; bit ``y`` of a string is entry ``y`` of the truth table it
encodes. The learner treats every property as such an opaque table.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence

import numpy as np

from .circuit import COMPLETENESS_BOUND, DEFAULT_BASIS, TruthTable, enumerate_functions, minimal_size_table
from .errors import BudgetError, ShapeError

MAX_PROPERTY_N = 4


@dataclass(frozen=True, eq=False)
class Property:
    """A predicate on ``2**n``-bit strings given by its acceptance table."""

    n: int
    table: np.ndarray
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n > MAX_PROPERTY_N:
            raise BudgetError(f"property tables beyond n={MAX_PROPERTY_N} are too large")
        table = np.asarray(self.table, dtype=bool)
        if table.shape != (1 << (1 << self.n),):
            raise ShapeError(f"acceptance table must have 2^{1 << self.n} entries")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def N(self) -> int:
        return 1 << self.n

    def __call__(self, x: TruthTable) -> int:
        return evaluate(self, x)

    @classmethod
    def constant(cls, n: int, value: bool) -> "Property":
        return cls(n, np.full(1 << (1 << n), bool(value)), {"kind": f"const{int(value)}"})

    @classmethod
    def parity(cls, n: int) -> "Property":
        counts = np.array([bin(v).count("1") for v in range(1 << (1 << n))])
        return cls(n, counts % 2 == 1, {"kind": "parity"})

    @classmethod
    def random(cls, n: int, seed: int) -> "Property":
        rng = np.random.default_rng(seed)
        return cls(n, rng.integers(0, 2, 1 << (1 << n)).astype(bool), {"kind": "random", "seed": seed})


@dataclass(frozen=True, eq=False)
class NaturalProperty(Property):
    """Accepts exactly the tables whose minimal size exceeds ``threshold``."""

    threshold: int = 0
    sizes: np.ndarray = None


def mcsp_property(n: int, threshold: int, basis: Sequence[str] = DEFAULT_BASIS) -> NaturalProperty:
    if n > 3:
        raise BudgetError("full MCSP classification is limited to n <= 3")
    bound = COMPLETENESS_BOUND[n] if tuple(basis) == DEFAULT_BASIS else 16
    sizes = minimal_size_table(n, bound, basis)
    if (sizes < 0).any():
        raise BudgetError("enumeration did not classify every table")
    return NaturalProperty(
        n,
        sizes > threshold,
        {"kind": "mcsp", "threshold": threshold, "basis": list(basis)},
        threshold=threshold,
        sizes=sizes,
    )


def evaluate(R: Property, x: TruthTable) -> int:
    if x.n != R.n:
        raise ShapeError(f"property on {R.N}-bit tables got a table of length {len(x)}")
    return int(R.table[x.bits])


def largeness(R: Property) -> Fraction:
    return Fraction(int(R.table.sum()), len(R.table))


def usefulness_check(R: NaturalProperty, basis: Sequence[str] = DEFAULT_BASIS) -> bool:
    """Re-verify that no accepted table has a circuit within the threshold."""
    easy = {t.bits for t in enumerate_functions(R.n, R.threshold, basis)}
    return not any(R.table[f] for f in easy)


def median_threshold(n: int) -> int:
    """Largest threshold whose accept fraction is still at least one half."""
    hist = size_histogram_exact(n)
    total = sum(hist)
    best = -1
    for s in range(len(hist)):
        if 2 * sum(hist[s + 1:]) >= total:
            best = s
    return best


def size_histogram_exact(n: int) -> List[int]:
    sizes = minimal_size_table(n, COMPLETENESS_BOUND[n])
    return np.bincount(sizes).tolist()


def histogram_csv(n: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["minimal_size", "count"])
    for s, count in enumerate(size_histogram_exact(n)):
        writer.writerow([s, count])
    return buf.getvalue()
