from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from natproof.circuit import Circuit, TruthTable, truth_table
from natproof.errors import BudgetError, ShapeError
from natproof.natural import (
    Property, evaluate, histogram_csv, largeness, mcsp_property, median_threshold, usefulness_check,
)

from oracles import min_sizes_bfs


def test_n2_extremes():
    assert largeness(mcsp_property(2, 16)) == 0
    assert usefulness_check(mcsp_property(2, 16))
    assert largeness(mcsp_property(2, 0)) == Fraction(3, 4)


def test_single_gate_tables_rejected():
    for s_star in (1, 2, 3):
        R = mcsp_property(3, s_star)
        for op in ("AND", "OR"):
            assert evaluate(R, truth_table(Circuit(3, ((op, (0, 2)),), (3,)))) == 0
        assert R(truth_table(Circuit(3, (("NOT", (1,)),), (3,)))) == 0


def test_hardest_table_accepted():
    R8 = mcsp_property(3, 8)
    hardest = [f for f in range(256) if R8.sizes[f] == 8]
    assert len(hardest) == 8
    for s_star in range(8):
        R = mcsp_property(3, s_star)
        assert all(R(TruthTable(3, f)) for f in hardest)


def test_median_split_n3():
    s_star = median_threshold(3)
    R = mcsp_property(3, s_star)
    assert largeness(R) >= Fraction(1, 2)
    assert largeness(mcsp_property(3, s_star + 1)) < Fraction(1, 2)
    assert largeness(R) >= Fraction(1, 8)


@pytest.mark.parametrize("s_star", range(6))
def test_against_independent_search(s_star):
    known = min_sizes_bfs(3, 5)
    R = mcsp_property(3, s_star)
    rng = np.random.default_rng(s_star)
    for f in rng.choice(256, 20, replace=False):
        size = known.get(int(f), 6)
        assert R(TruthTable(3, int(f))) == int(size > s_star)


@pytest.mark.parametrize("n", [2, 3])
def test_threshold_closure_and_monotone(n):
    prev = Fraction(2)
    for s_star in range(-1, 10):
        R = mcsp_property(n, s_star)
        assert usefulness_check(R)
        acc = R.sizes[R.table]
        rej = R.sizes[~R.table]
        if len(acc) and len(rej):
            assert acc.min() > rej.max()
        cur = largeness(R)
        assert cur <= prev
        prev = cur


@given(st.integers(0, 65535), st.integers(0, 2**16))
def test_parity_and_random_properties(x, seed):
    tt = TruthTable(4, x)
    assert Property.parity(4)(tt) == bin(x).count("1") % 2
    R = Property.random(4, seed)
    assert R(tt) == int(R.table[x])


def test_property_errors():
    with pytest.raises(ShapeError):
        evaluate(mcsp_property(2, 1), TruthTable(3, 0))
    with pytest.raises(BudgetError):
        mcsp_property(4, 2)
    with pytest.raises(ShapeError):
        Property(2, np.zeros(5))


def test_histogram_csv():
    assert histogram_csv(2) == "minimal_size,count\n0,4\n1,4\n2,6\n3,0\n4,2\n"
