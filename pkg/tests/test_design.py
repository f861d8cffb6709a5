import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from natproof.design import Design, agreement_positions, build_design, select_bits, verify_design
from natproof.errors import ShapeError

from oracles import naive_rows


def test_n2_d2_shape():
    D = build_design(2, 2)
    assert (D.p, D.m, D.N, D.width) == (5, 20, 4, 4)
    assert D.rows[0] == (0, 5, 10, 15)
    rep = verify_design(D)
    assert rep["pass"] and rep["max_intersection"] <= 2


def test_n3_d2_shape():
    D = build_design(3, 2)
    assert (D.p, D.m, D.N, D.width) == (11, 99, 8, 9)
    rep = verify_design(D)
    assert rep["pass"] and rep["max_intersection"] <= 3


@pytest.mark.parametrize("n,d", list(itertools.product((2, 3, 4), (2, 3))))
def test_designs_verify(n, d):
    D = build_design(n, d)
    assert verify_design(D)["pass"]
    assert D.m == D.p * n**d
    assert len(set(D.rows)) == D.N
    p, rows = naive_rows(n, d)
    assert p == D.p
    assert [list(r) for r in D.rows] == rows


def test_duplicate_row_fails():
    D = build_design(2, 2)
    bad = Design(D.n, D.d, D.p, D.m, (D.rows[0], D.rows[0]) + D.rows[2:])
    rep = verify_design(bad)
    assert not rep["pass"]
    assert rep["max_intersection"] == D.width


def test_select_bits_examples():
    D = build_design(2, 2)
    assert select_bits(D, 2, np.ones(D.m, dtype=np.uint8)).tolist() == [1, 1, 1, 1]
    w = np.zeros(D.m, dtype=np.uint8)
    w[5] = 1
    assert select_bits(D, 0, w).tolist() == [0, 1, 0, 0]


def test_select_bits_against_column_scan():
    rng = np.random.default_rng(0)
    for n in (2, 3):
        D = build_design(n, 2)
        for _ in range(500):
            i = int(rng.integers(D.N))
            w = rng.integers(0, 2, D.m, dtype=np.uint8)
            row = set(D.rows[i])
            scan = [int(w[c]) for c in range(D.m) if c in row]
            assert select_bits(D, i, w).tolist() == scan


@given(st.integers(0, 7), st.lists(st.integers(0, 1), min_size=99, max_size=99))
def test_select_bits_algebraic(i, w):
    D = build_design(3, 2)
    coeffs = [(i >> t) & 1 for t in range(3)]
    got = select_bits(D, i, w)
    for u in range(D.width):
        assert got[u] == w[u * D.p + sum(c * u**t for t, c in enumerate(coeffs)) % D.p]


def test_agreement_positions_bounded():
    D = build_design(3, 3)
    for i, j in itertools.combinations(range(D.N), 2):
        pos = agreement_positions(D, i, j)
        assert len(pos) == len(set(D.rows[i]) & set(D.rows[j])) <= D.n


def test_json_round_trip():
    D = build_design(2, 3)
    assert Design.from_json(D.to_json()) == D


def test_errors():
    with pytest.raises(ShapeError):
        build_design(2, 1)
    D = build_design(2, 2)
    with pytest.raises(ShapeError):
        select_bits(D, 4, np.zeros(D.m))
    with pytest.raises(ShapeError):
        select_bits(D, 0, np.zeros(D.m - 1))
