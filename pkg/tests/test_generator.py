import numpy as np
import pytest
from hypothesis import given, strategies as st

from natproof.circuit import ONE, ZERO, Circuit, enumerate_functions, evaluate, random_circuit
from natproof.design import build_design, select_bits
from natproof.errors import ShapeError
from natproof.generator import NwGenerator, nw_batch, nw_bit, nw_full


def seeds(m, count, seed):
    return np.random.default_rng(seed).integers(0, 2, (count, m), dtype=np.uint8)


def test_constant_bases():
    D = build_design(2, 2)
    zero = NwGenerator(D, Circuit(D.width, (), (ZERO,)))
    one = NwGenerator(D, Circuit(D.width, (), (ONE,)))
    for w in seeds(D.m, 50, 1):
        assert all(nw_bit(zero, w, i) == 0 for i in range(D.N))
        assert nw_full(one, w).bits == 0b1111


def test_first_input_projection():
    D = build_design(2, 2)
    G = NwGenerator(D, Circuit(D.width, (), (0,)))
    for w in seeds(D.m, 50, 2):
        for i in range(D.N):
            assert nw_bit(G, w, i) == w[min(D.rows[i])]


def test_composition_oracle():
    D = build_design(2, 2)
    C = random_circuit(D.width, 6, seed=5)
    G = NwGenerator(D, C)
    ws = seeds(D.m, 1 << 10, 3)
    packed = nw_batch(G, ws)
    for w, out in zip(ws, packed):
        for i in range(D.N):
            expected = evaluate(C, select_bits(D, i, w).tolist())
            assert nw_bit(G, w, i) == expected == (out >> i) & 1


def test_golden_value():
    # frozen from the composition oracle above
    D = build_design(2, 2)
    G = NwGenerator(D, random_circuit(D.width, 6, seed=5))
    w = np.array([(k * 7) % 3 == 0 for k in range(D.m)], dtype=np.uint8)
    assert nw_full(G, w).bits == 0b1010


def test_projection_base_outputs_are_easy_n3():
    # row i reads column q_i(0) = bit 0 of i at offset 0, so the N-bit output
    # depends on x0 of the index only: at most one gate
    D = build_design(3, 2)
    G = NwGenerator(D, Circuit(D.width, (), (0,)))
    outs = nw_batch(G, seeds(D.m, 1000, 4))
    easy = {t.bits for t in enumerate_functions(3, 1)}
    assert {int(v) for v in outs} <= easy
    assert len({int(v) for v in outs}) == 4


@given(st.integers(0, 3), st.integers(0, 19), st.integers(0, 2**32))
def test_locality(i, col, seed):
    D = build_design(2, 2)
    G = NwGenerator(D, random_circuit(D.width, 5, seed))
    w = seeds(D.m, 1, seed)[0]
    flipped = w.copy()
    flipped[col] ^= 1
    if col not in D.rows[i]:
        assert nw_bit(G, w, i) == nw_bit(G, flipped, i)


def test_shape_errors():
    D = build_design(2, 2)
    with pytest.raises(ShapeError):
        NwGenerator(D, Circuit(3, (), (0,)))
    G = NwGenerator(D, Circuit(4, (), (0,)))
    with pytest.raises(ShapeError):
        nw_batch(G, np.zeros((2, 7)))
