import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from natproof.circuit import (
    ONE, ZERO, Circuit, CircuitBuilder, TruthTable, circuit_from_table, enumerate_functions,
    evaluate, from_text, input_column, minimal_circuit, minimal_size_table, random_circuit,
    size_histogram, substitute, to_text, truth_table, xor_combine,
)
from natproof.errors import ShapeError

from oracles import min_sizes_bfs, table_direct

XOR_TABLE = 0b0110


def xor_gadget():
    # (a OR b) AND NOT (a AND b)
    return Circuit(2, (("OR", (0, 1)), ("AND", (0, 1)), ("NOT", (3,)), ("AND", (2, 4))), (5,))


def circuits(max_inputs=3, max_gates=6):
    @st.composite
    def build(draw):
        n = draw(st.integers(1, max_inputs))
        s = draw(st.integers(1, max_gates))
        seed = draw(st.integers(0, 2**32))
        return random_circuit(n, s, seed)
    return build()


def test_not_and_examples():
    assert evaluate(Circuit(1, (("NOT", (0,)),), (1,)), [1]) == 0
    assert evaluate(Circuit(2, (("AND", (0, 1)),), (2,)), [1, 1]) == 1


def test_xor_gadget_all_points():
    g = xor_gadget()
    assert g.size == 4
    for a, b in itertools.product((0, 1), repeat=2):
        assert evaluate(g, [a, b]) == a ^ b
    assert truth_table(g).bits == XOR_TABLE


def test_constant_and_projection_tables():
    assert truth_table(Circuit(2, (), (ZERO,))).bits == 0
    assert truth_table(Circuit(2, (), (ONE,))).bits == 0b1111
    assert truth_table(Circuit(2, (), (0,))).bits == input_column(2, 0) == 0b1010
    assert truth_table(Circuit(2, (), (1,))).bits == 0b1100


@given(circuits())
def test_truth_table_matches_direct_eval(c):
    assert truth_table(c).bits == table_direct(c)


def test_random_five_gate_table():
    c = random_circuit(3, 5, seed=7)
    assert c.size == 5
    assert truth_table(c).bits == table_direct(c)


def test_truth_table_bits_little_endian():
    tt = TruthTable.from_bits([1, 0, 0, 1])
    assert tt.bits == 0b1001
    assert tt.bitstring() == "1001"
    assert tt[3] == 1 and tt[1] == 0
    with pytest.raises(ShapeError):
        TruthTable.from_bits([1, 0, 1])


@given(circuits(max_gates=5), st.integers(0, 2**32))
def test_xor_combine_is_pointwise_xor(c1, seed):
    c2 = random_circuit(c1.inputs, 1 + seed % 5, seed)
    c = xor_combine(c1, c2)
    assert truth_table(c).bits == truth_table(c1).bits ^ truth_table(c2).bits
    assert c.size <= c1.size + c2.size + 4


@given(circuits())
def test_xor_combine_with_itself_is_zero(c):
    assert truth_table(xor_combine(c, c)).bits == 0


def test_xor_trick_all_pairs_n2():
    for g, h in itertools.product(range(16), repeat=2):
        cg = circuit_from_table(TruthTable(2, g))
        ch = circuit_from_table(TruthTable(2, h ^ g))
        c = xor_combine(cg, ch)
        assert truth_table(c).bits == h
        assert c.size <= cg.size + ch.size + 4


def test_xor_combine_size_bound_ten_gates():
    c1, c2 = random_circuit(3, 10, 1), random_circuit(3, 10, 2)
    assert xor_combine(c1, c2).size <= 24


def test_enumerate_small_budgets():
    assert {t.bits for t in enumerate_functions(2, 0)} == {0, 0b1111, 0b1010, 0b1100}
    assert len(enumerate_functions(2, 1)) == 8
    assert len(enumerate_functions(2, 4)) == 16
    assert enumerate_functions(2, -1) == frozenset()


def test_one_gate_functions_by_brute_force():
    leaves = [0, 0b1111, 0b1010, 0b1100]
    found = set(leaves)
    for a in leaves:
        found.add(0b1111 ^ a)
        for b in leaves:
            found |= {a & b, a | b}
    assert {t.bits for t in enumerate_functions(2, 1)} == found


@pytest.mark.parametrize("n,cap", [(2, 4), (3, 5)])
def test_minimal_sizes_match_set_bfs(n, cap):
    oracle = min_sizes_bfs(n, cap)
    sizes = minimal_size_table(n, cap)
    for f in range(len(sizes)):
        expected = oracle.get(f, -1)
        assert sizes[f] == expected, f


def test_size_histograms():
    assert size_histogram(2) == [4, 4, 6, 0, 2]
    assert size_histogram(3) == [5, 9, 26, 44, 37, 82, 35, 10, 8]
    assert sum(size_histogram(3)) == 256


def test_enumeration_monotone_and_complete():
    prev = frozenset()
    for s in range(9):
        cur = enumerate_functions(3, s)
        assert prev <= cur
        prev = cur
    assert len(prev) == 256


@given(st.integers(0, 255))
def test_minimal_circuit_is_a_witness(f):
    tt = TruthTable(3, f)
    c = minimal_circuit(tt, 8)
    assert truth_table(c) == tt
    assert c.size == minimal_size_table(3, 8)[f]


def test_substitute_constant_into_and():
    c = Circuit(2, (("AND", (0, 1)),), (2,))
    assert truth_table(substitute(c, {0: 1})).bits == input_column(2, 1)
    assert truth_table(substitute(c, {0: 0})).bits == 0


@given(circuits())
def test_identity_substitution(c):
    proj = {j: Circuit(c.inputs, (), (j,)) for j in range(c.inputs)}
    assert truth_table(substitute(c, proj)) == truth_table(c)
    assert truth_table(substitute(c, {})) == truth_table(c)


@given(circuits(), st.integers(0, 2**32))
def test_substitute_matches_composed_eval(c, seed):
    rng = np.random.default_rng(seed)
    rho = {}
    for j in range(c.inputs):
        kind = rng.integers(3)
        if kind == 0:
            rho[j] = int(rng.integers(2))
        elif kind == 1:
            rho[j] = random_circuit(c.inputs, int(rng.integers(1, 4)), int(rng.integers(2**32)))
    out = substitute(c, rho)
    for y in range(1 << c.inputs):
        x = [(y >> j) & 1 for j in range(c.inputs)]
        inner = [
            rho[j] if isinstance(rho.get(j), int) else evaluate(rho[j], x) if j in rho else x[j]
            for j in range(c.inputs)
        ]
        assert evaluate(out, x) == evaluate(c, inner)
    assert out.size <= c.size + sum(v.size for v in rho.values() if isinstance(v, Circuit))


def test_substitute_rejects_unknown_input():
    with pytest.raises(ShapeError):
        substitute(Circuit(2, (), (0,)), {5: 1})


def test_random_circuit_deterministic():
    assert random_circuit(3, 5, 11) == random_circuit(3, 5, 11)
    assert random_circuit(3, 5, 11).size == 5


def test_random_samples_are_enumerable():
    easy = enumerate_functions(2, 3)
    for seed in range(1000):
        assert truth_table(random_circuit(2, 3, seed)) in easy


@given(circuits())
def test_text_round_trip(c):
    assert from_text(to_text(c)) == c


def test_bad_circuits_rejected():
    with pytest.raises(ShapeError):
        Circuit(2, (("AND", (0, 3)),), (2,))
    with pytest.raises(ShapeError):
        Circuit(2, (), ())
    with pytest.raises(ShapeError):
        from_text("n 2 1\ng0 AND x0 g0\nout g0\n")


def test_builder_shares_nodes():
    b = CircuitBuilder(2)
    a1 = b.AND(b.var(0), b.var(1))
    a2 = b.AND(b.var(0), b.var(1))
    assert a1 == a2
    assert b.build(b.OR(a1, a2)).size == 2


@given(st.integers(0, 255))
def test_circuit_from_table(f):
    tt = TruthTable(3, f)
    assert truth_table(circuit_from_table(tt)) == tt
