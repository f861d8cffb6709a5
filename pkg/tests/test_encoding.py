import itertools

import pytest
from hypothesis import given, strategies as st

from natproof.circuit import TruthTable, enumerate_functions, truth_table
from natproof.encoding import decode_circuit, emit_dimacs, encode_tt, encode_tt_avg, parse_dimacs
from natproof.errors import ShapeError
from natproof.solver import SAT, UNSAT, solve

from oracles import hamming, min_sizes_bfs

XOR2, AND2 = 0b0110, 0b1000


def one_gate_tables():
    leaves = [0, 0b1111, 0b1010, 0b1100]
    out = set(leaves)
    for a in leaves:
        out.add(0b1111 ^ a)
        for b in leaves:
            out |= {a & b, a | b}
    return out


def test_projection_one_gate_sat():
    assert solve(encode_tt(TruthTable(2, 0b1010), 1)).status == SAT


def test_xor_one_gate_unsat():
    assert solve(encode_tt(TruthTable(2, XOR2), 1)).status == UNSAT


def test_all_n2_cases_agree_with_enumeration():
    sizes = min_sizes_bfs(2, 4)
    for f, s in itertools.product(range(16), range(5)):
        tt = TruthTable(2, f)
        res = solve(encode_tt(tt, s))
        member = tt in enumerate_functions(2, s)
        assert member == (sizes[f] <= s)
        assert (res.status == SAT) == member, (f, s)
        if res.status == SAT:
            c = decode_circuit(encode_tt(tt, s), res)
            assert truth_table(c) == tt and c.size <= s


def test_and_witness_decodes():
    F = encode_tt(TruthTable(2, AND2), 1)
    assert truth_table(decode_circuit(F, solve(F))).bits == AND2


@pytest.mark.parametrize("t", [1, 2, 3, 4])
def test_xor_avg_threshold(t):
    best = min(hamming(XOR2, g) for g in one_gate_tables())
    F = encode_tt_avg(TruthTable(2, XOR2), 1, t)
    res = solve(F)
    assert (res.status == SAT) == (best < t)
    if res.status == SAT:
        assert hamming(truth_table(decode_circuit(F, res)).bits, XOR2) < t


def test_avg_extremes_n2():
    for f, s in itertools.product(range(16), range(3)):
        tt = TruthTable(2, f)
        assert solve(encode_tt_avg(tt, s, 5)).status == SAT
        assert solve(encode_tt_avg(tt, s, 1)).status == solve(encode_tt(tt, s)).status


@given(st.integers(0, 255), st.integers(0, 3), st.integers(0, 9))
def test_dimacs_round_trip(f, s, t):
    tt = TruthTable(3, f)
    for F in (encode_tt(tt, s), encode_tt_avg(tt, s, t)):
        assert parse_dimacs(emit_dimacs(F)) == F


def test_bad_inputs():
    with pytest.raises(ShapeError):
        encode_tt(TruthTable(2, 1), -1)
    with pytest.raises(ShapeError):
        encode_tt(TruthTable(2, 1), 1, basis=("NAND",))
    with pytest.raises(ShapeError):
        parse_dimacs("p cnf 1 2\n1 0\n")
    with pytest.raises(ShapeError):
        parse_dimacs("1 0\n")
