import itertools

from hypothesis import given, strategies as st

from natproof.solver import INDETERMINATE, SAT, UNSAT, solve_clauses


def brute(num_vars, clauses):
    for bits in itertools.product((False, True), repeat=num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def satisfies(assignment, clauses):
    return all(any(assignment[abs(l) - 1] == (l > 0) for l in c) for c in clauses)


def test_empty_formula():
    res = solve_clauses(0, [])
    assert res.status == SAT and res.assignment == ()


def test_contradicting_units():
    assert solve_clauses(1, [[1], [-1]]).status == UNSAT


def test_empty_clause():
    assert solve_clauses(2, [[1, 2], []]).status == UNSAT


def test_pigeonhole_three_in_two():
    var = lambda p, h: 2 * p + h + 1  # noqa: E731
    clauses = [[var(p, 0), var(p, 1)] for p in range(3)]
    clauses += [[-var(p, h), -var(q, h)] for h in range(2) for p, q in itertools.combinations(range(3), 2)]
    assert solve_clauses(6, clauses).status == UNSAT


def test_node_cap_gives_indeterminate():
    var = lambda p, h: 4 * p + h + 1  # noqa: E731
    clauses = [[var(p, h) for h in range(4)] for p in range(5)]
    clauses += [[-var(p, h), -var(q, h)] for h in range(4) for p, q in itertools.combinations(range(5), 2)]
    assert solve_clauses(20, clauses, node_cap=3).status == INDETERMINATE
    assert solve_clauses(20, clauses).status == UNSAT


clause = st.lists(st.integers(1, 7).flatmap(lambda v: st.sampled_from([v, -v])), min_size=0, max_size=4)


@given(st.lists(clause, max_size=30))
def test_agrees_with_truth_table_search(clauses):
    res = solve_clauses(7, clauses)
    assert res.status == (SAT if brute(7, clauses) else UNSAT)
    if res.status == SAT:
        assert len(res.assignment) == 7
        assert satisfies(res.assignment, clauses)
        assert sorted(abs(l) for l in res.literals()) == list(range(1, 8))
