"""CNF encodings of "f has a small circuit" and DIMACS interchange.

Both encoders produce the negation form: the CNF is satisfiable iff some
circuit with at most ``s`` gates computes ``f`` (exactly, or with fewer than
``t`` errors). The tautology tt(f, s) holds iff the CNF is unsatisfiable.

Template layout. Leaves are numbered ``0`` (constant 0), ``1`` (constant 1),
``2 + j`` (input x_j). Slot ``k`` may read any leaf or any slot ``< k``; the
output may read any leaf or slot. Every selector block is one-hot. A NOT slot
parks its unused second operand on constant 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .circuit import DEFAULT_BASIS, ONE, ZERO, Circuit, TruthTable
from .errors import BudgetError, ShapeError

ENCODER_VERSION = "1"
CLAUSE_BUDGET = 2_000_000
TEMPLATE_OPS = ("NOT", "AND", "OR", "XOR")

Role = Tuple


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: Tuple[Tuple[int, ...], ...]
    var_map: Tuple[Role, ...]  # entry v-1 describes variable v
    meta: Dict = field(default_factory=dict, compare=False, hash=False)

    def __eq__(self, other):
        return (
            isinstance(other, CnfFormula)
            and self.num_vars == other.num_vars
            and self.clauses == other.clauses
            and self.var_map == other.var_map
            and self.meta == other.meta
        )

    def roles(self, kind: str) -> Dict[int, Role]:
        return {v + 1: r for v, r in enumerate(self.var_map) if r[0] == kind}


@dataclass(frozen=True)
class CircuitTemplate:
    n: int
    s: int
    basis: Tuple[str, ...]
    op: Tuple[Dict[str, int], ...]  # slot -> connective -> var
    arg_a: Tuple[Tuple[int, ...], ...]  # slot -> choice -> var
    arg_b: Tuple[Tuple[int, ...], ...]
    out: Tuple[int, ...]  # choice -> var

    def choice_label(self, c: int) -> str:
        if c == 0:
            return "0"
        if c == 1:
            return "1"
        if c < self.n + 2:
            return f"x{c - 2}"
        return f"g{c - self.n - 2}"


class _Builder:
    def __init__(self):
        self.roles: List[Role] = []
        self.clauses: List[Tuple[int, ...]] = []

    def var(self, *role) -> int:
        self.roles.append(tuple(role))
        return len(self.roles)

    def add(self, *lits: int) -> None:
        self.clauses.append(tuple(lits))
        if len(self.clauses) > CLAUSE_BUDGET:
            raise BudgetError(f"encoding exceeds {CLAUSE_BUDGET} clauses")

    def exactly_one(self, vs: Sequence[int]) -> None:
        self.add(*vs)
        for a in range(len(vs)):
            for b in range(a + 1, len(vs)):
                self.add(-vs[a], -vs[b])


def _template(B: _Builder, n: int, s: int, basis: Sequence[str]) -> CircuitTemplate:
    ops, arg_a, arg_b = [], [], []
    for k in range(s):
        ops.append({o: B.var("op", k, o) for o in basis})
        width = n + 2 + k
        arg_a.append(tuple(B.var("arg", k, "a", c) for c in range(width)))
        arg_b.append(tuple(B.var("arg", k, "b", c) for c in range(width)))
    out = tuple(B.var("out", c) for c in range(n + 2 + s))
    return CircuitTemplate(n, s, tuple(basis), tuple(ops), tuple(arg_a), tuple(arg_b), out)


def _wire_constraints(B: _Builder, T: CircuitTemplate) -> List[int]:
    """Consistency clauses on every point; returns the output-value vars."""
    n, s = T.n, T.s
    points = 1 << n
    val = [[B.var("val", k, y) for y in range(points)] for k in range(s)]
    aval = [[B.var("argval", k, "a", y) for y in range(points)] for k in range(s)]
    bval = [[B.var("argval", k, "b", y) for y in range(points)] for k in range(s)]
    oval = [B.var("outval", y) for y in range(points)]

    for k in range(s):
        B.exactly_one(list(T.op[k].values()))
        B.exactly_one(list(T.arg_a[k]))
        B.exactly_one(list(T.arg_b[k]))
        if "NOT" in T.op[k]:
            B.add(-T.op[k]["NOT"], T.arg_b[k][0])
        # Canonical form, no loss of completeness: constants never feed a
        # gate (the result would equal a leaf or an earlier node), and the
        # commutative connectives read strictly increasing operands.
        B.add(-T.arg_a[k][0])
        B.add(-T.arg_a[k][1])
        for o, sel in T.op[k].items():
            if o == "NOT":
                continue
            B.add(-sel, -T.arg_b[k][0])
            B.add(-sel, -T.arg_b[k][1])
            for ca in range(2, len(T.arg_a[k])):
                for cb in range(2, ca + 1):
                    B.add(-sel, -T.arg_a[k][ca], -T.arg_b[k][cb])
    B.exactly_one(list(T.out))

    def bind(sel: int, c: int, target: int, y: int) -> None:
        """sel -> target equals the value of choice c at point y."""
        if c < 2:
            B.add(-sel, target if c == 1 else -target)
        elif c < n + 2:
            bit = (y >> (c - 2)) & 1
            B.add(-sel, target if bit else -target)
        else:
            src = val[c - n - 2][y]
            B.add(-sel, -src, target)
            B.add(-sel, src, -target)

    for y in range(points):
        for k in range(s):
            for c, sel in enumerate(T.arg_a[k]):
                bind(sel, c, aval[k][y], y)
            for c, sel in enumerate(T.arg_b[k]):
                bind(sel, c, bval[k][y], y)
            v, a, b = val[k][y], aval[k][y], bval[k][y]
            for o, sel in T.op[k].items():
                if o == "NOT":
                    B.add(-sel, v, a)
                    B.add(-sel, -v, -a)
                elif o == "AND":
                    B.add(-sel, -v, a)
                    B.add(-sel, -v, b)
                    B.add(-sel, v, -a, -b)
                elif o == "OR":
                    B.add(-sel, v, -a)
                    B.add(-sel, v, -b)
                    B.add(-sel, -v, a, b)
                else:
                    B.add(-sel, -v, a, b)
                    B.add(-sel, -v, -a, -b)
                    B.add(-sel, v, -a, b)
                    B.add(-sel, v, a, -b)
        for c, sel in enumerate(T.out):
            bind(sel, c, oval[y], y)
    return oval


def _check(f: TruthTable, s: int, basis: Sequence[str]) -> Tuple[str, ...]:
    if s < 0:
        raise ShapeError("gate budget must be non-negative")
    basis = tuple(basis)
    for o in basis:
        if o not in TEMPLATE_OPS:
            raise ShapeError(f"template does not support connective {o}")
    if (1 << f.n) * (s + 1) ** 3 * 8 > CLAUSE_BUDGET:
        raise BudgetError(f"encoding of n={f.n}, s={s} is beyond the clause budget")
    return basis


def encode_tt(f: TruthTable, s: int, basis: Sequence[str] = DEFAULT_BASIS) -> CnfFormula:
    """Satisfiable iff some circuit of at most ``s`` gates computes ``f``."""
    basis = _check(f, s, basis)
    B = _Builder()
    T = _template(B, f.n, s, basis)
    oval = _wire_constraints(B, T)
    for y, o in enumerate(oval):
        B.add(o if f[y] else -o)
    meta = {"kind": "tt", "n": f.n, "s": s, "t": None, "f": f.hex(), "basis": list(basis), "version": ENCODER_VERSION}
    return CnfFormula(len(B.roles), tuple(B.clauses), tuple(B.roles), meta)


def encode_tt_avg(f: TruthTable, s: int, t: int, basis: Sequence[str] = DEFAULT_BASIS) -> CnfFormula:
    """Satisfiable iff some circuit of at most ``s`` gates errs on fewer than ``t`` points."""
    basis = _check(f, s, basis)
    B = _Builder()
    T = _template(B, f.n, s, basis)
    oval = _wire_constraints(B, T)
    errs = []
    for y, o in enumerate(oval):
        e = B.var("err", y)
        errs.append(e)
        if f[y]:
            B.add(e, o)
            B.add(-e, -o)
        else:
            B.add(-e, o)
            B.add(e, -o)
    _at_most(B, errs, t - 1)
    meta = {"kind": "tt_avg", "n": f.n, "s": s, "t": t, "f": f.hex(), "basis": list(basis), "version": ENCODER_VERSION}
    return CnfFormula(len(B.roles), tuple(B.clauses), tuple(B.roles), meta)


def _at_most(B: _Builder, xs: List[int], bound: int) -> None:
    """Sequential counter: at most ``bound`` of ``xs`` are true."""
    L = len(xs)
    if bound >= L:
        return
    if bound < 0:
        B.add()
        return
    if bound == 0:
        for x in xs:
            B.add(-x)
        return
    reg = [[B.var("cnt", i, j) for j in range(bound)] for i in range(L - 1)]
    B.add(-xs[0], reg[0][0])
    for j in range(1, bound):
        B.add(-reg[0][j])
    for i in range(1, L - 1):
        B.add(-xs[i], reg[i][0])
        B.add(-reg[i - 1][0], reg[i][0])
        for j in range(1, bound):
            B.add(-xs[i], -reg[i - 1][j - 1], reg[i][j])
            B.add(-reg[i - 1][j], reg[i][j])
        B.add(-xs[i], -reg[i - 1][bound - 1])
    B.add(-xs[L - 1], -reg[L - 2][bound - 1])


def template_of(F: CnfFormula) -> CircuitTemplate:
    """Rebuild the selector layout from the variable roles."""
    n, s = F.meta["n"], F.meta["s"]
    ops: List[Dict[str, int]] = [dict() for _ in range(s)]
    a = [[0] * (n + 2 + k) for k in range(s)]
    b = [[0] * (n + 2 + k) for k in range(s)]
    out = [0] * (n + 2 + s)
    for v, role in enumerate(F.var_map, start=1):
        if role[0] == "op":
            ops[role[1]][role[2]] = v
        elif role[0] == "arg":
            (a if role[2] == "a" else b)[role[1]][role[3]] = v
        elif role[0] == "out":
            out[role[1]] = v
    return CircuitTemplate(
        n, s, tuple(F.meta["basis"]), tuple(ops), tuple(map(tuple, a)), tuple(map(tuple, b)), tuple(out)
    )


def decode_circuit(F: CnfFormula, assignment) -> Circuit:
    """Read the circuit off the selector variables.

    ``assignment`` is a SolveResult, a sequence of booleans (entry v-1 for
    variable v) or a mapping var -> bool. Any total assignment decodes: in a
    block with several or no true selectors the lowest true one, or the
    first, is taken.
    """
    if hasattr(assignment, "assignment"):
        assignment = assignment.assignment
    if assignment is None:
        raise ShapeError("no assignment to decode")
    if isinstance(assignment, dict):
        truth = lambda v: bool(assignment.get(v, False))  # noqa: E731
    else:
        truth = lambda v: bool(assignment[v - 1])  # noqa: E731
    T = template_of(F)
    n = T.n

    def pick(vs: Sequence[int]) -> int:
        return next((c for c, v in enumerate(vs) if truth(v)), 0)

    def ref(c: int) -> int:
        if c == 0:
            return ZERO
        if c == 1:
            return ONE
        if c < n + 2:
            return c - 2
        return n + (c - n - 2)

    gates = []
    for k in range(T.s):
        names = list(T.op[k])
        op = names[pick([T.op[k][o] for o in names])]
        a = ref(pick(T.arg_a[k]))
        gates.append((op, (a,)) if op == "NOT" else (op, (a, ref(pick(T.arg_b[k])))))
    return Circuit(n, tuple(gates), (ref(pick(T.out)),))


# --- DIMACS ------------------------------------------------------------------------

def emit_dimacs(F: CnfFormula) -> str:
    m = F.meta
    lines = [
        f"c natproof {m.get('kind', 'cnf')} encoder {m.get('version', ENCODER_VERSION)}",
        f"c n {m.get('n', '-')}",
        f"c s {m.get('s', '-')}",
        f"c t {'-' if m.get('t') is None else m['t']}",
        f"c f {m.get('f', '-')}",
        f"c basis {','.join(m.get('basis', []))}",
    ]
    for v, role in enumerate(F.var_map, start=1):
        lines.append("c v " + " ".join([str(v)] + [str(x) for x in role]))
    lines.append(f"p cnf {F.num_vars} {len(F.clauses)}")
    lines.extend(" ".join(map(str, c + (0,))) for c in F.clauses)
    return "\n".join(lines) + "\n"


def _role_token(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def parse_dimacs(text: str) -> CnfFormula:
    meta: Dict = {}
    roles: Dict[int, Role] = {}
    header: Optional[Tuple[int, int]] = None
    clauses: List[Tuple[int, ...]] = []
    current: List[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            tok = line.split()
            if len(tok) >= 4 and tok[1] == "natproof":
                meta["kind"], meta["version"] = tok[2], tok[4] if len(tok) > 4 else ENCODER_VERSION
            elif len(tok) >= 3 and tok[1] == "v":
                roles[int(tok[2])] = tuple(_role_token(t) for t in tok[3:])
            elif len(tok) == 3 and tok[1] in ("n", "s", "t"):
                meta[tok[1]] = None if tok[2] == "-" else int(tok[2])
            elif len(tok) == 3 and tok[1] == "f":
                meta["f"] = tok[2]
            elif len(tok) >= 2 and tok[1] == "basis":
                meta["basis"] = tok[2].split(",") if len(tok) > 2 else []
            continue
        if line.startswith("p"):
            tok = line.split()
            if len(tok) != 4 or tok[1] != "cnf":
                raise ShapeError(f"bad problem line: {line}")
            header = (int(tok[2]), int(tok[3]))
            continue
        if header is None:
            raise ShapeError("clause before the problem line")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                if abs(lit) > header[0]:
                    raise ShapeError(f"literal {lit} beyond {header[0]} variables")
                current.append(lit)
    if header is None:
        raise ShapeError("missing 'p cnf' line")
    if current:
        raise ShapeError("last clause is not terminated by 0")
    if len(clauses) != header[1]:
        raise ShapeError(f"header promises {header[1]} clauses, found {len(clauses)}")
    var_map = tuple(roles.get(v, ("aux",)) for v in range(1, header[0] + 1))
    return CnfFormula(header[0], tuple(clauses), var_map, meta)
