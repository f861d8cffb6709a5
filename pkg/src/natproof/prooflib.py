"""Building WF proofs by hand: derivations with hypotheses, a lemma library,
a truth-value prover for small formulas, and a fixture corpus.

Everything here produces ordinary ``WfProof`` objects; nothing is trusted,
callers run ``check_proof`` on the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .circuit import ONE, ZERO, Circuit, CircuitBuilder, evaluate, substitute
from .errors import ShapeError
from .proofs import (
    AXIOMS,
    Axiom,
    Dwphp,
    Hypothesis,
    Line,
    ModusPonens,
    Similar,
    WfProof,
    compose_mp,
    dwphp_circuit,
    instantiate,
    scheme_vars,
    similar_refs,
    substitute_proof,
)

# --- formula construction ------------------------------------------------------------

TRUE = Circuit(0, (), (ONE,))
FALSE = Circuit(0, (), (ZERO,))


def var(j: int) -> Circuit:
    return Circuit(j + 1, (), (j,))


def _op(op: str, *parts: Circuit) -> Circuit:
    width = max(p.inputs for p in parts)
    b = CircuitBuilder(width)
    refs = [b.embed(p.with_inputs(width))[0] for p in parts]
    return b.build(b.gate(op, *refs))


def Not(a: Circuit) -> Circuit:
    return _op("NOT", a)


def And(a: Circuit, b: Circuit) -> Circuit:
    return _op("AND", a, b)


def Or(a: Circuit, b: Circuit) -> Circuit:
    return _op("OR", a, b)


def Imp(a: Circuit, b: Circuit) -> Circuit:
    return _op("IMP", a, b)


def big_and(parts: Sequence[Circuit]) -> Circuit:
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def big_or(parts: Sequence[Circuit]) -> Circuit:
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def neq(a: Circuit, b: Circuit) -> Circuit:
    return Not(Or(And(a, b), And(Not(a), Not(b))))


def node(c: Circuit, ref: int) -> Circuit:
    """The subformula rooted at ``ref``."""
    if ref == ONE:
        return TRUE
    if ref == ZERO:
        return FALSE
    return Circuit(c.inputs, c.gates, (ref,)).trim()


# --- derivations ---------------------------------------------------------------------------------

class Derivation:
    """A growing list of proof lines that may include open hypotheses."""

    def __init__(self, lines: Sequence[Line] = ()):
        self.lines: List[Line] = list(lines)

    def __len__(self) -> int:
        return len(self.lines)

    def __getitem__(self, i: int) -> Circuit:
        return self.lines[i].circuit

    def add(self, circuit: Circuit, just) -> int:
        self.lines.append(Line(circuit, just))
        return len(self.lines) - 1

    def hyp(self, c: Circuit) -> int:
        return self.add(c, Hypothesis())

    def ax(self, scheme: str, **subst: Circuit) -> int:
        return self.add(instantiate(AXIOMS[scheme], subst), Axiom.of(scheme, **subst))

    def mp(self, j: int, k: int) -> int:
        major = self[k]
        g = major.node(major.output)
        if g is None or g[0] != "IMP" or not similar_refs(major, g[1][0], self[j], self[j].output):
            raise ShapeError(f"line {k} is not an implication from line {j}")
        return self.add(node(major, g[1][1]), ModusPonens((j, k)))

    def mps(self, k: int, *minors: int) -> int:
        for j in minors:
            k = self.mp(j, k)
        return k

    def sim(self, j: int, c: Circuit) -> int:
        return self.add(c, Similar(j))

    def dwphp(self, C: Sequence[Circuit], D: Sequence[Circuit], r: Sequence[int]) -> int:
        return self.add(dwphp_circuit(C, D, r), Dwphp(tuple(C), tuple(D), tuple(r)))

    def cite(self, proof: WfProof) -> int:
        """Append a closed proof; returns the index of its last line."""
        offset = len(self.lines)
        for line in proof.lines:
            j = line.just
            if isinstance(j, ModusPonens):
                j = ModusPonens((j.premises[0] + offset, j.premises[1] + offset))
            elif isinstance(j, Similar):
                j = Similar(j.ref + offset)
            self.lines.append(Line(line.circuit, j))
        return len(self.lines) - 1

    def use(self, lemma: str, *args: Circuit) -> int:
        return self.cite(lemma_instance(lemma, *args))

    def hypotheses(self) -> List[int]:
        return [i for i, l in enumerate(self.lines) if isinstance(l.just, Hypothesis)]

    def proof(self, conclusion: Optional[Circuit] = None) -> WfProof:
        if self.hypotheses():
            raise ShapeError("derivation still has open hypotheses")
        return WfProof(tuple(self.lines), self[-1] if conclusion is None else conclusion)


@dataclass
class Deduced:
    der: Derivation
    keep: Dict[int, int]      # old line -> same line in der (independent lines)
    imps: Dict[int, int]      # old line -> A -> line in der (dependent lines)
    hyp: Circuit

    def imp(self, i: int) -> int:
        """Index of ``A -> B_i``, weakening an independent line on demand."""
        if i not in self.imps:
            b = self.der[self.keep[i]]
            w = self.der.ax("A1", a=b, b=self.hyp)
            self.imps[i] = self.der.mp(self.keep[i], w)
        return self.imps[i]


def deduce(der: Derivation, h: int) -> Deduced:
    """Deduction theorem: discharge hypothesis line ``h``."""
    if not isinstance(der.lines[h].just, Hypothesis):
        raise ShapeError(f"line {h} is not a hypothesis")
    A = der[h]
    out = Deduced(Derivation(), {}, {}, A)
    new = out.der
    for i, line in enumerate(der.lines):
        j, B = line.just, line.circuit
        if i == h:
            l0 = new.ax("A1", a=A, b=Imp(A, A))
            l1 = new.ax("A2", a=A, b=Imp(A, A), c=A)
            l2 = new.mp(l0, l1)
            l3 = new.ax("A1", a=A, b=A)
            out.imps[i] = new.mp(l3, l2)
        elif isinstance(j, ModusPonens) and (j.premises[0] in out.imps or j.premises[1] in out.imps):
            p, q = j.premises
            a2 = new.ax("A2", a=A, b=der[p], c=B)
            step = new.mp(out.imp(q), a2)
            out.imps[i] = new.mp(out.imp(p), step)
        elif isinstance(j, Similar) and j.ref in out.imps:
            out.imps[i] = new.sim(out.imps[j.ref], Imp(A, B))
        else:
            if isinstance(j, ModusPonens):
                j = ModusPonens((out.keep[j.premises[0]], out.keep[j.premises[1]]))
            elif isinstance(j, Similar):
                j = Similar(out.keep[j.ref])
            out.keep[i] = new.add(B, j)
    return out


def discharge(der: Derivation, hyps: Sequence[int], goal: Optional[int] = None) -> Tuple[Derivation, int]:
    """Discharge ``hyps`` innermost-last; returns the derivation and the goal's line."""
    goal = len(der) - 1 if goal is None else goal
    hyps = list(hyps)
    while hyps:
        h = hyps.pop()
        d = deduce(der, h)
        goal = d.imp(goal)
        hyps = [d.keep[x] for x in hyps]
        der = d.der
    return der, goal


# --- lemmas over atoms a = x0, b = x1, c = x2 ------------------------------------------------------

A, B, C = var(0), var(1), var(2)


def _lemma_id() -> Derivation:
    d = Derivation()
    d.hyp(A)
    return discharge(d, [0])[0]


def _lemma_hs() -> Derivation:
    d = Derivation()
    h1, h2, h3 = d.hyp(Imp(A, B)), d.hyp(Imp(B, C)), d.hyp(A)
    d.mp(d.mp(h3, h1), h2)
    return discharge(d, [h1, h2, h3])[0]


def _lemma_dni() -> Derivation:
    d = Derivation()
    h = d.hyp(A)
    na_a = d.mp(h, d.ax("A1", a=A, b=Not(A)))
    na_na = d.use("id", Not(A))
    d.mps(d.ax("A9", a=Not(A), b=A), na_a, na_na)
    return discharge(d, [h])[0]


def _lemma_efq() -> Derivation:
    d = Derivation()
    h1, h2 = d.hyp(Not(A)), d.hyp(A)
    x = d.mp(h2, d.ax("A1", a=A, b=Not(B)))
    y = d.mp(h1, d.ax("A1", a=Not(A), b=Not(B)))
    nnb = d.mps(d.ax("A9", a=Not(B), b=A), x, y)
    d.mp(nnb, d.ax("A10", a=B))
    return discharge(d, [h1, h2])[0]


def _lemma_em() -> Derivation:
    E = Or(A, Not(A))
    d = Derivation()
    h = d.hyp(Not(E))
    a_e = d.ax("A6", a=A, b=Not(A))
    a_ne = d.mp(h, d.ax("A1", a=Not(E), b=A))
    na = d.mps(d.ax("A9", a=A, b=E), a_e, a_ne)
    e = d.mp(na, d.ax("A7", a=A, b=Not(A)))
    ded = deduce(d, h)
    d2 = ded.der
    nne = d2.mps(d2.ax("A9", a=Not(E), b=E), ded.imp(e), ded.imp(h))
    d2.mp(nne, d2.ax("A10", a=E))
    return d2


def _lemma_cases() -> Derivation:
    d = Derivation()
    h1, h2 = d.hyp(Imp(A, B)), d.hyp(Imp(Not(A), B))
    step = d.mps(d.ax("A8", a=A, b=Not(A), c=B), h1, h2)
    d.mp(d.use("em", A), step)
    return discharge(d, [h1, h2])[0]


def _lemma_and_l() -> Derivation:
    d = Derivation()
    h = d.hyp(Not(A))
    ab = And(A, B)
    x = d.ax("A3", a=A, b=B)
    y = d.mp(h, d.ax("A1", a=Not(A), b=ab))
    d.mps(d.ax("A9", a=ab, b=A), x, y)
    return discharge(d, [h])[0]


def _lemma_and_r() -> Derivation:
    d = Derivation()
    h = d.hyp(Not(B))
    ab = And(A, B)
    x = d.ax("A4", a=A, b=B)
    y = d.mp(h, d.ax("A1", a=Not(B), b=ab))
    d.mps(d.ax("A9", a=ab, b=B), x, y)
    return discharge(d, [h])[0]


def _lemma_or_neg() -> Derivation:
    d = Derivation()
    h1, h2 = d.hyp(Not(A)), d.hyp(Not(B))
    aa = d.use("id", A)
    ba = d.mp(h2, d.use("efq", B, A))
    or_a = d.mps(d.ax("A8", a=A, b=B, c=A), aa, ba)
    or_na = d.mp(h1, d.ax("A1", a=Not(A), b=Or(A, B)))
    d.mps(d.ax("A9", a=Or(A, B), b=A), or_a, or_na)
    return discharge(d, [h1, h2])[0]


def _lemma_imp_neg() -> Derivation:
    d = Derivation()
    h1, h2, h3 = d.hyp(A), d.hyp(Not(B)), d.hyp(Imp(A, B))
    d.mp(h1, h3)
    ded = deduce(d, h3)
    d2 = ded.der
    ab_b = ded.imp(len(d) - 1)
    ab_nb = d2.mp(ded.keep[h2], d2.ax("A1", a=Not(B), b=Imp(A, B)))
    d2.mps(d2.ax("A9", a=Imp(A, B), b=B), ab_b, ab_nb)
    return discharge(d2, [ded.keep[h1], ded.keep[h2]])[0]


def _lemma_ds() -> Derivation:
    d = Derivation()
    h1, h2 = d.hyp(Or(A, B)), d.hyp(Not(A))
    ab = d.mp(h2, d.use("efq", A, B))
    step = d.mps(d.ax("A8", a=A, b=B, c=B), ab, d.use("id", B))
    d.mp(h1, step)
    return discharge(d, [h1, h2])[0]


LEMMAS: Dict[str, Tuple[Callable[[], Derivation], int, Circuit]] = {
    "id": (_lemma_id, 1, Imp(A, A)),
    "hs": (_lemma_hs, 3, Imp(Imp(A, B), Imp(Imp(B, C), Imp(A, C)))),
    "dni": (_lemma_dni, 1, Imp(A, Not(Not(A)))),
    "efq": (_lemma_efq, 2, Imp(Not(A), Imp(A, B))),
    "em": (_lemma_em, 1, Or(A, Not(A))),
    "cases": (_lemma_cases, 2, Imp(Imp(A, B), Imp(Imp(Not(A), B), B))),
    "and_l": (_lemma_and_l, 2, Imp(Not(A), Not(And(A, B)))),
    "and_r": (_lemma_and_r, 2, Imp(Not(B), Not(And(A, B)))),
    "or_neg": (_lemma_or_neg, 2, Imp(Not(A), Imp(Not(B), Not(Or(A, B))))),
    "imp_neg": (_lemma_imp_neg, 2, Imp(A, Imp(Not(B), Not(Imp(A, B))))),
    "ds": (_lemma_ds, 2, Imp(Or(A, B), Imp(Not(A), B))),
}


@lru_cache(maxsize=None)
def lemma(name: str) -> WfProof:
    """The schematic lemma proof over atoms x0, x1, x2."""
    build, _, statement = LEMMAS[name]
    return build().proof(statement)


def lemma_instance(name: str, *args: Circuit) -> WfProof:
    arity = LEMMAS[name][1]
    if len(args) != arity:
        raise ShapeError(f"lemma {name} takes {arity} formulas")
    return substitute_proof(lemma(name), dict(enumerate(args)))


# --- truth-value prover --------------------------------------------------------------------------------

class _Prover:
    """Proves each needed node or its negation from literal hypotheses."""

    def __init__(self, der: Derivation, root: Circuit, literals: Dict[int, int], values: Dict[int, int]):
        self.d = der
        self.c = root
        self.lit = literals      # variable -> hypothesis line
        self.val = values        # variable -> 0/1
        self.memo: Dict[int, Tuple[int, int]] = {}
        self.env = [values.get(j, 0) for j in range(root.inputs)]
        self.values = root.node_values(self.env)

    def value(self, ref: int) -> int:
        if ref == ONE:
            return 1
        if ref == ZERO:
            return 0
        return self.values[ref]

    def sub(self, ref: int) -> Circuit:
        return node(self.c, ref)

    def prove(self, ref: int) -> int:
        """Line proving node ``ref`` if it is true, its negation otherwise."""
        if ref in self.memo:
            return self.memo[ref][0]
        d = self.d
        if ref == ONE:
            line = d.ax("T1")
        elif ref == ZERO:
            line = d.ax("T2")
        elif ref < self.c.inputs:
            if ref not in self.lit:
                raise ShapeError(f"no hypothesis for x{ref}")
            line = self.lit[ref]
        else:
            op, args = self.c.node(ref)
            line = getattr(self, "_" + op.lower())(*args)
        self.memo[ref] = (line, self.value(ref))
        return line

    def _not(self, u: int) -> int:
        if not self.value(u):
            return self.prove(u)
        return self.d.mp(self.prove(u), self.d.use("dni", self.sub(u)))

    def _and(self, a: int, b: int) -> int:
        d, va, vb = self.d, self.value(a), self.value(b)
        if va and vb:
            return d.mps(d.ax("A5", a=self.sub(a), b=self.sub(b)), self.prove(a), self.prove(b))
        if not va:
            return d.mp(self.prove(a), d.use("and_l", self.sub(a), self.sub(b)))
        return d.mp(self.prove(b), d.use("and_r", self.sub(a), self.sub(b)))

    def _or(self, a: int, b: int) -> int:
        d, va, vb = self.d, self.value(a), self.value(b)
        if va:
            return d.mp(self.prove(a), d.ax("A6", a=self.sub(a), b=self.sub(b)))
        if vb:
            return d.mp(self.prove(b), d.ax("A7", a=self.sub(a), b=self.sub(b)))
        return d.mps(d.use("or_neg", self.sub(a), self.sub(b)), self.prove(a), self.prove(b))

    def _imp(self, a: int, b: int) -> int:
        d, va, vb = self.d, self.value(a), self.value(b)
        if vb:
            return d.mp(self.prove(b), d.ax("A1", a=self.sub(b), b=self.sub(a)))
        if not va:
            return d.mp(self.prove(a), d.use("efq", self.sub(a), self.sub(b)))
        return d.mps(d.use("imp_neg", self.sub(a), self.sub(b)), self.prove(a), self.prove(b))


def prove_ground(phi: Circuit) -> WfProof:
    """Proof of a variable-free formula that evaluates to true."""
    if phi.variables():
        raise ShapeError("formula has variables")
    d = Derivation()
    p = _Prover(d, phi, {}, {})
    if not p.value(phi.output):
        raise ShapeError("formula is false")
    p.prove(phi.output)
    return d.proof(phi)


def refute_ground(phi: Circuit) -> WfProof:
    """Proof of the negation of a false variable-free formula."""
    if phi.variables():
        raise ShapeError("formula has variables")
    d = Derivation()
    p = _Prover(d, phi, {}, {})
    if p.value(phi.output):
        raise ShapeError("formula is true")
    p.prove(phi.output)
    return d.proof(Not(phi))


def _literal(j: int, v: int) -> Circuit:
    return var(j) if v else Not(var(j))


def _branch(phi: Circuit, atoms: Sequence[int], fixed: Tuple[Tuple[int, int], ...]) -> WfProof:
    """Closed proof of l_1 -> (l_2 -> ... -> phi) for the literals in ``fixed``."""
    d = Derivation()
    hyps = [d.hyp(_literal(j, v)) for j, v in fixed]
    if len(fixed) == len(atoms):
        lits = {j: h for (j, _), h in zip(fixed, hyps)}
        _Prover(d, phi, lits, dict(fixed)).prove(phi.output)
    else:
        p = atoms[len(fixed)]
        pos = d.mps(d.cite(_branch(phi, atoms, fixed + ((p, 1),))), *hyps)
        neg = d.mps(d.cite(_branch(phi, atoms, fixed + ((p, 0),))), *hyps)
        d.mps(d.use("cases", var(p), phi), pos, neg)
    der, goal = discharge(d, hyps)
    return WfProof(tuple(der.lines[: goal + 1]), der[goal])


def prove_tautology(phi: Circuit) -> WfProof:
    """Case split on every variable, proving each branch from its literals."""
    n = phi.inputs
    if any(evaluate(phi, [(y >> j) & 1 for j in range(n)]) == 0 for y in range(1 << n)):
        raise ShapeError("not a tautology")
    proof = _branch(phi, sorted(phi.variables()), ())
    return WfProof(proof.lines, phi)


# --- xor sketch at n = 2, s = 0 -------------------------------------------------------------------------

ZERO_GATE_TABLES = (0b0000, 0b1111, 0b1010, 0b1100)  # 0, 1, x0, x1 as 4-bit tables


def tt_zero(shift: int) -> Circuit:
    """``tt(h XOR g, 0)`` over table variables ``g_0..g_3`` with ``h = shift``.

    True iff the table differs from every circuit with no gates.
    """
    def differs(y: int, bit: int) -> Circuit:
        return Not(var(y)) if bit else var(y)

    return big_and([
        big_or([differs(y, ((c ^ shift) >> y) & 1) for y in range(4)]) for c in ZERO_GATE_TABLES
    ])


@dataclass(frozen=True)
class XorSketch:
    h: int
    g: int
    family: WfProof      # proves tt(g,0) OR tt(h^g,0) for all g
    instance: WfProof    # proves tt(h^g,0) for the fixed g
    survivor: Circuit


def xor_sketch(h: int = 0b1001, g: int = 0b1010) -> XorSketch:
    """Prove the disjunction family, plug in ``g`` and keep the surviving disjunct.

    ``g`` must be a zero-gate table, so that ``tt(g, 0)`` is the false side.
    """
    if g not in ZERO_GATE_TABLES:
        raise ShapeError("g must have a zero-gate circuit")
    left, right = tt_zero(0), tt_zero(h)
    family = prove_tautology(Or(left, right))
    rho = {y: (g >> y) & 1 for y in range(4)}
    plugged = substitute_proof(family, rho)
    dead, alive = substitute(left.with_inputs(4), rho), substitute(right.with_inputs(4), rho)
    d = Derivation()
    disj = d.cite(plugged)
    not_dead = d.cite(refute_ground(dead))
    d.mps(d.use("ds", dead, alive), disj, not_dead)
    return XorSketch(h, g, family, d.proof(alive), alive)


# --- fixture corpus ---------------------------------------------------------------------------------------

def _axiom_fixture(scheme: str) -> WfProof:
    atoms = {"a": var(0), "b": var(1), "c": var(2)}
    d = Derivation()
    d.ax(scheme, **{k: atoms[k] for k in scheme_vars(AXIOMS[scheme])})
    return d.proof()


def mp_chain() -> WfProof:
    """Six lines: phi, phi -> psi, psi, then a weakening and a similarity step."""
    p, q, r = var(0), var(1), var(2)
    d = Derivation()
    phi = d.ax("A1", a=p, b=q)
    imp = d.ax("A2", a=p, b=q, c=p)
    psi = d.mp(phi, imp)
    w = d.mp(psi, d.ax("A1", a=d[psi], b=r))
    d.sim(w, _unshare(d[w]))
    return d.proof()


def _unshare(c: Circuit) -> Circuit:
    """Tree copy of a circuit: every gate use gets its own node."""
    b = CircuitBuilder(c.inputs, share=False)

    def copy(ref: int) -> int:
        g = c.node(ref)
        if g is None:
            return ref
        return b.gate(g[0], *(copy(a) for a in g[1]))

    return b.build(copy(c.output), trim=False)


def sim_fixture() -> WfProof:
    x, y = var(0), var(1)
    shared = And(x, y)
    big = Or(shared, Not(shared))
    d = Derivation()
    first = d.ax("A1", a=big, b=shared)
    tree = _unshare(d[first])
    d.sim(first, tree)
    d.sim(first + 1, d[first])
    return d.proof(tree)


def dwphp_minimal() -> WfProof:
    """m = 2, n = 1, identity C-circuits, then an unrelated closing line."""
    d = Derivation()
    wire = var(0)
    d.dwphp([wire, wire], [var(0)], [1, 2])
    d.ax("T1")
    return d.proof(TRUE)


def dwphp_parametric() -> WfProof:
    """Earlier lines, a C-circuit with an ambient parameter, and D using a fresh variable."""
    d = Derivation()
    first = d.ax("A1", a=var(0), b=var(1))
    c1 = Circuit(3, (("AND", (0, 2)),), (3,))       # arg0 AND x0
    c2 = Circuit(2, (("NOT", (1,)),), (2,))
    c3 = Circuit(2, (("OR", (0, 1)),), (2,))
    d.dwphp([c1, c2, c3], [Or(var(0), var(2)), var(1)], [2, 3, 4])
    d.mp(first, d.ax("A1", a=d[first], b=var(1)))
    return d.proof()


def fixture_corpus(large: bool = False) -> List[Tuple[str, WfProof]]:
    """Named proofs that ``check_proof`` must accept."""
    out: List[Tuple[str, WfProof]] = [(f"axiom-{s}", _axiom_fixture(s)) for s in AXIOMS]
    out.append(("mp-chain", mp_chain()))
    out.extend((f"lemma-{name}", lemma(name)) for name in LEMMAS)
    out.append(("similarity", sim_fixture()))
    out.append(("dwphp-minimal", dwphp_minimal()))
    out.append(("dwphp-parametric", dwphp_parametric()))
    out.append(("ground", prove_ground(Imp(And(TRUE, Not(FALSE)), Or(FALSE, Not(And(TRUE, FALSE)))))))
    peirce = Imp(Imp(Imp(var(0), var(1)), var(0)), var(0))
    out.append(("peirce", prove_tautology(peirce)))
    chain = mp_chain()
    top = chain.lines[-1].circuit
    weak = Derivation()
    weak.ax("A1", a=top, b=var(3))
    out.append(("compose", compose_mp(chain, weak.proof())))
    out.append((
        "substituted-hs",
        substitute_proof(lemma("hs"), {0: And(var(0), var(1)), 1: Not(var(2)), 2: Or(var(3), var(0))}),
    ))
    out.append(("compose-dwphp", compose_mp(dwphp_parametric(), _weaken_proof(dwphp_parametric(), var(2)))))
    if large:
        sketch = xor_sketch()
        out.append(("xor-family", sketch.family))
        out.append(("xor-instance", sketch.instance))
    return out


def _weaken_proof(proof: WfProof, extra: Circuit) -> WfProof:
    """One-line proof of ``phi -> (extra -> phi)`` for the conclusion phi."""
    d = Derivation()
    d.ax("A1", a=proof.conclusion, b=extra)
    return d.proof()
