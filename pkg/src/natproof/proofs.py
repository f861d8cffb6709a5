"""Checker for WF-style proofs: Frege lines over circuits, similarity, dWPHP.

Proof lines are single-output circuits over {NOT, AND, OR, IMP} and the
constants. Justifications:

* ``Axiom(scheme, subst)``: the line unfolds to the scheme instance.
* ``ModusPonens((j, k))``: line ``k`` is ``IMP(A_j, line)`` up to unfolding.
* ``Similar(j)``: the line unfolds to the same formula as line ``j``.
* ``Dwphp(C, D, r)``: the line unfolds to
  ``OR_l NEQ(x_{r_l}, C_l(D_1..D_n))`` (left-nested, ``l = 1..m``), with
  ``NEQ(a, b) = NOT((a AND b) OR (NOT a AND NOT b))`` and ``n < m``. Input
  ``i < n`` of ``C_l`` is its ``i``-th argument; input ``n + j`` is the
  ambient variable ``x_j``. The ``r_l`` are pairwise distinct and occur in no
  earlier line, no ``C_l`` and not in the conclusion (the ``D`` may use them).

Two circuits are similar when their tree unfoldings are the same formula.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .circuit import ONE, ZERO, Circuit, CircuitBuilder, from_text, substitute, to_text
from .errors import ConsistencyError, ShapeError

BAD_REF = "bad-ref"
RULE_MISMATCH = "rule-mismatch"
NOT_SIMILAR = "not-similar"
DWPHP_SHAPE = "dwphp-shape"
DWPHP_FRESHNESS = "dwphp-freshness"
WRONG_CONCLUSION = "wrong-conclusion"

PROOF_OPS = frozenset({"NOT", "AND", "OR", "IMP"})

# metavariables are strings, ("CONST", v) is a constant
Scheme = Union[str, tuple]

AXIOMS: Dict[str, Scheme] = {
    "A1": ("IMP", "a", ("IMP", "b", "a")),
    "A2": ("IMP", ("IMP", "a", ("IMP", "b", "c")), ("IMP", ("IMP", "a", "b"), ("IMP", "a", "c"))),
    "A3": ("IMP", ("AND", "a", "b"), "a"),
    "A4": ("IMP", ("AND", "a", "b"), "b"),
    "A5": ("IMP", "a", ("IMP", "b", ("AND", "a", "b"))),
    "A6": ("IMP", "a", ("OR", "a", "b")),
    "A7": ("IMP", "b", ("OR", "a", "b")),
    "A8": ("IMP", ("IMP", "a", "c"), ("IMP", ("IMP", "b", "c"), ("IMP", ("OR", "a", "b"), "c"))),
    "A9": ("IMP", ("IMP", "a", "b"), ("IMP", ("IMP", "a", ("NOT", "b")), ("NOT", "a"))),
    "A10": ("IMP", ("NOT", ("NOT", "a")), "a"),
    "T1": ("CONST", 1),
    "T2": ("NOT", ("CONST", 0)),
}


def scheme_vars(scheme: Scheme) -> List[str]:
    out: List[str] = []

    def walk(t):
        if isinstance(t, str):
            if t not in out:
                out.append(t)
        elif t[0] != "CONST":
            for child in t[1:]:
                walk(child)

    walk(scheme)
    return sorted(out)


# --- justifications ----------------------------------------------------------------

@dataclass(frozen=True)
class Axiom:
    scheme: str
    subst: Tuple[Tuple[str, Circuit], ...]

    @classmethod
    def of(cls, scheme: str, **subst: Circuit) -> "Axiom":
        return cls(scheme, tuple(sorted(subst.items())))


@dataclass(frozen=True)
class ModusPonens:
    premises: Tuple[int, int]  # (minor j: phi, major k: phi -> psi)


@dataclass(frozen=True)
class Similar:
    ref: int


@dataclass(frozen=True)
class Dwphp:
    C: Tuple[Circuit, ...]
    D: Tuple[Circuit, ...]
    r: Tuple[int, ...]


@dataclass(frozen=True)
class Hypothesis:
    """Open assumption; only meaningful inside a derivation under construction."""


Justification = Union[Axiom, ModusPonens, Similar, Dwphp, Hypothesis]


@dataclass(frozen=True)
class Line:
    circuit: Circuit
    just: Justification


@dataclass(frozen=True)
class WfProof:
    lines: Tuple[Line, ...]
    conclusion: Optional[Circuit] = None

    def __len__(self) -> int:
        return len(self.lines)

    @property
    def size(self) -> int:
        return sum(line.circuit.size + 1 for line in self.lines)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    line: Optional[int] = None
    reason: Optional[str] = None
    detail: str = ""

    def to_json(self) -> Dict:
        return {"accepted": self.accepted, "line": self.line, "reason": self.reason, "detail": self.detail}


# --- similarity -------------------------------------------------------------------------

def _leaf(c: Circuit, r: int):
    if r == ZERO:
        return ("c", 0)
    if r == ONE:
        return ("c", 1)
    return ("x", r)


def similar_refs(c1: Circuit, a: int, c2: Circuit, b: int, memo: Optional[Dict] = None) -> bool:
    """Unfolding equality of node ``a`` of ``c1`` and node ``b`` of ``c2``."""
    memo = {} if memo is None else memo
    stack = [(a, b)]
    while stack:
        pair = stack[-1]
        if pair in memo:
            stack.pop()
            continue
        ga, gb = c1.node(pair[0]), c2.node(pair[1])
        if ga is None or gb is None:
            memo[pair] = ga is None and gb is None and _leaf(c1, pair[0]) == _leaf(c2, pair[1])
            stack.pop()
            continue
        if ga[0] != gb[0]:
            memo[pair] = False
            stack.pop()
            continue
        children = list(zip(ga[1], gb[1]))
        verdict = True
        pending = False
        for child in children:
            if child not in memo:
                stack.append(child)
                pending = True
                break
            if not memo[child]:
                verdict = False
                break
        if pending:
            continue
        memo[pair] = verdict
        stack.pop()
    return memo[(a, b)]


def similar(c1: Circuit, c2: Circuit) -> bool:
    return similar_refs(c1, c1.output, c2, c2.output)


# --- formula assembly -------------------------------------------------------------------------

def instantiate(scheme: Scheme, subst: Mapping[str, Circuit]) -> Circuit:
    """The scheme with each metavariable replaced by its circuit."""
    width = max([c.inputs for c in subst.values()] + [0])
    b = CircuitBuilder(width)
    refs: Dict[str, int] = {}

    def walk(t) -> int:
        if isinstance(t, str):
            if t not in refs:
                if t not in subst:
                    raise KeyError(t)
                (refs[t],) = b.embed(subst[t].with_inputs(width))
            return refs[t]
        if t[0] == "CONST":
            return ONE if t[1] else ZERO
        return b.gate(t[0], *(walk(child) for child in t[1:]))

    return b.build(walk(scheme))


def dwphp_circuit(C: Sequence[Circuit], D: Sequence[Circuit], r: Sequence[int]) -> Circuit:
    """Canonical dWPHP disjunction for the declared circuits."""
    n = len(D)
    params = [c.inputs - n for c in C]
    width = max([max(r) + 1 if r else 0] + [d.inputs for d in D] + params)
    b = CircuitBuilder(width)
    args = [b.embed(d.with_inputs(width))[0] for d in D]
    disj = None
    for c, var in zip(C, r):
        env = {i: args[i] for i in range(n)}
        env.update({n + j: j for j in range(c.inputs - n)})
        (value,) = b.embed(c, env)
        both = b.AND(var, value)
        neither = b.AND(b.NOT(var), b.NOT(value))
        neq = b.NOT(b.OR(both, neither))
        disj = neq if disj is None else b.OR(disj, neq)
    return b.build(disj)


def c_parameters(c: Circuit, n: int) -> frozenset:
    """Ambient variables a dWPHP C-circuit mentions (inputs ``n + j``)."""
    return frozenset(j - n for j in c.variables() if j >= n)


def check_dwphp_line(
    line: Circuit,
    just: Dwphp,
    earlier: Sequence[Circuit] = (),
    conclusion: Optional[Circuit] = None,
) -> Tuple[bool, Optional[str], str]:
    """Validate one dWPHP line; returns (ok, reason, detail)."""
    C, D, r = just.C, just.D, just.r
    n, m = len(D), len(C)
    if not n < m:
        return False, DWPHP_SHAPE, f"needs n < m, got n={n}, m={m}"
    if len(r) != m:
        return False, DWPHP_SHAPE, f"{m} C-circuits but {len(r)} fresh variables"
    for c in list(C) + list(D):
        if len(c.outputs) != 1:
            return False, DWPHP_SHAPE, "declared circuits must be single-output"
    for ell, c in enumerate(C):
        if c.inputs < n:
            return False, DWPHP_SHAPE, f"C_{ell} has {c.inputs} inputs, needs at least {n}"
    if any(v < 0 for v in r):
        return False, DWPHP_SHAPE, "fresh variables must be input indices"
    if not similar(line, dwphp_circuit(C, D, r)):
        return False, DWPHP_SHAPE, "line is not the declared disjunction"
    if len(set(r)) != len(r):
        return False, DWPHP_FRESHNESS, "fresh variables are not pairwise distinct"
    taken = set()
    for c in earlier:
        taken |= c.variables()
    if conclusion is not None:
        taken |= conclusion.variables()
    for c in C:
        taken |= c_parameters(c, n)
    clash = sorted(set(r) & taken)
    if clash:
        return False, DWPHP_FRESHNESS, f"x{clash[0]} is not fresh"
    return True, None, ""


def _right_of_imp(c: Circuit) -> Optional[Tuple[int, int]]:
    g = c.node(c.output)
    if g is None or g[0] != "IMP":
        return None
    return g[1][0], g[1][1]


def check_proof(proof: WfProof, conclusion: Optional[Circuit] = None) -> Verdict:
    """Accept iff every line is justified and the last line is similar to ``conclusion``."""
    conclusion = proof.conclusion if conclusion is None else conclusion
    lines = proof.lines
    for idx, line in enumerate(lines):
        c, just = line.circuit, line.just
        if len(c.outputs) != 1 or any(op not in PROOF_OPS for op, _ in c.gates):
            return Verdict(False, idx, RULE_MISMATCH, "line must be a single-output circuit over NOT/AND/OR/IMP")
        if isinstance(just, Axiom):
            scheme = AXIOMS.get(just.scheme)
            subst = dict(just.subst)
            if scheme is None:
                return Verdict(False, idx, RULE_MISMATCH, f"unknown scheme {just.scheme}")
            if set(subst) != set(scheme_vars(scheme)):
                return Verdict(False, idx, RULE_MISMATCH, "substitution does not match the scheme")
            if not similar(c, instantiate(scheme, subst)):
                return Verdict(False, idx, RULE_MISMATCH, f"not an instance of {just.scheme}")
        elif isinstance(just, ModusPonens):
            if len(just.premises) != 2 or not all(isinstance(p, int) and 0 <= p < idx for p in just.premises):
                return Verdict(False, idx, BAD_REF, f"premises {just.premises} are not earlier lines")
            j, k = just.premises
            major = lines[k].circuit
            parts = _right_of_imp(major)
            if parts is None:
                return Verdict(False, idx, RULE_MISMATCH, f"line {k} is not an implication")
            minor = lines[j].circuit
            if not similar_refs(major, parts[0], minor, minor.output):
                return Verdict(False, idx, RULE_MISMATCH, f"antecedent of line {k} differs from line {j}")
            if not similar_refs(major, parts[1], c, c.output):
                return Verdict(False, idx, RULE_MISMATCH, f"consequent of line {k} differs from this line")
        elif isinstance(just, Similar):
            if not isinstance(just.ref, int) or not 0 <= just.ref < idx:
                return Verdict(False, idx, BAD_REF, f"reference {just.ref} is not an earlier line")
            if not similar(c, lines[just.ref].circuit):
                return Verdict(False, idx, NOT_SIMILAR, f"not similar to line {just.ref}")
        elif isinstance(just, Dwphp):
            ok, reason, detail = check_dwphp_line(c, just, [l.circuit for l in lines[:idx]], conclusion)
            if not ok:
                return Verdict(False, idx, reason, detail)
        else:
            return Verdict(False, idx, RULE_MISMATCH, "open hypothesis or unknown justification")
    if not lines:
        return Verdict(False, 0, WRONG_CONCLUSION, "empty proof")
    if conclusion is None or not similar(lines[-1].circuit, conclusion):
        return Verdict(False, len(lines) - 1, WRONG_CONCLUSION, "last line is not the conclusion")
    return Verdict(True)


# --- substitution and composition ----------------------------------------------------------------

def fresh_variables(proof: WfProof) -> List[int]:
    out: List[int] = []
    for line in proof.lines:
        if isinstance(line.just, Dwphp):
            out.extend(v for v in line.just.r if v not in out)
    return out


def _all_variables(proof: WfProof) -> set:
    seen = set()
    circuits = [l.circuit for l in proof.lines]
    if proof.conclusion is not None:
        circuits.append(proof.conclusion)
    for line in proof.lines:
        j = line.just
        if isinstance(j, Axiom):
            circuits.extend(c for _, c in j.subst)
        elif isinstance(j, Dwphp):
            circuits.extend(j.D)
            seen.update(j.r)
    for c in circuits:
        seen |= c.variables()
    return seen


def _projection(width: int, j: int) -> Circuit:
    return Circuit(width, (), (j,))


def _map_c(c: Circuit, n: int, rho: Mapping[int, Union[Circuit, int]]) -> Circuit:
    """Apply an ambient substitution to the parameter inputs of a C-circuit."""
    inner: Dict[int, Union[Circuit, int]] = {}
    width = c.inputs
    for j in c_parameters(c, n):
        if j in rho:
            image = rho[j]
            if isinstance(image, Circuit):
                width = max(width, n + image.inputs)
    for j in c_parameters(c, n):
        if j in rho:
            image = rho[j]
            inner[n + j] = _shift(image, n, width) if isinstance(image, Circuit) else image
    return substitute(c.with_inputs(width), inner) if inner else c


def _shift(c: Circuit, offset: int, width: int) -> Circuit:
    """``c`` with input ``j`` moved to ``offset + j`` in a circuit of ``width`` inputs."""
    return _relabel(c, {j: offset + j for j in range(c.inputs)}, width)


def _relabel(c: Circuit, mapping: Mapping[int, int], width: int) -> Circuit:
    b = CircuitBuilder(width, share=False)
    env = {j: mapping.get(j, j) for j in range(c.inputs)}
    return b.build(*b.embed(c, env), trim=False)


def _apply(proof: WfProof, rho: Mapping[int, Union[Circuit, int]], conclusion: Optional[Circuit]) -> WfProof:
    def sub(c: Circuit) -> Circuit:
        live = {j: v for j, v in rho.items() if j < c.inputs}
        return substitute(c, live) if live else c

    lines = []
    for line in proof.lines:
        j = line.just
        if isinstance(j, Axiom):
            j = Axiom(j.scheme, tuple((name, sub(c)) for name, c in j.subst))
        elif isinstance(j, Dwphp):
            j = Dwphp(tuple(_map_c(c, len(j.D), rho) for c in j.C), tuple(sub(d) for d in j.D), j.r)
        lines.append(Line(sub(line.circuit), j))
    return WfProof(tuple(lines), conclusion)


def rename_variables(proof: WfProof, mapping: Mapping[int, int]) -> WfProof:
    """Rename variables everywhere, fresh-variable lists included."""
    if not mapping:
        return proof
    width = max(list(mapping.values()) + [0]) + 1
    rho = {j: _projection(width, k) for j, k in mapping.items()}
    out = _apply(proof, rho, None if proof.conclusion is None else substitute(proof.conclusion, {
        j: v for j, v in rho.items() if j < proof.conclusion.inputs}))
    lines = tuple(
        Line(l.circuit, Dwphp(l.just.C, l.just.D, tuple(mapping.get(v, v) for v in l.just.r)))
        if isinstance(l.just, Dwphp) else l
        for l in out.lines
    )
    return WfProof(lines, out.conclusion)


def _is_identity(j: int, image) -> bool:
    return isinstance(image, Circuit) and image.size == 0 and image.outputs == (j,)


def substitute_proof(proof: WfProof, rho: Mapping[int, Union[Circuit, int]]) -> WfProof:
    """Push a substitution through every line, keeping every justification.

    dWPHP fresh variables that ``rho`` maps, or that some image mentions,
    are first renamed to unused indices.
    """
    rho = {j: v for j, v in rho.items() if not _is_identity(j, v)}
    if not rho:
        return proof
    fresh = fresh_variables(proof)
    image_vars = set()
    for v in rho.values():
        if isinstance(v, Circuit):
            image_vars |= v.variables()
        elif v not in (0, 1):
            raise ShapeError(f"bad substitution image {v!r}")
    clashes = [v for v in fresh if v in rho or v in image_vars]
    if clashes:
        top = max(_all_variables(proof) | image_vars | set(rho) | {-1}) + 1
        proof = rename_variables(proof, {v: top + k for k, v in enumerate(clashes)})
    conclusion = proof.conclusion
    if conclusion is not None:
        live = {j: v for j, v in rho.items() if j < conclusion.inputs}
        conclusion = substitute(conclusion, live) if live else conclusion
    out = _apply(proof, rho, conclusion)
    if set(fresh_variables(out)) & set(rho):
        raise ConsistencyError("fresh variable still in the substitution domain")
    return out


def _consequent(c: Circuit) -> Circuit:
    parts = _right_of_imp(c)
    if parts is None:
        raise ShapeError("second proof does not end in an implication")
    return Circuit(c.inputs, c.gates, (parts[1],)).trim()


def _shift_refs(line: Line, offset: int) -> Line:
    j = line.just
    if isinstance(j, ModusPonens):
        return Line(line.circuit, ModusPonens((j.premises[0] + offset, j.premises[1] + offset)))
    if isinstance(j, Similar):
        return Line(line.circuit, Similar(j.ref + offset))
    return line


def compose_mp(proof_phi: WfProof, proof_imp: WfProof) -> WfProof:
    """Concatenate proofs of ``phi`` and ``phi -> psi`` and close with modus ponens."""
    if not proof_phi.lines or not proof_imp.lines:
        raise ShapeError("cannot compose empty proofs")
    last_imp = proof_imp.lines[-1].circuit
    parts = _right_of_imp(last_imp)
    last_phi = proof_phi.lines[-1].circuit
    if parts is None or not similar_refs(last_imp, parts[0], last_phi, last_phi.output):
        raise ShapeError("second proof does not end in phi -> psi for the first proof's phi")
    psi = _consequent(last_imp)
    used = _all_variables(proof_phi) | _all_variables(proof_imp) | psi.variables()
    top = max(used | {-1}) + 1
    fresh_a, fresh_b = fresh_variables(proof_phi), fresh_variables(proof_imp)
    first = rename_variables(proof_phi, {v: top + k for k, v in enumerate(fresh_a)})
    second = rename_variables(proof_imp, {v: top + len(fresh_a) + k for k, v in enumerate(fresh_b)})
    offset = len(first.lines)
    lines = list(first.lines) + [_shift_refs(l, offset) for l in second.lines]
    lines.append(Line(psi, ModusPonens((offset - 1, len(lines) - 1))))
    return WfProof(tuple(lines), psi)


# --- JSON -------------------------------------------------------------------------------------------

def _just_json(j: Justification) -> Dict:
    if isinstance(j, Axiom):
        return {"type": "axiom", "scheme": j.scheme, "subst": {k: to_text(c) for k, c in j.subst}}
    if isinstance(j, ModusPonens):
        return {"type": "mp", "premises": list(j.premises)}
    if isinstance(j, Similar):
        return {"type": "sim", "ref": j.ref}
    if isinstance(j, Dwphp):
        return {"type": "dwphp", "C": [to_text(c) for c in j.C], "D": [to_text(d) for d in j.D], "r": list(j.r)}
    return {"type": "hyp"}


def proof_to_json(proof: WfProof) -> str:
    return json.dumps(
        {
            "conclusion": None if proof.conclusion is None else to_text(proof.conclusion),
            "lines": [{"circuit": to_text(l.circuit), "just": _just_json(l.just)} for l in proof.lines],
        },
        indent=1,
    )


def _just_from(raw: Dict) -> Justification:
    kind = raw.get("type")
    if kind == "axiom":
        return Axiom(str(raw["scheme"]), tuple(sorted((k, from_text(v)) for k, v in raw["subst"].items())))
    if kind == "mp":
        return ModusPonens(tuple(int(p) for p in raw["premises"]))
    if kind == "sim":
        return Similar(int(raw["ref"]))
    if kind == "dwphp":
        return Dwphp(
            tuple(from_text(c) for c in raw["C"]),
            tuple(from_text(d) for d in raw["D"]),
            tuple(int(v) for v in raw["r"]),
        )
    if kind == "hyp":
        return Hypothesis()
    raise ShapeError(f"unknown justification type {kind!r}")


def proof_from_json(text: str) -> WfProof:
    raw = json.loads(text)
    try:
        lines = tuple(Line(from_text(l["circuit"]), _just_from(l["just"])) for l in raw["lines"])
        concl = raw.get("conclusion")
        return WfProof(lines, None if concl is None else from_text(concl))
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"malformed proof file: {exc}") from exc
