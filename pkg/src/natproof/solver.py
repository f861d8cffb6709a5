"""Minimal complete DPLL with two-watched-literal unit propagation.

Branching is fixed: the lowest-numbered unassigned variable, tried true
first. A decision cap turns an unfinished search into INDETERMINATE.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import BudgetError, ConsistencyError

SAT = "SAT"
UNSAT = "UNSAT"
INDETERMINATE = "INDETERMINATE"

MAX_VARS = 5000


@dataclass(frozen=True)
class SolveResult:
    status: str
    assignment: Optional[Tuple[bool, ...]]  # entry v-1 is the value of variable v
    decisions: int

    def model(self) -> Dict[int, bool]:
        if self.assignment is None:
            return {}
        return {v + 1: b for v, b in enumerate(self.assignment)}

    def literals(self) -> List[int]:
        return [v if b else -v for v, b in self.model().items()]


def solve_clauses(
    num_vars: int,
    clauses: Sequence[Sequence[int]],
    node_cap: Optional[int] = None,
    max_vars: int = MAX_VARS,
) -> SolveResult:
    if num_vars > max_vars:
        raise BudgetError(f"{num_vars} variables exceeds the solver budget {max_vars}")
    val = [0] * (num_vars + 1)
    cls: List[List[int]] = []
    units: List[int] = []
    for raw in clauses:
        c = list(dict.fromkeys(int(l) for l in raw))
        if any(-l in c for l in c):
            continue
        if not c:
            return SolveResult(UNSAT, None, 0)
        if len(c) == 1:
            units.append(c[0])
        else:
            cls.append(c)
    watches: Dict[int, List[int]] = {}
    for ci, c in enumerate(cls):
        watches.setdefault(c[0], []).append(ci)
        watches.setdefault(c[1], []).append(ci)
    trail: List[int] = []

    def value(lit: int) -> int:
        v = val[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def assign(lit: int) -> None:
        val[lit if lit > 0 else -lit] = 1 if lit > 0 else -1
        trail.append(lit)

    for lit in units:
        v = value(lit)
        if v == -1:
            return SolveResult(UNSAT, None, 0)
        if v == 0:
            assign(lit)

    def propagate(head: int) -> bool:
        """Unit propagation from trail position ``head``; False on conflict."""
        while head < len(trail):
            false_lit = -trail[head]
            head += 1
            wl = watches.get(false_lit)
            if not wl:
                continue
            i = 0
            while i < len(wl):
                c = cls[wl[i]]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                if value(first) == 1:
                    i += 1
                    continue
                moved = False
                for k in range(2, len(c)):
                    if value(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        watches.setdefault(c[1], []).append(wl[i])
                        wl[i] = wl[-1]
                        wl.pop()
                        moved = True
                        break
                if moved:
                    continue
                if value(first) == -1:
                    return False
                assign(first)
                i += 1
        return True

    def undo(length: int) -> None:
        for lit in trail[length:]:
            val[lit if lit > 0 else -lit] = 0
        del trail[length:]

    stack: List[Tuple[int, int, bool]] = []
    decisions = 0
    head = 0
    hint = 1
    while True:
        if not propagate(head):
            while stack:
                length, var, flipped = stack.pop()
                undo(length)
                if not flipped:
                    stack.append((length, var, True))
                    assign(-var)
                    head = length
                    hint = var + 1
                    break
            else:
                return SolveResult(UNSAT, None, decisions)
            continue
        head = len(trail)
        var = hint
        while var <= num_vars and val[var] != 0:
            var += 1
        if var > num_vars:
            model = tuple(val[v] == 1 for v in range(1, num_vars + 1))
            for c in cls:
                if not any(model[abs(l) - 1] == (l > 0) for l in c):
                    raise ConsistencyError("solver model violates a clause")
            return SolveResult(SAT, model, decisions)
        if node_cap is not None and decisions >= node_cap:
            return SolveResult(INDETERMINATE, None, decisions)
        decisions += 1
        stack.append((len(trail), var, False))
        assign(var)
        hint = var + 1


def solve(F, node_cap: Optional[int] = None) -> SolveResult:
    """Solve a CnfFormula (anything with ``num_vars`` and ``clauses``)."""
    return solve_clauses(F.num_vars, F.clauses, node_cap)
