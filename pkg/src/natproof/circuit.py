"""Boolean circuits, truth tables and the operations built on them.

Node numbering: for a circuit with ``n`` inputs, node ``j < n`` is input
``x_j`` and node ``n + k`` is gate ``k``. The constants are the negative refs
``ZERO`` and ``ONE``. Gates are ``(op, (a,))`` for NOT and ``(op, (a, b))``
for binary connectives, with operands strictly earlier than the gate.

Truth tables are little-endian: bit ``y`` of the packed integer is ``f(y)``
and input ``x_j`` is bit ``j`` of ``y``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from . import _search
from .errors import BudgetError, ShapeError

ZERO = -1
ONE = -2

ARITY = {"NOT": 1, "AND": 2, "OR": 2, "XOR": 2, "IMP": 2}
DEFAULT_BASIS = ("NOT", "AND", "OR")
TABLE_BUDGET_INPUTS = 20

# completeness bounds for the default basis, from the exact size histograms
COMPLETENESS_BOUND = {0: 0, 1: 1, 2: 4, 3: 8}

Gate = Tuple[str, Tuple[int, ...]]


@dataclass(frozen=True, order=True)
class TruthTable:
    """A Boolean function of ``n`` inputs as a packed ``2**n``-bit integer."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 0:
            raise ShapeError("negative arity")
        if not 0 <= self.bits < (1 << (1 << self.n)):
            raise ShapeError(f"table value out of range for n={self.n}")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "TruthTable":
        size = len(bits)
        n = size.bit_length() - 1
        if size < 1 or (1 << n) != size:
            raise ShapeError(f"table length {size} is not a power of two")
        return cls(n, sum((int(b) & 1) << y for y, b in enumerate(bits)))

    @classmethod
    def from_function(cls, n: int, f: Callable[[int], int]) -> "TruthTable":
        return cls(n, sum((int(f(y)) & 1) << y for y in range(1 << n)))

    @classmethod
    def constant(cls, n: int, value: int) -> "TruthTable":
        return cls(n, full_mask(n) if value else 0)

    @classmethod
    def projection(cls, n: int, j: int) -> "TruthTable":
        if not 0 <= j < n:
            raise ShapeError(f"no input x{j} among {n}")
        return cls(n, input_column(n, j))

    def __len__(self) -> int:
        return 1 << self.n

    def __getitem__(self, y: int) -> int:
        if not 0 <= y < len(self):
            raise ShapeError(f"point {y} outside 2^{self.n}")
        return (self.bits >> y) & 1

    def __iter__(self) -> Iterator[int]:
        return (self[y] for y in range(len(self)))

    def __xor__(self, other: "TruthTable") -> "TruthTable":
        if other.n != self.n:
            raise ShapeError("xor of tables with different arity")
        return TruthTable(self.n, self.bits ^ other.bits)

    def __invert__(self) -> "TruthTable":
        return TruthTable(self.n, self.bits ^ full_mask(self.n))

    def ones(self) -> int:
        return bin(self.bits).count("1")

    def to_array(self) -> np.ndarray:
        return np.array(list(self), dtype=np.uint8)

    def bitstring(self) -> str:
        """Entries in point order, ``f(0)`` first."""
        return "".join(str(b) for b in self)

    def hex(self) -> str:
        return f"0x{self.bits:x}"


def full_mask(n: int) -> int:
    return (1 << (1 << n)) - 1


@functools.lru_cache(maxsize=None)
def input_column(n: int, j: int) -> int:
    """Packed table of the projection ``x_j`` on ``n`` inputs."""
    return sum(1 << y for y in range(1 << n) if (y >> j) & 1)


def _apply(op: str, a: int, b: int, full: int) -> int:
    if op == "AND":
        return a & b
    if op == "OR":
        return a | b
    if op == "NOT":
        return full ^ a
    if op == "XOR":
        return a ^ b
    if op == "IMP":
        return (full ^ a) | b
    raise ShapeError(f"unknown connective {op}")


@dataclass(frozen=True)
class Circuit:
    inputs: int
    gates: Tuple[Gate, ...]
    outputs: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple((op, tuple(args)) for op, args in self.gates))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.inputs < 0:
            raise ShapeError("negative input count")
        if not self.outputs:
            raise ShapeError("a circuit needs at least one output")
        for k, (op, args) in enumerate(self.gates):
            if op not in ARITY:
                raise ShapeError(f"gate g{k}: unknown connective {op}")
            if len(args) != ARITY[op]:
                raise ShapeError(f"gate g{k}: {op} takes {ARITY[op]} operands")
            for r in args:
                self._check_ref(r, self.inputs + k, f"gate g{k}")
        for r in self.outputs:
            self._check_ref(r, self.inputs + len(self.gates), "output")

    @staticmethod
    def _check_ref(r: int, limit: int, where: str) -> None:
        if r not in (ZERO, ONE) and not 0 <= r < limit:
            raise ShapeError(f"{where}: operand {r} is not an earlier node")

    @property
    def size(self) -> int:
        return len(self.gates)

    @property
    def output(self) -> int:
        if len(self.outputs) != 1:
            raise ShapeError("operation needs a single-output circuit")
        return self.outputs[0]

    def node(self, ref: int) -> Optional[Gate]:
        """The gate behind ``ref`` or None for inputs and constants."""
        return self.gates[ref - self.inputs] if ref >= self.inputs else None

    def variables(self) -> frozenset:
        """Inputs that are reachable from some output."""
        return frozenset(r for r in self.reachable() if 0 <= r < self.inputs)

    def reachable(self) -> frozenset:
        seen = set()
        stack = [r for r in self.outputs]
        while stack:
            r = stack.pop()
            if r in seen:
                continue
            seen.add(r)
            g = self.node(r)
            if g is not None:
                stack.extend(g[1])
        return frozenset(seen)

    def trim(self) -> "Circuit":
        """Drop gates that no output depends on."""
        live = self.reachable()
        remap = {ZERO: ZERO, ONE: ONE}
        remap.update({j: j for j in range(self.inputs)})
        gates = []
        for k, (op, args) in enumerate(self.gates):
            ref = self.inputs + k
            if ref in live:
                remap[ref] = self.inputs + len(gates)
                gates.append((op, tuple(remap[a] for a in args)))
        return Circuit(self.inputs, tuple(gates), tuple(remap[r] for r in self.outputs))

    def with_inputs(self, inputs: int) -> "Circuit":
        """Same circuit over a wider (or equal) variable set."""
        if inputs < self.inputs:
            raise ShapeError("cannot shrink the input count")
        shift = inputs - self.inputs

        def move(r):
            return r + shift if r >= self.inputs else r

        gates = tuple((op, tuple(move(a) for a in args)) for op, args in self.gates)
        return Circuit(inputs, gates, tuple(move(r) for r in self.outputs))

    def node_values(self, x: Sequence[int]) -> List[int]:
        values = [int(b) & 1 for b in x]
        for op, args in self.gates:
            vals = [self._value(values, r) for r in args]
            values.append(_apply(op, vals[0], vals[-1], 1))
        return values

    @staticmethod
    def _value(values: List[int], r: int) -> int:
        if r == ZERO:
            return 0
        if r == ONE:
            return 1
        return values[r]

    def packed_values(self, columns: Sequence[int], full: int) -> List[int]:
        """Evaluate every node on bit-packed input columns."""
        values = list(columns)

        def get(r):
            if r == ZERO:
                return 0
            if r == ONE:
                return full
            return values[r]

        for op, args in self.gates:
            values.append(_apply(op, get(args[0]), get(args[-1]), full))
        return [get(r) for r in self.outputs]


def evaluate(c: Circuit, x: Sequence[int]) -> int:
    """Value of the single output of ``c`` on assignment ``x``."""
    if len(x) != c.inputs:
        raise ShapeError(f"circuit has {c.inputs} inputs, got {len(x)} bits")
    return Circuit._value(c.node_values(x), c.output)


def evaluate_all(c: Circuit, x: Sequence[int]) -> Tuple[int, ...]:
    if len(x) != c.inputs:
        raise ShapeError(f"circuit has {c.inputs} inputs, got {len(x)} bits")
    values = c.node_values(x)
    return tuple(Circuit._value(values, r) for r in c.outputs)


def point(n: int, y: int) -> Tuple[int, ...]:
    """The little-endian assignment with index ``y``."""
    return tuple((y >> j) & 1 for j in range(n))


def truth_table(c: Circuit, max_inputs: int = TABLE_BUDGET_INPUTS) -> TruthTable:
    if len(c.outputs) != 1:
        raise ShapeError("truth_table needs a single-output circuit")
    if c.inputs > max_inputs:
        raise BudgetError(f"truth table of {c.inputs} inputs exceeds the 2^{max_inputs} budget")
    n = c.inputs
    (bits,) = c.packed_values([input_column(n, j) for j in range(n)], full_mask(n))
    return TruthTable(n, bits)


def table_array(c: Circuit, max_inputs: int = TABLE_BUDGET_INPUTS) -> np.ndarray:
    """Truth table as a 0/1 uint8 array indexed by point."""
    bits = truth_table(c, max_inputs).bits
    raw = bits.to_bytes(max(1, ((1 << c.inputs) + 7) // 8), "little")
    return np.unpackbits(np.frombuffer(raw, np.uint8), bitorder="little")[: 1 << c.inputs]


class CircuitBuilder:
    """Append-only circuit construction with structural hash-consing.

    Identical (op, operands) requests return the existing node, so circuits
    built here never hold two gates with the same tree unfolding.
    """

    def __init__(self, inputs: int, share: bool = True):
        self.inputs = inputs
        self.gates: List[Gate] = []
        self._index: Dict[Gate, int] = {}
        self.share = share

    def var(self, j: int) -> int:
        if not 0 <= j < self.inputs:
            raise ShapeError(f"no input x{j} among {self.inputs}")
        return j

    def gate(self, op: str, *args: int) -> int:
        key = (op, tuple(args))
        if self.share and key in self._index:
            return self._index[key]
        limit = self.inputs + len(self.gates)
        for r in args:
            Circuit._check_ref(r, limit, op)
        if len(args) != ARITY.get(op, -1):
            raise ShapeError(f"bad gate {op}{args}")
        ref = limit
        self.gates.append(key)
        self._index.setdefault(key, ref)
        return ref

    def NOT(self, a: int) -> int:
        return self.gate("NOT", a)

    def AND(self, a: int, b: int) -> int:
        return self.gate("AND", a, b)

    def OR(self, a: int, b: int) -> int:
        return self.gate("OR", a, b)

    def IMP(self, a: int, b: int) -> int:
        return self.gate("IMP", a, b)

    def XOR(self, a: int, b: int) -> int:
        """The 4-gate gadget (a or b) and not (a and b)."""
        either = self.OR(a, b)
        both = self.AND(a, b)
        return self.AND(either, self.NOT(both))

    def embed(self, c: Circuit, env: Optional[Mapping[int, int]] = None) -> List[int]:
        """Copy ``c`` in, wiring its input ``j`` to ``env[j]`` (default: x_j)."""
        env = dict(env or {})
        refs: Dict[int, int] = {ZERO: ZERO, ONE: ONE}
        for j in range(c.inputs):
            refs[j] = env[j] if j in env else self.var(j)
        for k, (op, args) in enumerate(c.gates):
            refs[c.inputs + k] = self.gate(op, *(refs[a] for a in args))
        return [refs[r] for r in c.outputs]

    def build(self, *outputs: int, trim: bool = True) -> Circuit:
        c = Circuit(self.inputs, tuple(self.gates), tuple(outputs))
        return c.trim() if trim else c


def xor_combine(c1: Circuit, c2: Circuit) -> Circuit:
    """Pointwise XOR of two single-output circuits; size grows by 4."""
    if c1.inputs != c2.inputs:
        raise ShapeError("xor_combine needs equal input arity")
    b = CircuitBuilder(c1.inputs, share=False)
    (a,) = b.embed(Circuit(c1.inputs, c1.gates, (c1.output,)))
    (z,) = b.embed(Circuit(c2.inputs, c2.gates, (c2.output,)))
    return b.build(b.XOR(a, z), trim=False)


def substitute(c: Circuit, rho: Mapping[int, Union[Circuit, int]]) -> Circuit:
    """Replace inputs by circuits or constants.

    Unmapped inputs stay as they are. The result has as many inputs as the
    widest of ``c`` and the images, so images may mention extra variables.
    """
    for j in rho:
        if not 0 <= j < c.inputs:
            raise ShapeError(f"substitution for x{j}, but circuit has {c.inputs} inputs")
    width = c.inputs
    for image in rho.values():
        if isinstance(image, Circuit):
            if len(image.outputs) != 1:
                raise ShapeError("substituted circuits must be single-output")
            width = max(width, image.inputs)
        elif image not in (0, 1):
            raise ShapeError(f"bad substitution image {image!r}")
    b = CircuitBuilder(width, share=False)
    used = c.variables()
    env: Dict[int, int] = {}
    for j, image in sorted(rho.items()):
        if j not in used:
            continue
        if isinstance(image, Circuit):
            (env[j],) = b.embed(image.with_inputs(width))
        else:
            env[j] = ONE if image else ZERO
    return b.build(*b.embed(c.with_inputs(width), env), trim=False)


def random_circuit(n: int, s: int, seed: int, basis: Sequence[str] = DEFAULT_BASIS) -> Circuit:
    """Random circuit with exactly ``s`` gates; the last gate is the output.

    Each gate draws its connective uniformly from ``basis`` and each operand
    uniformly from all earlier nodes (inputs and prior gates, no constants).
    """
    if s < 1:
        raise ShapeError("random_circuit needs s >= 1")
    if n < 1:
        raise ShapeError("random_circuit needs at least one input")
    rng = np.random.default_rng(seed)
    gates = []
    for k in range(s):
        op = basis[int(rng.integers(len(basis)))]
        args = tuple(int(rng.integers(n + k)) for _ in range(ARITY[op]))
        gates.append((op, args))
    return Circuit(n, tuple(gates), (n + s - 1,))


def circuit_from_table(tt: TruthTable) -> Circuit:
    """Shannon-expansion circuit for ``tt``; shared subtables are built once."""
    b = CircuitBuilder(tt.n)
    memo: Dict[Tuple[int, int], int] = {}

    def build(level: int, bits: int) -> int:
        width = 1 << level
        if bits == 0:
            return ZERO
        if bits == (1 << width) - 1:
            return ONE
        if (level, bits) in memo:
            return memo[(level, bits)]
        half = width >> 1
        lo = build(level - 1, bits & ((1 << half) - 1))
        hi = build(level - 1, bits >> half)
        x = b.var(level - 1)
        ref = _mux(b, x, lo, hi)
        memo[(level, bits)] = ref
        return ref

    return b.build(build(tt.n, tt.bits))


def _mux(b: CircuitBuilder, sel: int, lo: int, hi: int) -> int:
    """``hi`` when ``sel`` else ``lo``, with constant operands folded."""
    if lo == hi:
        return lo
    if lo == ZERO and hi == ONE:
        return sel
    if lo == ONE and hi == ZERO:
        return b.NOT(sel)
    if lo == ZERO:
        return b.AND(sel, hi)
    if hi == ZERO:
        return b.AND(b.NOT(sel), lo)
    if lo == ONE:
        return b.OR(b.NOT(sel), hi)
    if hi == ONE:
        return b.OR(sel, lo)
    return b.OR(b.AND(sel, hi), b.AND(b.NOT(sel), lo))


# --- exact enumeration -------------------------------------------------------

_KERNEL_OPS = {"AND": _search.OP_AND, "OR": _search.OP_OR, "XOR": _search.OP_XOR}
_KERNEL_NAMES = {_search.OP_NOT: "NOT", _search.OP_AND: "AND", _search.OP_OR: "OR", _search.OP_XOR: "XOR"}
ENUMERATION_NODE_CAP = 200_000_000


def _basis_key(basis: Iterable[str]) -> Tuple[str, ...]:
    basis = tuple(sorted(set(basis)))
    for op in basis:
        if op != "NOT" and op not in _KERNEL_OPS:
            raise ShapeError(f"enumeration does not support connective {op}")
    return basis


@functools.lru_cache(maxsize=32)
def _size_table(n: int, s: int, basis: Tuple[str, ...], node_cap: int):
    if not 0 <= n <= 4:
        raise BudgetError(f"exact enumeration supports n <= 4, got {n}")
    binops = [_KERNEL_OPS[op] for op in ("AND", "OR", "XOR") if op in basis]
    best, wit, complete = _search.minimal_sizes(n, s, "NOT" in basis, binops, node_cap)
    if not complete:
        raise BudgetError(f"enumeration of n={n}, s={s} exceeded the node cap {node_cap}")
    best.setflags(write=False)
    wit.setflags(write=False)
    return best, wit


def minimal_size_table(
    n: int, s: int, basis: Sequence[str] = DEFAULT_BASIS, node_cap: int = ENUMERATION_NODE_CAP
) -> np.ndarray:
    """Exact minimal sizes of all ``2**2**n`` functions, or -1 when above ``s``."""
    best, _ = _size_table(n, s, _basis_key(basis), node_cap)
    out = best.copy()
    out[out > s] = -1
    return out


def enumerate_functions(
    n: int, s: int, basis: Sequence[str] = DEFAULT_BASIS, node_cap: int = ENUMERATION_NODE_CAP
) -> frozenset:
    """All truth tables computable with at most ``s`` gates over ``basis``."""
    if s < 0:
        return frozenset()
    sizes = minimal_size_table(n, s, basis, node_cap)
    return frozenset(TruthTable(n, int(f)) for f in np.flatnonzero(sizes >= 0))


def minimal_circuit(tt: TruthTable, s: int, basis: Sequence[str] = DEFAULT_BASIS) -> Optional[Circuit]:
    """A minimum-size circuit for ``tt`` if one with at most ``s`` gates exists."""
    best, wit = _size_table(tt.n, max(s, 0), _basis_key(basis), ENUMERATION_NODE_CAP)
    size = int(best[tt.bits])
    if size > s:
        return None
    n = tt.n
    if size == 0:
        if tt.bits == 0:
            return Circuit(n, (), (ZERO,))
        if tt.bits == full_mask(n):
            return Circuit(n, (), (ONE,))
        return Circuit(n, (), (next(j for j in range(n) if input_column(n, j) == tt.bits),))
    gates = []
    for g in range(size):
        op = _KERNEL_NAMES[int(wit[tt.bits, g, 0])]
        a, b = int(wit[tt.bits, g, 1]), int(wit[tt.bits, g, 2])
        gates.append((op, (a,) if op == "NOT" else (a, b)))
    return Circuit(n, tuple(gates), (n + size - 1,))


def size_histogram(n: int, basis: Sequence[str] = DEFAULT_BASIS) -> List[int]:
    """Number of functions of each exact minimal size, index = size."""
    bound = COMPLETENESS_BOUND.get(n)
    if bound is None:
        raise BudgetError(f"full size histogram is only available for n <= 3, got {n}")
    sizes = minimal_size_table(n, bound if tuple(basis) == DEFAULT_BASIS else 16, basis)
    if (sizes < 0).any():
        raise BudgetError("enumeration did not reach every function")
    return np.bincount(sizes).tolist()


# --- text format ---------------------------------------------------------------

def _ref_text(c: Circuit, r: int) -> str:
    if r == ZERO:
        return "0"
    if r == ONE:
        return "1"
    return f"x{r}" if r < c.inputs else f"g{r - c.inputs}"


def to_text(c: Circuit) -> str:
    lines = [f"n {c.inputs} {c.size}"]
    for k, (op, args) in enumerate(c.gates):
        lines.append(" ".join([f"g{k}", op] + [_ref_text(c, a) for a in args]))
    lines.extend(f"out {_ref_text(c, r)}" for r in c.outputs)
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Circuit:
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows or rows[0][0] != "n" or len(rows[0]) != 3:
        raise ShapeError("circuit text must start with 'n <inputs> <gates>'")
    try:
        inputs, count = int(rows[0][1]), int(rows[0][2])
    except ValueError as exc:
        raise ShapeError(f"bad header {' '.join(rows[0])}") from exc

    def ref(tok: str, limit: int) -> int:
        if tok == "0":
            return ZERO
        if tok == "1":
            return ONE
        try:
            idx = int(tok[1:])
        except ValueError as exc:
            raise ShapeError(f"bad ref {tok}") from exc
        if tok[0] == "x" and 0 <= idx < inputs:
            return idx
        if tok[0] == "g" and 0 <= idx < limit:
            return inputs + idx
        raise ShapeError(f"ref {tok} does not name an earlier node")

    gates, outputs = [], []
    for row in rows[1:]:
        if row[0] == "out":
            if len(row) != 2:
                raise ShapeError("output line is 'out <ref>'")
            outputs.append(ref(row[1], len(gates)))
            continue
        if outputs:
            raise ShapeError("gates after an output line")
        if row[0] != f"g{len(gates)}":
            raise ShapeError(f"expected gate id g{len(gates)}, got {row[0]}")
        if len(row) < 3 or row[1] not in ARITY or len(row) - 2 != ARITY[row[1]]:
            raise ShapeError(f"bad gate line: {' '.join(row)}")
        gates.append((row[1], tuple(ref(t, len(gates)) for t in row[2:])))
    if len(gates) != count:
        raise ShapeError(f"header promises {count} gates, found {len(gates)}")
    return Circuit(inputs, tuple(gates), tuple(outputs))
