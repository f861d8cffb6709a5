"""The NW generator map NW_C: {0,1}^m -> {0,1}^N."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import Circuit, TruthTable, table_array
from .design import Design, select_bits
from .errors import ShapeError


@dataclass(frozen=True)
class NwGenerator:
    design: Design
    base: Circuit

    def __post_init__(self):
        if self.base.inputs != self.design.width:
            raise ShapeError(f"base circuit needs {self.design.width} inputs, has {self.base.inputs}")
        if len(self.base.outputs) != 1:
            raise ShapeError("base circuit must be single-output")
        object.__setattr__(self, "_table", table_array(self.base))

    @property
    def base_table(self) -> np.ndarray:
        return self._table


def _index(bits: np.ndarray) -> int:
    return int(np.dot(bits.astype(np.int64), 1 << np.arange(bits.shape[-1], dtype=np.int64)))


def nw_bit(G: NwGenerator, w: Sequence[int], i: int) -> int:
    return int(G.base_table[_index(select_bits(G.design, i, w))])


def nw_full(G: NwGenerator, w: Sequence[int]) -> TruthTable:
    bits = [nw_bit(G, w, i) for i in range(G.design.N)]
    return TruthTable.from_bits(bits)


def nw_batch(G: NwGenerator, ws: np.ndarray) -> np.ndarray:
    """Packed outputs for a batch of seeds, shape ``(count, m)`` -> ``(count,)``.

    Bit ``i`` of each result is the generator's ``i``-th output bit.
    """
    ws = np.asarray(ws, dtype=np.uint8)
    if ws.ndim != 2 or ws.shape[1] != G.design.m:
        raise ShapeError(f"seed batch must have shape (count, {G.design.m})")
    weights = 1 << np.arange(G.design.width, dtype=np.int64)
    out = np.zeros(ws.shape[0], dtype=np.int64)
    for i, row in enumerate(G.design.rows):
        idx = ws[:, list(row)].astype(np.int64) @ weights
        out |= G.base_table[idx].astype(np.int64) << i
    return out
