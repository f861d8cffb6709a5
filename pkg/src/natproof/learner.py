"""Distinguisher-to-learner construction over the NW generator.

Hybrid ``p_i`` (``i = 1..N+1``) feeds the property true generator bits for
design rows ``0..i-2`` and uniform bits ``r`` for rows ``i-1..N-1``. The
predictor for hybrid ``i`` fixes the seed outside row ``i-1`` and the random
string ``r``, answers the earlier rows from a small table of membership
queries, and outputs ``r_i XOR p_i`` (that is, ``not r_i`` iff ``p_i = 1``).

Exact bookkeeping: for uniform seed and ``r``, the predictor for hybrid ``i``
is correct with probability ``1/2 + Pr[p_i=1] - Pr[p_{i+1}=1]``.
"""

from __future__ import annotations

import functools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .circuit import ONE, ZERO, Circuit, CircuitBuilder, _mux, table_array
from .design import Design, agreement_positions
from .errors import BudgetError, ConsistencyError, ShapeError
from .generator import NwGenerator, nw_batch
from .natural import Property

EXHAUSTIVE_BUDGET = 1 << 26
EVAL_BUDGET_INPUTS = 16
CHUNK = 1 << 16


# --- membership oracle -----------------------------------------------------------

class MembershipOracle:
    """Answers queries to a target circuit and counts them."""

    def __init__(self, target: Circuit):
        if target.inputs > EVAL_BUDGET_INPUTS:
            raise BudgetError(f"target with {target.inputs} inputs is beyond the table budget")
        self.target = target
        self.width = target.inputs
        self._truth = table_array(target)
        self.queries = 0

    def query(self, x: int) -> int:
        if not 0 <= x < len(self._truth):
            raise ShapeError(f"query point {x} outside 2^{self.width}")
        self.queries += 1
        return int(self._truth[x])

    def query_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        self.queries += int(xs.size)
        return self._truth[xs]

    def truth(self) -> np.ndarray:
        """Full target table for scoring. Not a query."""
        return self._truth


# --- hybrids -----------------------------------------------------------------------

@dataclass(frozen=True)
class Hybrid:
    i: int
    prob: object  # Fraction in exhaustive mode, float when sampled
    mode: str
    samples: Optional[int] = None
    seed: Optional[int] = None
    halfwidth: float = 0.0


def suffix_counts(R: Property, i: int) -> np.ndarray:
    """For each prefix of ``i-1`` true bits, how many suffixes ``R`` accepts."""
    N = R.N
    if not 1 <= i <= N + 1:
        raise ShapeError(f"hybrid index {i} outside 1..{N + 1}")
    grid = R.table.reshape(1 << (N - i + 1), 1 << (i - 1))
    return grid.sum(axis=0, dtype=np.int64)


def _all_seeds(m: int, start: int, stop: int) -> np.ndarray:
    ws = np.arange(start, stop, dtype=np.int64)
    return ((ws[:, None] >> np.arange(m, dtype=np.int64)) & 1).astype(np.uint8)


def _check_pair(R: Property, D: Design) -> None:
    if R.N != D.N:
        raise ShapeError(f"property reads {R.N}-bit strings, design has {D.N} rows")


def hybrid_probs(
    R: Property,
    C: Circuit,
    D: Design,
    mode: str = "exhaustive",
    samples: int = 1 << 16,
    seed: int = 0,
    alpha: float = 0.05,
    budget: int = EXHAUSTIVE_BUDGET,
) -> List[Hybrid]:
    """``Pr[p_i = 1]`` for ``i = 1..N+1``.

    Exhaustive mode walks every seed and counts accepted ``r`` exactly.
    Sampled mode draws seeds and averages the exact conditional acceptance
    over ``r``; each estimate carries a Hoeffding half-width at level
    ``alpha``.
    """
    _check_pair(R, D)
    G = NwGenerator(D, C)
    N = D.N
    counts = [suffix_counts(R, i) for i in range(1, N + 2)]
    if mode == "exhaustive":
        if (1 << D.m) * (1 << N) > budget:
            raise BudgetError(f"exhaustive hybrids need 2^{D.m + N} evaluations, budget {budget}")
        totals = [0] * (N + 1)
        for start in range(0, 1 << D.m, CHUNK):
            out = nw_batch(G, _all_seeds(D.m, start, min(start + CHUNK, 1 << D.m)))
            for i in range(1, N + 2):
                prefix = out & ((1 << (i - 1)) - 1)
                hist = np.bincount(prefix, minlength=1 << (i - 1))
                totals[i - 1] += int(hist @ counts[i - 1])
        return [
            Hybrid(i, Fraction(totals[i - 1], (1 << D.m) << (N - i + 1)), "exhaustive")
            for i in range(1, N + 2)
        ]
    if mode != "sampled":
        raise ShapeError(f"unknown hybrid mode {mode!r}")
    if samples < 1:
        raise ShapeError("sampled mode needs at least one sample")
    rng = np.random.default_rng(seed)
    sums = np.zeros(N + 1)
    done = 0
    while done < samples:
        count = min(CHUNK, samples - done)
        out = nw_batch(G, rng.integers(0, 2, (count, D.m), dtype=np.uint8))
        for i in range(1, N + 2):
            prefix = out & ((1 << (i - 1)) - 1)
            sums[i - 1] += counts[i - 1][prefix].sum() / float(1 << (N - i + 1))
        done += count
    half = hoeffding_halfwidth(samples, alpha)
    return [Hybrid(i, float(sums[i - 1] / samples), "sampled", samples, seed, half) for i in range(1, N + 2)]


def hoeffding_halfwidth(samples: int, alpha: float = 0.05) -> float:
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * samples))


def telescoping_residual(hybrids: Sequence[Hybrid]):
    """sum_i (P_i - P_{i+1}) minus (P_1 - P_{N+1}); zero exactly in exhaustive mode."""
    probs = [h.prob for h in hybrids]
    steps = sum((probs[k] - probs[k + 1] for k in range(len(probs) - 1)), type(probs[0])(0))
    return steps - (probs[0] - probs[-1])


def largest_step(hybrids: Sequence[Hybrid]) -> Tuple[int, object]:
    """Index ``i`` (1-based, lowest on ties) maximising ``P_i - P_{i+1}``."""
    probs = [h.prob for h in hybrids]
    gaps = [probs[k] - probs[k + 1] for k in range(len(probs) - 1)]
    k = max(range(len(gaps)), key=lambda t: (gaps[t], -t))
    return k + 1, gaps[k]


# --- predictor ---------------------------------------------------------------------

@dataclass(frozen=True)
class _Link:
    """How row ``j`` looks from inside row ``t`` of the design."""

    shared: Tuple[int, ...]  # offsets u where rows t and j pick the same column
    private: Tuple[Tuple[int, int], ...]  # (u, column) for the other offsets
    spread: Tuple[int, ...]  # a -> bits of a placed at the shared offsets


@functools.lru_cache(maxsize=64)
def _links(D: Design, t: int) -> Tuple[_Link, ...]:
    links = []
    for j in range(t):
        shared = tuple(agreement_positions(D, t, j))
        private = tuple((u, D.rows[j][u]) for u in range(D.width) if u not in shared)
        spread = tuple(
            sum(((a >> k) & 1) << u for k, u in enumerate(shared)) for a in range(1 << len(shared))
        )
        links.append(_Link(shared, private, spread))
    return tuple(links)


@functools.lru_cache(maxsize=64)
def _key_arrays(D: Design, t: int) -> Tuple[np.ndarray, ...]:
    """For each ``j < t``, the table key of every input point ``x``."""
    if D.width > EVAL_BUDGET_INPUTS:
        raise BudgetError("full predictor tables need n^d <= 16")
    xs = np.arange(1 << D.width, dtype=np.int64)
    keys = []
    for link in _links(D, t):
        key = np.zeros_like(xs)
        for k, u in enumerate(link.shared):
            key |= ((xs >> u) & 1) << k
        key.setflags(write=False)
        keys.append(key)
    return tuple(keys)


@dataclass(frozen=True, eq=False)
class Predictor:
    """Next-bit predictor for hybrid ``i``.

    ``context`` holds the seed bits outside row ``i-1`` (zeros inside it),
    ``r`` the random string, ``tables[j]`` the base-circuit answers for row
    ``j`` keyed by the input bits on the rows' shared offsets.
    """

    design: Design
    prop: Property
    i: int
    context: np.ndarray
    r: int
    tables: Tuple[np.ndarray, ...]

    @property
    def entries(self) -> int:
        return sum(len(t) for t in self.tables)

    def __call__(self, x: int) -> int:
        return predictor_output(self, x)

    def predict(self, xs: np.ndarray) -> np.ndarray:
        return predictor_table(self)[np.asarray(xs, dtype=np.int64)]


def _point_int(x) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    return sum((int(b) & 1) << u for u, b in enumerate(x))


def predictor_output(P: Predictor, x) -> int:
    """Prediction on ``x``, an integer point or a bit sequence of length n^d."""
    if not isinstance(x, (int, np.integer)) and len(x) != P.design.width:
        raise ShapeError(f"predictor input needs {P.design.width} bits")
    x = _point_int(x)
    t = P.i - 1
    links = _links(P.design, t)
    if len(P.tables) != t:
        raise ConsistencyError("predictor table does not cover every earlier row")
    prefix = 0
    for j, link in enumerate(links):
        key = sum(((x >> u) & 1) << k for k, u in enumerate(link.shared))
        if key >= len(P.tables[j]):
            raise ConsistencyError(f"missing table entry for row {j}")
        prefix |= int(P.tables[j][key]) << j
    word = prefix | (P.r & ~((1 << t) - 1) & ((1 << P.design.N) - 1))
    return ((P.r >> t) & 1) ^ int(P.prop.table[word])


def predictor_table(P: Predictor) -> np.ndarray:
    """Predictions on every point at once."""
    t = P.i - 1
    keys = _key_arrays(P.design, t)
    prefix = np.zeros(1 << P.design.width, dtype=np.int64)
    for j, key in enumerate(keys):
        prefix |= P.tables[j][key].astype(np.int64) << j
    word = prefix | (P.r & ~((1 << t) - 1) & ((1 << P.design.N) - 1))
    return (P.prop.table[word].astype(np.uint8) ^ ((P.r >> t) & 1)).astype(np.uint8)


def build_predictor(R: Property, oracle: MembershipOracle, D: Design, i: int, w, r: int) -> Predictor:
    """Query the oracle for every earlier row's table and freeze the predictor.

    ``w`` is a full ``m``-bit seed; its bits inside row ``i-1`` are ignored.
    """
    _check_pair(R, D)
    if not 1 <= i <= D.N:
        raise ShapeError(f"predictor index {i} outside 1..{D.N}")
    if oracle.width != D.width:
        raise ShapeError(f"oracle has {oracle.width} inputs, design rows have {D.width}")
    t = i - 1
    context = np.array(w, dtype=np.uint8)
    if context.shape != (D.m,):
        raise ShapeError(f"seed must have {D.m} bits")
    context[list(D.rows[t])] = 0
    context.setflags(write=False)
    tables = []
    for link in _links(D, t):
        base = sum(int(context[col]) << u for u, col in link.private)
        tables.append(np.array([oracle.query(base | s) for s in link.spread], dtype=np.uint8))
    return Predictor(D, R, i, context, int(r), tuple(tables))


def compile_to_circuit(P: Predictor) -> Circuit:
    """Flatten a predictor into an explicit circuit over the n^d inputs."""
    if P.design.N > 8:
        raise BudgetError("compiling the property table needs N <= 8")
    b = CircuitBuilder(P.design.width)
    t = P.i - 1
    wires: List[int] = []
    for j, link in enumerate(_links(P.design, t)):
        wires.append(_mux_table(b, list(link.shared), [int(v) for v in P.tables[j]]))
    for j in range(t, P.design.N):
        wires.append(ONE if (P.r >> j) & 1 else ZERO)
    p = _mux_table(b, wires, [int(v) for v in P.prop.table])
    if (P.r >> t) & 1:
        p = ONE if p == ZERO else ZERO if p == ONE else b.NOT(p)
    return b.build(p)


def _mux_table(b: CircuitBuilder, select: List[int], leaves: List[int]) -> int:
    """Circuit for ``leaves[sum select_k << k]`` with constants folded."""
    level = [ONE if v else ZERO for v in leaves]
    for sel in select:
        if sel in (ZERO, ONE):
            level = level[int(sel == ONE)::2]
            continue
        level = [_mux(b, sel, level[k], level[k + 1]) for k in range(0, len(level), 2)]
    (root,) = level
    return root


# --- exact predictor accounting -------------------------------------------------------

def exact_predictor_agreement(R: Property, C: Circuit, D: Design, budget: int = EXHAUSTIVE_BUDGET) -> Dict:
    """Exact correctness of the predictor, averaged over (w', r, x) per hybrid index.

    Every context, every random string and every point is enumerated; the
    membership-query tables are built in bulk from the target's truth table.
    Returns ``{"per_index": [Fraction]*N, "overall": Fraction}``.
    """
    _check_pair(R, D)
    N, width = D.N, D.width
    outside = D.m - width
    if (1 << outside) * (1 << width) * N > budget:
        raise BudgetError("exact predictor accounting is beyond the budget")
    truth = table_array(C).astype(np.int64)
    per_index = []
    for t in range(N):
        free_cols = [c for c in range(D.m) if c not in set(D.rows[t])]
        ctx = np.zeros((1 << outside, D.m), dtype=np.uint8)
        ctx[:, free_cols] = _all_seeds(outside, 0, 1 << outside)
        prefix = np.zeros((1 << outside, 1 << width), dtype=np.int64)
        for j, (link, key) in enumerate(zip(_links(D, t), _key_arrays(D, t))):
            base = np.zeros(1 << outside, dtype=np.int64)
            for u, col in link.private:
                base |= ctx[:, col].astype(np.int64) << u
            answers = truth[base[:, None] | np.array(link.spread, dtype=np.int64)[None, :]]
            prefix |= answers[:, key] << j
        matches = 0
        for suffix in range(0, 1 << N, 1 << t):
            bit = (suffix >> t) & 1
            out = R.table[prefix | suffix].astype(np.int64) ^ bit
            matches += int((out == truth[None, :]).sum())
        total = (1 << outside) * (1 << width) * (1 << (N - t))
        per_index.append(Fraction(matches, total))
    return {"per_index": per_index, "overall": sum(per_index, Fraction(0)) / N}


# --- learning ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    i: int
    agreement: Fraction
    queries: int
    wall_ns: Optional[int] = None

    def to_json(self) -> Dict:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "i": self.i,
            "agreement": float(self.agreement),
            "queries": self.queries,
            "wall_ns": self.wall_ns,
        }


@dataclass(frozen=True, eq=False)
class LearnerReport:
    hypothesis: Predictor
    agreement: Fraction
    meta: Dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class LearnResult:
    best: Optional[LearnerReport]
    trials: List[TrialRecord]


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Per-trial generator, derived from the master seed and the trial counter."""
    return np.random.default_rng([seed, trial])


def draw_predictor(R: Property, oracle: MembershipOracle, D: Design, rng: np.random.Generator) -> Predictor:
    """One learner draw: index ``i``, then the seed, then ``r``."""
    i = 1 + int(rng.integers(D.N))
    w = rng.integers(0, 2, D.m, dtype=np.uint8)
    r = int(rng.integers(0, 1 << D.N))
    return build_predictor(R, oracle, D, i, w, r)


def learn(
    R: Property,
    oracle: MembershipOracle,
    D: Design,
    trials: int,
    seed: int,
    timing: bool = False,
) -> LearnResult:
    """Run independent predictor draws and score each exactly against the target."""
    _check_pair(R, D)
    truth = oracle.truth()
    cap = D.N << D.n
    best: Optional[LearnerReport] = None
    records = []
    for trial in range(trials):
        start = time.perf_counter_ns() if timing else 0
        before = oracle.queries
        P = draw_predictor(R, oracle, D, trial_rng(seed, trial))
        used = oracle.queries - before
        if used > cap:
            raise ConsistencyError(f"trial {trial} used {used} queries, cap {cap}")
        agree = Fraction(int((predictor_table(P) == truth).sum()), len(truth))
        wall = time.perf_counter_ns() - start if timing else None
        records.append(TrialRecord(trial, seed, P.i, agree, used, wall))
        if best is None or agree > best.agreement:
            best = LearnerReport(
                P, agree, {"trial": trial, "seed": seed, "i": P.i, "n": D.n, "d": D.d, "N": D.N, "m": D.m}
            )
    return LearnResult(best, records)


# --- confidence boosting -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BoostResult:
    index: int
    hypothesis: object
    scores: Tuple[int, ...]
    m_q: int
    hoeffding: float
    confidence_bound: Optional[float]
    estimate: float


def hoeffding_bound(gamma: float, m_q: int) -> float:
    """Chance that one empirical accuracy is off by more than ``gamma``."""
    return 2.0 * math.exp(-2.0 * gamma * gamma * m_q)


def boost_confidence_bound(k: int, m_q: int, gamma: float, delta: float) -> float:
    return 1.0 - k * hoeffding_bound(gamma, m_q) - math.exp(-k * delta)


def boost(
    run: Callable[[int], object],
    oracle,
    k: int,
    m_q: int,
    gamma: float,
    seed: int,
    delta: Optional[float] = None,
) -> BoostResult:
    """Run the base learner ``k`` times and keep the best on a shared test set.

    ``run(t)`` returns a hypothesis with a ``predict(points)`` method. The
    test set is ``m_q`` uniform points drawn once and labelled with membership
    queries. Ties go to the lowest run index.
    """
    if k < 1 or m_q < 1:
        raise ShapeError("boost needs k >= 1 and m_q >= 1")
    rng = np.random.default_rng([seed, 0xB0057])
    points = rng.integers(0, 1 << oracle.width, m_q)
    labels = oracle.query_batch(points)
    hyps, scores = [], []
    for t in range(k):
        h = run(t)
        hyps.append(h)
        scores.append(int((np.asarray(h.predict(points)) == labels).sum()))
    index = max(range(k), key=lambda t: (scores[t], -t))
    return BoostResult(
        index,
        hyps[index],
        tuple(scores),
        m_q,
        hoeffding_bound(gamma, m_q),
        None if delta is None else boost_confidence_bound(k, m_q, gamma, delta),
        scores[index] / m_q,
    )


class TableHypothesis:
    def __init__(self, table: np.ndarray):
        self.table = np.asarray(table, dtype=np.uint8)

    def predict(self, xs):
        return self.table[np.asarray(xs, dtype=np.int64)]


class TableOracle:
    """Membership oracle over an explicit truth table."""

    def __init__(self, table: np.ndarray):
        self.table = np.asarray(table, dtype=np.uint8)
        self.width = int(len(self.table)).bit_length() - 1
        self.queries = 0

    def query_batch(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        self.queries += int(xs.size)
        return self.table[xs]


class SimulatedLearner:
    """Base learner stand-in with a known success rate.

    With probability ``delta`` a run returns the target with exactly
    ``floor(eps * 2**n)`` points flipped; otherwise exactly half the points
    are flipped.
    """

    def __init__(self, target: np.ndarray, eps: float, delta: float, seed: int):
        self.target = np.asarray(target, dtype=np.uint8)
        self.eps = eps
        self.delta = delta
        self.seed = seed

    def __call__(self, t: int) -> TableHypothesis:
        rng = np.random.default_rng([self.seed, t])
        size = len(self.target)
        good = rng.random() < self.delta
        flips = int(math.floor(self.eps * size)) if good else size // 2
        h = self.target.copy()
        h[rng.choice(size, flips, replace=False)] ^= 1
        return TableHypothesis(h)


def boosting_study(
    meta_trials: int,
    k: int,
    m_q: int,
    gamma: float,
    delta: float,
    eps: float,
    n_sim: int = 12,
    seed: int = 0,
) -> Dict:
    """Empirical confidence of boosted simulated learners against the bound.

    A meta-trial succeeds when the returned hypothesis has true error at most
    ``eps + gamma``.
    """
    successes = 0
    for trial in range(meta_trials):
        rng = np.random.default_rng([seed, trial, 1])
        target = rng.integers(0, 2, 1 << n_sim, dtype=np.uint8)
        learner = SimulatedLearner(target, eps, delta, int(rng.integers(1 << 62)))
        res = boost(learner, TableOracle(target), k, m_q, gamma, int(rng.integers(1 << 62)), delta)
        error = float((res.hypothesis.table != target).mean())
        successes += error <= eps + gamma
    bound = boost_confidence_bound(k, m_q, gamma, delta)
    clipped = min(max(bound, 0.0), 1.0)
    sigma = math.sqrt(clipped * (1.0 - clipped) / meta_trials) if meta_trials else 0.0
    empirical = successes / meta_trials if meta_trials else float("nan")
    return {
        "meta_trials": meta_trials,
        "k": k,
        "m_q": m_q,
        "gamma": gamma,
        "delta": delta,
        "eps": eps,
        "n_sim": n_sim,
        "seed": seed,
        "successes": successes,
        "empirical_confidence": empirical,
        "bound": bound,
        "hoeffding_per_run": hoeffding_bound(gamma, m_q),
        "sigma": sigma,
        "pass": bool(meta_trials and empirical >= bound - 3 * sigma),
    }
