"""Experiment drivers: learning runs, the dichotomy procedure, DIMACS corpora
and report aggregation. Every output is a pure function of (config, seed).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .circuit import (
    COMPLETENESS_BOUND,
    Circuit,
    TruthTable,
    minimal_size_table,
    random_circuit,
    to_text,
)
from .design import build_design
from .encoding import emit_dimacs, encode_tt, encode_tt_avg
from .errors import NatProofError, ShapeError
from .generator import NwGenerator, nw_batch
from .learner import (
    MembershipOracle,
    boost,
    draw_predictor,
    hoeffding_halfwidth,
    hybrid_probs,
    largest_step,
    learn,
    predictor_table,
    telescoping_residual,
    trial_rng,
)
from .natural import mcsp_property
from .solver import SAT, UNSAT, solve

MAX_LEARN_N = 4
MAX_MCSP_N = 3


def dumps(obj) -> str:
    """Canonical JSON used for every file the harness writes."""
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def derive_seed(seed: int, *tags: int) -> int:
    return int(np.random.default_rng([seed, *tags]).integers(1 << 62))


# --- configuration -----------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    n: int = 2
    d: int = 2
    k: int = 3                      # gates in the planted target
    s_star: Optional[int] = None    # MCSP threshold; None tunes it per target
    trials: int = 100
    seed: int = 0
    mode: str = "auto"              # exhaustive | sampled | auto
    samples: int = 1 << 16
    tune_samples: int = 1 << 14
    tune_attempts: int = 64
    alpha: float = 0.05
    boost_k: int = 20
    boost_m_q: int = 200
    gamma: float = 0.05
    boost_delta: float = 0.3
    boost_eps: float = 0.2
    meta_trials: int = 1000
    n_sim: int = 12
    timing: bool = False
    node_cap: int = 200_000
    s_small: Optional[int] = None
    s_large: Optional[int] = None
    h: Optional[int] = None
    corpus_s: Sequence[int] = (1,)
    corpus_t: Sequence[int] = ()
    corpus_n3_samples: int = 0

    @classmethod
    def from_dict(cls, raw: Dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ShapeError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**raw)

    def validate(self, mcsp: bool = True) -> None:
        if self.d < 2:
            raise ShapeError("d must be at least 2")
        if not 1 <= self.n <= MAX_LEARN_N:
            raise ShapeError(f"learning experiments need 1 <= n <= {MAX_LEARN_N}")
        if mcsp and self.n > MAX_MCSP_N:
            raise ShapeError(f"MCSP-backed runs need n <= {MAX_MCSP_N}")
        if self.trials < 0 or self.k < 1:
            raise ShapeError("trials must be >= 0 and k >= 1")
        if self.mode not in ("auto", "exhaustive", "sampled"):
            raise ShapeError(f"unknown mode {self.mode!r}")


# --- learning ------------------------------------------------------------------------------

def distinguishing_gaps(D, C: Circuit, sizes: np.ndarray, samples: int, seed: int) -> np.ndarray:
    """Estimated ``Pr[R_s(uniform)] - Pr[R_s(NW_C(w))]`` for every threshold ``s``.

    The uniform side is exact; the generator side is a sample mean.
    """
    G = NwGenerator(D, C)
    rng = np.random.default_rng(seed)
    outs = nw_batch(G, rng.integers(0, 2, (samples, D.m), dtype=np.uint8))
    top = int(sizes.max())
    hist_all = np.bincount(sizes, minlength=top + 2)
    hist_nw = np.bincount(sizes[outs], minlength=top + 2)
    above_all = hist_all[::-1].cumsum()[::-1]        # count with size >= s
    above_nw = hist_nw[::-1].cumsum()[::-1]
    return np.array([
        above_all[s + 1] / len(sizes) - above_nw[s + 1] / samples for s in range(top + 1)
    ])


def tune_target(cfg: ExperimentConfig, D, sizes: np.ndarray) -> Dict:
    """Plant a target and pick ``s*`` so the gap's lower confidence bound is >= 1/N.

    Targets are redrawn from derived seeds up to ``tune_attempts`` times; the
    last attempt is kept (flagged) if none qualifies.
    """
    half = hoeffding_halfwidth(cfg.tune_samples, cfg.alpha)
    choice = None
    for attempt in range(max(1, cfg.tune_attempts)):
        C = random_circuit(D.width, cfg.k, derive_seed(cfg.seed, 0x7A26, attempt))
        gaps = distinguishing_gaps(D, C, sizes, cfg.tune_samples, derive_seed(cfg.seed, 0x6A9, attempt))
        candidates = range(len(gaps)) if cfg.s_star is None else [cfg.s_star]
        s = max(candidates, key=lambda t: (gaps[t], -t))
        choice = {
            "target": C,
            "s_star": int(s),
            "gap_estimate": float(gaps[s]),
            "gap_lower": float(gaps[s] - half),
            "attempt": attempt,
            "qualified": bool(gaps[s] - half >= 1.0 / D.N),
        }
        if choice["qualified"]:
            break
    return choice


def _hybrid_json(hybrids) -> List[Dict]:
    return [
        {"i": h.i, "prob": h.prob, "mode": h.mode, "halfwidth": h.halfwidth}
        for h in hybrids
    ]


def run_learning_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None) -> Dict:
    """Design, property, planted target, hybrids, learner trials and one boosting pass."""
    cfg.validate(mcsp=True)
    D = build_design(cfg.n, cfg.d)
    N = D.N
    sizes = minimal_size_table(cfg.n, COMPLETENESS_BOUND[cfg.n])
    if cfg.s_star is None or cfg.n >= 3:
        tuned = tune_target(cfg, D, sizes)
    else:
        C = random_circuit(D.width, cfg.k, derive_seed(cfg.seed, 0x7A26, 0))
        tuned = {"target": C, "s_star": cfg.s_star, "gap_estimate": None, "gap_lower": None,
                 "attempt": 0, "qualified": None}
    C = tuned["target"]
    R = mcsp_property(cfg.n, tuned["s_star"])
    mode = cfg.mode
    if mode == "auto":
        mode = "exhaustive" if (1 << D.m) * (1 << N) <= (1 << 26) else "sampled"
    hybrids = hybrid_probs(R, C, D, mode=mode, samples=cfg.samples, seed=derive_seed(cfg.seed, 0x4B),
                           alpha=cfg.alpha)
    residual = telescoping_residual(hybrids)
    step_i, step = largest_step(hybrids)
    oracle = MembershipOracle(C)
    result = learn(R, oracle, D, cfg.trials, cfg.seed, timing=cfg.timing)
    bar = Fraction(1, 2) + Fraction(1, N ** 3)
    successes = sum(1 for t in result.trials if t.agreement >= bar)
    q = 1.0 / N ** 4
    T = len(result.trials)
    sigma = math.sqrt(q * (1 - q) / T) if T else 0.0
    confidence = successes / T if T else None

    boost_seed = derive_seed(cfg.seed, 0xB0)
    truth = oracle.truth()
    boosted = None
    if cfg.boost_k > 0 and T > 0:
        res = boost(
            lambda t: draw_predictor(R, oracle, D, trial_rng(boost_seed, t)),
            oracle, cfg.boost_k, cfg.boost_m_q, cfg.gamma, boost_seed,
        )
        boosted = {
            "index": res.index,
            "empirical_accuracy": res.estimate,
            "true_agreement": Fraction(int((predictor_table(res.hypothesis) == truth).sum()), len(truth)),
            "scores": list(res.scores),
            "hoeffding_per_run": res.hoeffding,
        }
    queries = max((t.queries for t in result.trials), default=0)
    gap = hybrids[0].prob - hybrids[-1].prob
    summary = {
        "config": asdict(cfg),
        "design": {"n": D.n, "d": D.d, "p": D.p, "m": D.m, "N": N, "width": D.width},
        "property": {"kind": "mcsp", "s_star": tuned["s_star"], "largeness": Fraction(int(R.table.sum()), len(R.table))},
        "target": {"text": to_text(C), "gates": C.size, "attempt": tuned["attempt"],
                   "gap_estimate": tuned["gap_estimate"], "gap_lower": tuned["gap_lower"],
                   "qualified": tuned["qualified"]},
        "hybrids": _hybrid_json(hybrids),
        "hybrid_mode": mode,
        "gap": gap,
        "telescoping_residual": residual,
        "largest_step": {"i": step_i, "value": step},
        "trials": T,
        "agreement_bar": bar,
        "successes": successes,
        "empirical_confidence": confidence,
        "confidence_target": q,
        "sigma": sigma,
        "statistical_pass": bool(T and confidence >= q - 3 * sigma),
        "max_queries": queries,
        "query_cap": N << D.n,
        "best": None if result.best is None else {
            "trial": result.best.meta["trial"], "i": result.best.meta["i"], "agreement": result.best.agreement},
        "boost": boosted,
    }
    invariants = queries <= (N << D.n)
    if mode == "exhaustive":
        invariants = invariants and residual == 0
    summary["invariants_ok"] = bool(invariants)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "trials.jsonl", "w") as fh:
            for rec in result.trials:
                fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
        (out_dir / "summary.json").write_text(dumps(summary))
    return summary


# --- dichotomy ------------------------------------------------------------------------------

@dataclass(frozen=True)
class AutomatorResult:
    proved: bool
    status: str
    decisions: int = 0


Automator = Callable[[TruthTable, int], AutomatorResult]


def template_automator(node_cap: Optional[int] = 200_000) -> Automator:
    """Proves ``tt(f, s)`` by refuting the template encoding with the DPLL solver."""

    def run(f: TruthTable, s: int) -> AutomatorResult:
        res = solve(encode_tt(f, s), node_cap)
        return AutomatorResult(res.status == UNSAT, res.status, res.decisions)

    return run


def failing_automator(f: TruthTable, s: int) -> AutomatorResult:
    return AutomatorResult(False, "GAVE_UP")


def _indecomposable(h: int, sizes: np.ndarray, s_large: int, s_small: int) -> bool:
    return not any(sizes[g] <= s_large and sizes[g ^ h] <= s_small for g in range(len(sizes)))


def choose_hard_function(n: int, s_large: Optional[int] = None, s_small: Optional[int] = None) -> Dict:
    """Pick ``h`` among maximum-size functions, and default thresholds if unset.

    Preference: the first maximiser that is not an XOR of an ``s_large``-easy
    and an ``s_small``-easy function; otherwise the first maximiser, flagged.
    """
    sizes = minimal_size_table(n, COMPLETENESS_BOUND[n])
    top = int(sizes.max())
    maximisers = [int(f) for f in np.flatnonzero(sizes == top)]
    if s_large is None or s_small is None:
        best = 0
        for s in range(top):
            if any(_indecomposable(h, sizes, s, s) for h in maximisers):
                best = s
        s_large = best if s_large is None else s_large
        s_small = best if s_small is None else s_small
    good = [h for h in maximisers if _indecomposable(h, sizes, s_large, s_small)]
    h = good[0] if good else maximisers[0]
    return {"h": h, "s_large": s_large, "s_small": s_small, "indecomposable": bool(good),
            "max_size": top, "maximisers": maximisers}


@dataclass
class DichotomyReport:
    n: int
    h: int
    s_small: int
    s_large: int
    outcomes: List[str]
    details: List[Dict]
    G0: List[int]
    G1: List[int]
    coverage: bool
    largeness_bound: int
    largeness_ok: Optional[bool]
    hypothesis_violation: bool

    def to_json(self) -> Dict:
        out = asdict(self)
        out["G0_size"] = len(self.G0)
        out["G1_size"] = len(self.G1)
        return out


def run_dichotomy(
    n: int,
    automator: Automator,
    h: Optional[int] = None,
    s_small: Optional[int] = None,
    s_large: Optional[int] = None,
) -> DichotomyReport:
    """Classify every ``g``: G0 if ``tt(h^g, s_small)`` is proved, G1 if ``g`` is certified hard."""
    if n > MAX_MCSP_N:
        raise ShapeError(f"the dichotomy enumerates all functions, needs n <= {MAX_MCSP_N}")
    pick = choose_hard_function(n, s_large, s_small)
    s_small, s_large = pick["s_small"], pick["s_large"]
    sizes = minimal_size_table(n, COMPLETENESS_BOUND[n])
    if h is None:
        h = pick["h"]
        violation = not pick["indecomposable"]
    else:
        violation = int(sizes[h]) != pick["max_size"] or not _indecomposable(h, sizes, s_large, s_small)
    outcomes, details = [], []
    for g in range(1 << (1 << n)):
        f = TruthTable(n, g ^ h)
        try:
            res = automator(f, s_small)
            proved, status = res.proved, res.status
        except Exception as exc:  # a crashing automator is a FAIL, never silent
            proved, status = False, f"crash: {type(exc).__name__}: {exc}"
        if proved:
            outcome = "G0"
        elif sizes[g] > s_large:
            outcome = "G1"
        else:
            outcome = "FAIL"
        outcomes.append(outcome)
        details.append({"g": g, "h_xor_g": g ^ h, "automator": status, "size_g": int(sizes[g]), "outcome": outcome})
    G0 = sorted(g ^ h for g, o in enumerate(outcomes) if o == "G0")
    G1 = sorted(g for g, o in enumerate(outcomes) if o == "G1")
    g0 = set(G0)
    coverage = all(g in G1 or (g ^ h) in g0 for g in range(len(outcomes)))
    bound = -(-(1 << (1 << n)) // 3)
    largeness_ok = max(len(G0), len(G1)) >= bound if coverage else None
    return DichotomyReport(n, h, s_small, s_large, outcomes, details, G0, G1, coverage, bound,
                           largeness_ok, violation)


# --- benchmarks ---------------------------------------------------------------------------------

def _distance_to_easy(n: int, s: int) -> np.ndarray:
    """For every table, Hamming distance to the nearest function of size <= s."""
    sizes = minimal_size_table(n, COMPLETENESS_BOUND[n])
    easy = np.flatnonzero(sizes <= s)
    tables = np.arange(len(sizes))
    dist = np.full(len(sizes), 1 << n)
    for e in easy:
        x = tables ^ e
        pop = np.zeros(len(sizes), dtype=np.int64)
        for bit in range(1 << n):
            pop += (x >> bit) & 1
        dist = np.minimum(dist, pop)
    return dist


def emit_benchmarks(cfg: ExperimentConfig, out_dir: Path) -> List[Dict]:
    """Write the DIMACS corpus plus ``labels.csv``; labels come from enumeration.

    Label SAT means the formula is satisfiable, i.e. ``f`` has a (near-)match.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: List[Dict] = []
    jobs: List[Tuple[int, int]] = [(2, f) for f in range(16)]
    if cfg.corpus_n3_samples:
        rng = np.random.default_rng([cfg.seed, 0xC0])
        picks = sorted(set(int(v) for v in rng.choice(256, min(cfg.corpus_n3_samples, 256), replace=False)))
        jobs += [(3, f) for f in picks]
    for n, fbits in jobs:
        f = TruthTable(n, fbits)
        sizes = minimal_size_table(n, COMPLETENESS_BOUND[n])
        for s in cfg.corpus_s:
            dist = _distance_to_easy(n, s) if cfg.corpus_t else None
            name = f"tt_n{n}_s{s}_f{fbits:0{(1 << n) // 4 or 1}x}.cnf"
            (out_dir / name).write_text(emit_dimacs(encode_tt(f, s)))
            rows.append({"file": name, "family": "tt", "n": n, "s": s, "t": "", "f": fbits,
                         "label": SAT if sizes[fbits] <= s else UNSAT})
            for t in cfg.corpus_t:
                name = f"avg_n{n}_s{s}_t{t}_f{fbits:0{(1 << n) // 4 or 1}x}.cnf"
                (out_dir / name).write_text(emit_dimacs(encode_tt_avg(f, s, t)))
                rows.append({"file": name, "family": "tt_avg", "n": n, "s": s, "t": t, "f": fbits,
                             "label": SAT if dist[fbits] <= t - 1 else UNSAT})
    buf = io.StringIO()
    writer = csv.DictWriter(buf, ["file", "family", "n", "s", "t", "f", "label"], lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    (out_dir / "labels.csv").write_text(buf.getvalue())
    return rows


# --- reports ------------------------------------------------------------------------------------

def _collect(paths: Iterable[Path]) -> Tuple[List[Path], List[Path], List[Path]]:
    jsonl, summaries, dichos = [], [], []
    for p in paths:
        p = Path(p)
        files = sorted(p.rglob("*")) if p.is_dir() else [p]
        for f in files:
            if f.suffix == ".jsonl":
                jsonl.append(f)
            elif f.name == "summary.json":
                summaries.append(f)
            elif f.name == "dichotomy.json":
                dichos.append(f)
    return jsonl, summaries, dichos


def report(paths: Sequence[Path], out_dir: Path, figures: bool = True) -> Dict:
    """Merge trial records and summaries into ``report.csv`` / ``report.json`` (+ figures)."""
    from . import plotting

    out_dir.mkdir(parents=True, exist_ok=True)
    jsonl, summaries, dichos = _collect(paths)
    table = []
    agreements: Dict[str, List[float]] = {}
    for f in jsonl:
        records = [json.loads(line) for line in f.read_text().splitlines() if line.strip()]
        values = [r["agreement"] for r in records if "agreement" in r]
        agreements[str(f)] = values
        table.append({
            "source": str(f),
            "trials": len(records),
            "mean_agreement": float(np.mean(values)) if values else "",
            "max_agreement": max(values) if values else "",
            "max_queries": max((r.get("queries", 0) for r in records), default=""),
        })
    loaded = [json.loads(f.read_text()) for f in summaries]
    dich = [json.loads(f.read_text()) for f in dichos]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, ["source", "trials", "mean_agreement", "max_agreement", "max_queries"],
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(table)
    (out_dir / "report.csv").write_text(buf.getvalue())
    merged = {
        "trial_files": table,
        "summaries": [
            {"source": str(f), "gap": s.get("gap"), "telescoping_residual": s.get("telescoping_residual"),
             "empirical_confidence": s.get("empirical_confidence"), "trials": s.get("trials")}
            for f, s in zip(summaries, loaded)
        ],
        "dichotomy": [
            {"source": str(f), "coverage": d.get("coverage"), "G0_size": d.get("G0_size"),
             "G1_size": d.get("G1_size")}
            for f, d in zip(dichos, dich)
        ],
        "figures": [],
    }
    if figures:
        merged["figures"] = plotting.render_report(out_dir, agreements, loaded, dich)
    (out_dir / "report.json").write_text(dumps(merged))
    return merged


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))


__all__ = [
    "ExperimentConfig",
    "run_learning_experiment",
    "run_dichotomy",
    "template_automator",
    "failing_automator",
    "choose_hard_function",
    "emit_benchmarks",
    "report",
    "NatProofError",
]
