"""Acceptance suite: one PASS/FAIL line per criterion, then the assertion.

Run with ``pytest tests/test_acceptance.py -v`` (lines are printed even under
capture) or directly with ``python3 tests/test_acceptance.py``.
"""

import itertools
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from natproof.circuit import (
    TruthTable, enumerate_functions, minimal_circuit, random_circuit, truth_table,
    xor_combine,
)
from natproof.cli import main as cli
from natproof.design import build_design, verify_design
from natproof.encoding import decode_circuit, encode_tt
from natproof.harness import ExperimentConfig, run_dichotomy, run_learning_experiment, template_automator
from natproof.learner import boosting_study, exact_predictor_agreement, hybrid_probs, telescoping_residual
from natproof.natural import Property, mcsp_property
from natproof.prooflib import fixture_corpus
from natproof.proofs import check_proof, similar
from natproof.solver import SAT, solve

sys.path.insert(0, str(Path(__file__).parent))
from mutations import sample_mutants  # noqa: E402
from oracles import unfold  # noqa: E402
from test_proofs import compress, random_formula_circuit, tree_copy  # noqa: E402

D22 = build_design(2, 2)


@pytest.fixture
def verdict(capsys):
    def emit(num, title, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{num}] {title}: {detail}")
        return ok

    return emit


def random_pairs(count=24, seed=0):
    rng = np.random.default_rng(seed)
    pairs = []
    for k in range(count):
        if k % 2:
            R = mcsp_property(2, int(rng.integers(0, 4)))
        else:
            R = Property.random(2, int(rng.integers(2**31)))
        C = random_circuit(D22.width, int(rng.integers(1, 7)), int(rng.integers(2**31)))
        pairs.append((R, C))
    return pairs


def test_c1_design_exactness(verdict):
    start = time.perf_counter()
    reports = [verify_design(build_design(n, d)) for n, d in itertools.product((2, 3, 4), (2, 3))]
    elapsed = time.perf_counter() - start
    ok = all(r["pass"] and r["row_sizes"] == [r["n"] ** r["d"]] and r["max_intersection"] <= r["n"]
             and r["m"] == r["p"] * r["n"] ** r["d"] for r in reports) and elapsed < 5
    worst = ", ".join(f"n={r['n']},d={r['d']}:{r['max_intersection']}" for r in reports)
    assert verdict(1, "design exactness", ok, f"max intersections {worst}; {elapsed:.2f} s (< 5 s)")


def test_c2_hybrid_telescoping_exact(verdict):
    worst_time, residuals = 0.0, []
    for R, C in random_pairs():
        start = time.perf_counter()
        hyb = hybrid_probs(R, C, D22, mode="exhaustive")
        worst_time = max(worst_time, time.perf_counter() - start)
        steps = sum((hyb[k].prob - hyb[k + 1].prob for k in range(D22.N)), Fraction(0))
        residuals.append(steps - (hyb[0].prob - hyb[-1].prob))
        assert telescoping_residual(hyb) == residuals[-1]
    ok = all(isinstance(r, Fraction) and r == 0 for r in residuals)
    assert verdict(2, "hybrid telescoping (exact)", ok,
                   f"{len(residuals)} pairs, all residuals exactly 0: {ok}; slowest pair {worst_time:.2f} s")


def test_c3_predictor_advantage_exact(verdict):
    misses = []
    for k, (R, C) in enumerate(random_pairs()):
        hyb = hybrid_probs(R, C, D22, mode="exhaustive")
        acc = exact_predictor_agreement(R, C, D22)["overall"]
        expected = Fraction(1, 2) + (hyb[0].prob - hyb[-1].prob) / D22.N
        if acc != expected:
            misses.append((k, acc, expected))
    assert verdict(3, "predictor advantage = gap/N (exact rationals)", not misses,
                   f"24 pairs, mismatches: {misses or 'none'}")


def test_c4_end_to_end_learning(verdict):
    start = time.perf_counter()
    s = run_learning_experiment(ExperimentConfig(n=3, d=2, trials=100_000, seed=2024))
    elapsed = time.perf_counter() - start
    N = s["design"]["N"]
    margin = s["confidence_target"] - 3 * s["sigma"]
    ok = (s["target"]["qualified"] and s["target"]["gap_lower"] >= 1 / N and s["trials"] >= 100_000
          and s["empirical_confidence"] >= margin and elapsed <= 600)
    assert verdict(
        4, "end-to-end learning at n=3", ok,
        f"gap lower bound {s['target']['gap_lower']:.4f} (>= 1/N = {1 / N}), "
        f"{s['successes']}/{s['trials']} trials at agreement >= 1/2+1/N^3, "
        f"confidence {s['empirical_confidence']:.5f} vs 1/N^4 - 3 sigma = {margin:.6f}; {elapsed:.1f} s")


def test_c5_boosting(verdict):
    stated = boosting_study(1000, 20, 200, 0.05, 0.3, 0.2, seed=0)
    strict = boosting_study(1000, 20, 2000, 0.05, 0.3, 0.2, seed=1)
    ok = stated["pass"] and strict["pass"]
    assert verdict(
        5, "boosting confidence", ok,
        f"m_q=200: empirical {stated['empirical_confidence']:.3f} vs bound {stated['bound']:.3f} "
        f"(negative, vacuous); m_q=2000: empirical {strict['empirical_confidence']:.3f} vs bound "
        f"{strict['bound']:.4f} - 3 sigma ({strict['sigma']:.4f})")


def test_c6_encoder_ground_truth(verdict):
    start = time.perf_counter()
    agree = decoded = sat = 0
    for f, s in itertools.product(range(16), range(5)):
        tt = TruthTable(2, f)
        F = encode_tt(tt, s)
        res = solve(F)
        agree += (res.status == SAT) == (tt in enumerate_functions(2, s))
        if res.status == SAT:
            sat += 1
            c = decode_circuit(F, res)
            decoded += truth_table(c) == tt and c.size <= s
    elapsed = time.perf_counter() - start
    ok = agree == 80 and decoded == sat and elapsed < 30
    assert verdict(6, "encoder ground truth", ok,
                   f"{agree}/80 agree, {decoded}/{sat} witnesses decode to f; {elapsed:.2f} s (< 30 s)")


def test_c7_xor_trick(verdict):
    def check(n, g, h):
        cg = minimal_circuit(TruthTable(n, g), 8)
        ch = minimal_circuit(TruthTable(n, h ^ g), 8)
        c = xor_combine(cg, ch)
        return truth_table(c).bits == h and c.size <= cg.size + ch.size + 4

    small = sum(check(2, g, h) for g, h in itertools.product(range(16), repeat=2))
    rng = random.Random(7)
    big = sum(check(3, rng.randrange(256), rng.randrange(256)) for _ in range(1000))
    assert verdict(7, "xor trick semantics and size", small == 256 and big == 1000,
                   f"n=2: {small}/256, n=3 sampled: {big}/1000")


def test_c8_checker_soundness(verdict):
    corpus = fixture_corpus(large=True)
    rejected = accepted_fixtures = total = 0
    escaped = []
    for k, (name, proof) in enumerate(corpus):
        accepted_fixtures += check_proof(proof).accepted
        if len(proof) <= 200:
            found = sample_mutants(proof, 10_000, seed=k)
        elif len(proof) <= 1000:
            found = sample_mutants(proof, 600, seed=k)
        else:
            found = sample_mutants(proof, 100, seed=k, lines=40)
        for what, m in found:
            total += 1
            if check_proof(m).accepted:
                escaped.append(f"{name}: {what}")
            else:
                rejected += 1
    rng = random.Random(2024)
    sim_ok = 0
    for k in range(1000):
        n = rng.randint(1, 3)
        c1 = random_formula_circuit(rng, n, rng.randint(0, 12))
        c2 = compress(tree_copy(c1)) if k % 3 == 0 else random_formula_circuit(rng, n, rng.randint(0, 12))
        if k % 3 == 1:
            c2 = c1
        sim_ok += similar(c1, c2) == (unfold(c1, c1.output) == unfold(c2, c2.output))
    ok = len(corpus) >= 20 and accepted_fixtures == len(corpus) and not escaped and sim_ok == 1000
    assert verdict(8, "checker soundness", ok,
                   f"{accepted_fixtures}/{len(corpus)} fixtures accepted, {rejected}/{total} mutants rejected"
                   f"{' escaped: ' + '; '.join(escaped[:5]) if escaped else ''}, similar = unfolding on "
                   f"{sim_ok}/1000 pairs")


def test_c9_dichotomy_coverage(verdict):
    start = time.perf_counter()
    rep = run_dichotomy(2, template_automator())
    elapsed = time.perf_counter() - start
    literal = all(g in rep.G1 or (g ^ rep.h) in rep.G0 for g in range(16))
    big = max(len(rep.G0), len(rep.G1))
    ok = rep.coverage and literal and big >= math.ceil(16 / 3) and elapsed < 60
    assert verdict(9, "dichotomy coverage at n=2", ok,
                   f"h={rep.h:#06b}, |G0|={len(rep.G0)}, |G1|={len(rep.G1)}, coverage {rep.coverage}, "
                   f"max {big} >= 6; {elapsed:.2f} s")


CLI_RUNS = [
    ["design", "--n", "4", "--d", "3"],
    ["learn", "--n", "2", "--trials", "2000"],
    ["learn", "--n", "3", "--trials", "100000"],
    ["boost", "--meta-trials", "200"],
    ["encode", "--corpus", "--s", "1", "--t", "2"],
    ["encode", "--n", "3", "--f", "0x80", "--s", "2"],
    ["check-proof", "--emit-fixtures"],
    ["dichotomy", "--n", "2"],
]


def _snapshot(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_c10_determinism(verdict, tmp_path, capsys):
    differing = []
    commands = set()
    for k, argv in enumerate(CLI_RUNS + [["solve", None], ["check-proof", None], ["report", None]]):
        if argv[-1] is None:
            if argv[0] == "solve":
                argv = ["solve", str(next((tmp_path / "a5").glob("*.cnf")))]
            elif argv[0] == "check-proof":
                argv = ["check-proof", *map(str, sorted((tmp_path / "a6" / "proofs").glob("*.json")))]
            else:
                argv = ["report", str(tmp_path / "a1"), str(tmp_path / "a2"), str(tmp_path / "a7")]
        outs, codes = [], []
        for tag in "ab":
            out = tmp_path / f"{tag}{k}"
            codes.append(cli(["--seed", "11", "--out", str(out), *argv]))
            outs.append((capsys.readouterr().out.replace(str(out), "<out>"), _snapshot(out) if out.exists() else {}))
        commands.add(argv[0])
        if outs[0] != outs[1] or codes[0] != codes[1] or codes[0] != 0:
            differing.append(" ".join(argv[:3]))
    ok = not differing and len(commands) == 8
    assert verdict(10, "byte-identical CLI reruns", ok,
                   f"{len(CLI_RUNS) + 3} runs over {len(commands)} subcommands, differing: {differing or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
