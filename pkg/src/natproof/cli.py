"""Command-line entry point: ``natproof [--seed S] [--config F] [--out D] <command> ...``.

Exit codes: 0 success, 1 invariant violation, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from .circuit import TruthTable, to_text, truth_table
from .design import build_design, verify_design
from .encoding import decode_circuit, emit_dimacs, encode_tt, encode_tt_avg, parse_dimacs
from .errors import ConsistencyError, NatProofError
from .harness import (
    ExperimentConfig,
    dumps,
    emit_benchmarks,
    failing_automator,
    report,
    run_dichotomy,
    run_learning_experiment,
    template_automator,
    write_json,
)
from .learner import boosting_study
from .proofs import check_proof, proof_from_json, proof_to_json
from .solver import SAT, solve

OK, VIOLATION, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default, help="master seed")
    parser.add_argument("--config", type=Path, default=default, help="JSON file with config overrides")
    parser.add_argument("--out", type=Path, default=default, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="natproof", description=__doc__.splitlines()[0])
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        _globals(p, suppress=True)
        return p

    p = cmd("design", "build and verify the combinatorial design")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)

    p = cmd("learn", "planted-target learning experiment")
    for flag, kind in (("--n", int), ("--d", int), ("--k", int), ("--s-star", int), ("--trials", int),
                       ("--samples", int), ("--boost-k", int), ("--boost-m-q", int)):
        p.add_argument(flag, type=kind)
    p.add_argument("--mode", choices=["auto", "exhaustive", "sampled"])
    p.add_argument("--timing", action="store_true", default=None, help="record wall-clock time per trial")

    p = cmd("boost", "boosting study with the simulated base learner")
    for flag, kind in (("--meta-trials", int), ("--boost-k", int), ("--boost-m-q", int), ("--gamma", float),
                       ("--boost-delta", float), ("--boost-eps", float), ("--n-sim", int)):
        p.add_argument(flag, type=kind)

    p = cmd("encode", "emit a DIMACS instance or the labelled corpus")
    p.add_argument("--n", type=int)
    p.add_argument("--f", help="truth table as an integer, e.g. 0x6")
    p.add_argument("--s", type=int)
    p.add_argument("--t", type=int, help="error budget: emit the average-case form")
    p.add_argument("--corpus", action="store_true", help="emit the whole labelled corpus")

    p = cmd("solve", "solve a DIMACS file with the DPLL solver")
    p.add_argument("file", type=Path)
    p.add_argument("--node-cap", type=int)

    p = cmd("check-proof", "check WF proof files (JSON)")
    p.add_argument("files", type=Path, nargs="*")
    p.add_argument("--emit-fixtures", action="store_true", help="write the fixture corpus to --out")
    p.add_argument("--large", action="store_true", help="include the xor-sketch proofs")

    p = cmd("dichotomy", "classify every g into G0/G1")
    p.add_argument("--n", type=int)
    p.add_argument("--h", type=lambda v: int(v, 0))
    p.add_argument("--s-small", type=int)
    p.add_argument("--s-large", type=int)
    p.add_argument("--node-cap", type=int)
    p.add_argument("--automator", choices=["template", "fail"], default="template")

    p = cmd("report", "merge trial records and summaries, render figures")
    p.add_argument("paths", type=Path, nargs="*")
    p.add_argument("--no-figures", action="store_true")
    return parser


CONFIG_FLAGS = ("n", "d", "k", "s_star", "trials", "samples", "mode", "timing", "boost_k", "boost_m_q",
                "meta_trials", "gamma", "boost_delta", "boost_eps", "n_sim", "node_cap", "h", "s_small",
                "s_large")


def _config(args) -> ExperimentConfig:
    raw: Dict = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
    for name in CONFIG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            raw[name] = value
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    try:
        return ExperimentConfig.from_dict(raw)
    except TypeError as exc:
        raise UsageError(str(exc)) from exc


def _out(args) -> Path:
    return Path(getattr(args, "out", None) or "natproof-out")


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj))


def cmd_design(args, cfg: ExperimentConfig) -> int:
    D = build_design(cfg.n, cfg.d)
    check = verify_design(D)
    out = _out(args)
    out.mkdir(parents=True, exist_ok=True)
    (out / "design.json").write_text(D.to_json() + "\n")
    write_json(out / "design_check.json", check)
    _emit({"n": D.n, "d": D.d, "p": D.p, "m": D.m, "N": D.N, **check})
    return OK if check["pass"] else VIOLATION


def cmd_learn(args, cfg: ExperimentConfig) -> int:
    summary = run_learning_experiment(cfg, _out(args))
    keys = ("trials", "successes", "empirical_confidence", "gap", "telescoping_residual",
            "statistical_pass", "invariants_ok")
    _emit({k: summary[k] for k in keys})
    return OK if summary["invariants_ok"] else VIOLATION


def cmd_boost(args, cfg: ExperimentConfig) -> int:
    result = boosting_study(cfg.meta_trials, cfg.boost_k, cfg.boost_m_q, cfg.gamma, cfg.boost_delta,
                            cfg.boost_eps, cfg.n_sim, cfg.seed)
    write_json(_out(args) / "boost.json", result)
    _emit(result)
    return OK if result["pass"] else VIOLATION


def cmd_encode(args, cfg: ExperimentConfig) -> int:
    out = _out(args)
    if args.corpus:
        if args.s is not None:
            cfg.corpus_s = (args.s,)
        if args.t is not None:
            cfg.corpus_t = (args.t,)
        rows = emit_benchmarks(cfg, out)
        _emit({"files": len(rows), "unsat": sum(r["label"] == "UNSAT" for r in rows), "dir": str(out)})
        return OK
    if args.f is None or args.s is None:
        raise UsageError("encode needs --f and --s (or --corpus)")
    f = TruthTable(cfg.n, int(args.f, 0))
    F = encode_tt(f, args.s) if args.t is None else encode_tt_avg(f, args.s, args.t)
    kind = "tt" if args.t is None else f"avg_t{args.t}"
    path = out / f"{kind}_n{cfg.n}_s{args.s}_f{f.bits:x}.cnf"
    out.mkdir(parents=True, exist_ok=True)
    path.write_text(emit_dimacs(F))
    _emit({"file": str(path), "vars": F.num_vars, "clauses": len(F.clauses)})
    return OK


def cmd_solve(args, cfg: ExperimentConfig) -> int:
    try:
        text = args.file.read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    F = parse_dimacs(text)
    res = solve(F, args.node_cap if args.node_cap is not None else cfg.node_cap)
    record = {"file": args.file.name, "status": res.status, "decisions": res.decisions,
              "model": res.literals() if res.status == SAT else None}
    status = OK
    if res.status == SAT and F.meta.get("kind") in ("tt", "tt_avg"):
        C = decode_circuit(F, res)
        record["circuit"] = to_text(C)
        f = TruthTable(F.meta["n"], int(F.meta["f"], 16))
        errors = bin(truth_table(C).bits ^ f.bits).count("1")
        limit = 0 if F.meta["kind"] == "tt" else F.meta["t"] - 1
        record["errors"] = errors
        if errors > limit or C.size > F.meta["s"]:
            status = VIOLATION
    write_json(_out(args) / "solve.json", record)
    _emit(record)
    return status


def cmd_check_proof(args, cfg: ExperimentConfig) -> int:
    if args.emit_fixtures:
        from .prooflib import fixture_corpus

        out = _out(args) / "proofs"
        out.mkdir(parents=True, exist_ok=True)
        names = []
        for name, proof in fixture_corpus(large=args.large):
            (out / f"{name}.json").write_text(proof_to_json(proof) + "\n")
            names.append(name)
        _emit({"written": names, "dir": str(out)})
        return OK
    if not args.files:
        raise UsageError("check-proof needs proof files or --emit-fixtures")
    verdicts = []
    for path in args.files:
        try:
            proof = proof_from_json(path.read_text())
        except OSError as exc:
            raise UsageError(str(exc)) from exc
        verdicts.append({"file": path.name, **check_proof(proof).to_json()})
    _emit(verdicts[0] if len(verdicts) == 1 else verdicts)
    return OK if all(v["accepted"] for v in verdicts) else VIOLATION


def cmd_dichotomy(args, cfg: ExperimentConfig) -> int:
    automator = template_automator(cfg.node_cap) if args.automator == "template" else failing_automator
    rep = run_dichotomy(cfg.n, automator, cfg.h, cfg.s_small, cfg.s_large)
    data = rep.to_json()
    write_json(_out(args) / "dichotomy.json", data)
    _emit({k: data[k] for k in ("h", "s_small", "s_large", "G0_size", "G1_size", "coverage", "largeness_ok",
                                "hypothesis_violation")})
    if rep.hypothesis_violation:
        return OK
    return OK if rep.coverage and rep.largeness_ok else VIOLATION


def cmd_report(args, cfg: ExperimentConfig) -> int:
    merged = report(args.paths, _out(args), figures=not args.no_figures)
    _emit({"trial_files": len(merged["trial_files"]), "summaries": len(merged["summaries"]),
           "dichotomy": len(merged["dichotomy"]), "figures": merged["figures"]})
    return OK


COMMANDS = {
    "design": cmd_design,
    "learn": cmd_learn,
    "boost": cmd_boost,
    "encode": cmd_encode,
    "solve": cmd_solve,
    "check-proof": cmd_check_proof,
    "dichotomy": cmd_dichotomy,
    "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        if args.command in ("design", "learn"):
            cfg.validate(mcsp=args.command == "learn")
        return COMMANDS[args.command](args, cfg)
    except ConsistencyError as exc:
        print(f"natproof: invariant violated: {exc}", file=sys.stderr)
        return VIOLATION
    except (UsageError, NatProofError, ValueError) as exc:
        print(f"natproof: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
