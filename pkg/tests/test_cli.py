import json

import pytest

from natproof.cli import main


def snapshot(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def run(tmp_path, name, *argv):
    out = tmp_path / name
    return main(["--seed", "5", "--out", str(out), *argv]), out


RUNS = {
    "design": ["design", "--n", "3", "--d", "2"],
    "learn": ["learn", "--n", "2", "--trials", "40"],
    "boost": ["boost", "--meta-trials", "30", "--n-sim", "8"],
    "encode": ["encode", "--corpus", "--s", "1", "--t", "2"],
    "encode-one": ["encode", "--n", "2", "--f", "0x8", "--s", "1"],
    "check-proof": ["check-proof", "--emit-fixtures"],
    "dichotomy": ["dichotomy", "--n", "2"],
}


@pytest.mark.parametrize("key", sorted(RUNS))
def test_subcommand_reruns_byte_identical(tmp_path, key, capsys):
    rc1, out1 = run(tmp_path, "a", *RUNS[key])
    first = capsys.readouterr().out
    rc2, out2 = run(tmp_path, "b", *RUNS[key])
    second = capsys.readouterr().out
    assert rc1 == rc2 == 0
    assert snapshot(out1) == snapshot(out2)
    assert first.replace(str(out1), "") == second.replace(str(out2), "")


def test_solve_and_report_rerun(tmp_path, capsys):
    assert run(tmp_path, "enc", "encode", "--n", "2", "--f", "0x8", "--s", "1")[0] == 0
    cnf = next((tmp_path / "enc").glob("*.cnf"))
    outs = []
    for name in ("s1", "s2"):
        rc, out = run(tmp_path, name, "solve", str(cnf))
        assert rc == 0
        outs.append(out)
    assert snapshot(outs[0]) == snapshot(outs[1])
    solved = json.loads((outs[0] / "solve.json").read_text())
    assert solved["status"] == "SAT" and solved["errors"] == 0
    run(tmp_path, "learn", "learn", "--n", "2", "--trials", "20")
    run(tmp_path, "learn", "dichotomy", "--n", "2")
    capsys.readouterr()
    reports = []
    for name in ("r1", "r2"):
        rc, out = run(tmp_path, name, "report", str(tmp_path / "learn"))
        assert rc == 0
        reports.append(out)
    assert snapshot(reports[0]) == snapshot(reports[1])
    assert len(list(reports[0].glob("*.png"))) == 3


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 3, "d": 3}))
    rc, out = run(tmp_path, "d", "--config", str(cfg), "design", "--d", "2")
    assert rc == 0
    assert json.loads((out / "design.json").read_text())["m"] == 99


def test_check_proof_verdicts(tmp_path, capsys):
    run(tmp_path, "fx", "check-proof", "--emit-fixtures")
    proof = tmp_path / "fx" / "proofs" / "mp-chain.json"
    capsys.readouterr()
    assert main(["check-proof", str(proof)]) == 0
    assert json.loads(capsys.readouterr().out)["accepted"] is True
    raw = json.loads(proof.read_text())
    raw["lines"][2]["just"]["premises"] = [0, 5]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(raw))
    assert main(["check-proof", str(bad)]) == 1
    verdict = json.loads(capsys.readouterr().out)
    assert verdict == {"file": "bad.json", "accepted": False, "line": 2, "reason": "bad-ref",
                       "detail": verdict["detail"]}


def test_failing_automator_dichotomy_exit(tmp_path, capsys):
    rc, out = run(tmp_path, "f", "dichotomy", "--n", "2", "--automator", "fail")
    data = json.loads((out / "dichotomy.json").read_text())
    assert data["G0_size"] == 0
    assert rc == (0 if data["coverage"] else 1)


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["design", "--n", "two"],
    ["encode", "--n", "2"],
    ["check-proof"],
    ["learn", "--n", "4"],
    ["--config", "/nonexistent.json", "design"],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 2
