import json
import subprocess
import sys
from pathlib import Path

import pytest

from oracle_complexity.cli import main


@pytest.fixture
def specs(tmp_path):
    assert main(["examples", "--out-dir", str(tmp_path)]) == 0
    return tmp_path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_examples_written(specs):
    assert {p.stem for p in specs.glob("*.json")} >= {"bit", "noisy", "and2", "pac"}


def test_frontier_csv(specs, capsys):
    code, out, _ = run(capsys, "solve", "--problem", specs / "bit.json", "--mode", "dist-frontier", "-T", "1")
    assert code == 0 and out.splitlines()[1:] == ["0,1", "1/2,0"]


def test_frontier_decimal(specs, capsys):
    code, out, _ = run(capsys, "solve", "--problem", specs / "and2.json", "-T", "2", "--decimal", "2",
                       "--source", "catalog")
    assert out.splitlines()[1:] == ["0.00,1.50", "0.25,0.00"]


def test_verify_additivity(specs, capsys):
    code, out, _ = run(capsys, "verify", "additivity", "--problem", specs / "bit.json",
                       "--epsilon", "1/8", "-n", "2", "-T", "1")
    assert code == 0 and json.loads(out)["status"] == "pass"


def test_verify_table_and_out(specs, tmp_path, capsys):
    dest = tmp_path / "rep.txt"
    code, _, _ = run(capsys, "verify", "minimax", "--problem", specs / "and2.json", "-e", "1/10",
                     "-T", "2", "--format", "table", "-o", dest)
    assert code == 0 and dest.read_text().startswith("minimax")


def test_mix_then_evaluate(specs, tmp_path, capsys):
    (tmp_path / "s1.json").write_text('{"leaf": "0"}')
    (tmp_path / "s2.json").write_text('{"leaf": "1"}')
    m = tmp_path / "m.json"
    assert run(capsys, "construct", "mix", "--w", "1/2", tmp_path / "s1.json", tmp_path / "s2.json",
               "-o", m)[0] == 0
    code, out, _ = run(capsys, "solve", "--problem", specs / "bit.json", "--mode", "evaluate", "--strategy", m)
    assert code == 0 and json.loads(out)["error"] == ["1/2", "1/2"]


def test_construct_repeat_embed_truncate_filter(specs, tmp_path, capsys):
    opt = tmp_path / "opt.json"
    opt.write_text('{"query": "1", "children": [{"leaf": "0"}, {"query": "2", "children": [{"leaf": "0"}, {"leaf": "1"}]}]}')
    rep = tmp_path / "rep.json"
    assert run(capsys, "construct", "repeat", opt, "-n", "2", "-o", rep)[0] == 0
    emb = tmp_path / "emb.json"
    assert run(capsys, "construct", "embed", rep, "-n", "2", "--problem", specs / "and2.json", "-o", emb)[0] == 0
    code, out, _ = run(capsys, "solve", "--problem", specs / "and2.json", "--mode", "evaluate", "--strategy", emb)
    assert json.loads(out)["prior"]["expectation"] == "3/2"
    code, out, _ = run(capsys, "construct", "truncate", opt, "--budget", "1", "--fallback", "1")
    assert json.loads(out)["children"][1] == {"leaf": "1"}
    code, out, _ = run(capsys, "construct", "truncate", opt, "--alpha", "1/4", "--problem", specs / "and2.json")
    assert code == 0
    code, out, _ = run(capsys, "construct", "filter", opt, "--problem", specs / "and2.json", "-e", "1/25",
                       "--fallback-strategy", opt)
    doc = json.loads(out)
    assert code == 0 and doc["atoms"] == [{"weight": "1", "tree": json.loads(opt.read_text())}]


def test_depth(specs, capsys):
    code, out, _ = run(capsys, "depth", "--problem", specs / "and2.json", "-e", "1/5")
    assert json.loads(out) == {"distributional": 2, "epsilon": "1/5", "max_T": 8, "randomized": 2}


def test_randomized_json(specs, capsys):
    code, out, _ = run(capsys, "solve", "--problem", specs / "bit.json", "--mode", "randomized", "-T", "1", "-e", "1/4")
    assert json.loads(out)["primal_value"] == "1/2"


def test_exit_codes(specs, tmp_path, capsys, monkeypatch):
    assert run(capsys, "solve", "--problem", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "solve", "--problem", specs / "bit.json", "-e", "0.5", "--mode", "randomized")[0] == 2
    (tmp_path / "bad.json").write_text("{")
    assert run(capsys, "solve", "--problem", tmp_path / "bad.json")[0] == 2
    assert run(capsys, "solve", "--problem", specs / "noisy.json", "--mode", "randomized", "-T", "3", "-e", "0")[0] == 3
    assert run(capsys, "solve", "--problem", specs / "bit.json", "--mode", "randomized")[0] == 3
    monkeypatch.setenv("ORACLE_COMPLEXITY_CAP", "3")
    assert run(capsys, "solve", "--problem", specs / "and2.json", "-T", "2", "--source", "catalog")[0] == 4
    monkeypatch.setenv("ORACLE_COMPLEXITY_CAP", "lots")
    assert run(capsys, "solve", "--problem", specs / "and2.json", "-T", "2", "--source", "catalog")[0] == 2


def test_failing_check_exits_1(specs, tmp_path, capsys):
    from oracle_complexity import cli, verify

    def failing(*a, **k):
        rep = verify.CheckReport("x", "y")
        rep.claim("bad", 2, "<=", 1)
        return rep

    import unittest.mock as mock
    with mock.patch.object(cli.harness, "check_minimax", failing):
        assert run(capsys, "verify", "minimax", "--problem", specs / "bit.json", "-e", "0")[0] == 1


def test_output_is_deterministic(specs, tmp_path):
    outs = []
    for i in range(2):
        dest = tmp_path / f"g{i}.json"
        main(["solve", "--problem", str(specs / "and2.json"), "--mode", "randomized", "-T", "2",
              "-e", "1/8", "-o", str(dest)])
        outs.append(dest.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point(specs):
    res = subprocess.run([sys.executable, "-m", "oracle_complexity", "solve", "--problem",
                          str(specs / "bit.json")], capture_output=True, text=True)
    assert res.returncode == 0 and "1/2,0" in res.stdout
