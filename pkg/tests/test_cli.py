import json

import pytest

from paritysig.cli import run_cli
from paritysig.trees import isomorphic, parse_tree_spec


@pytest.fixture
def fx(tmp_path):
    assert run_cli(["fixtures", "--out", str(tmp_path), "--quiet"]) == 0
    return tmp_path


def run(capsys, *argv):
    code = run_cli([str(a) for a in argv])
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def test_fixtures_written(fx):
    names = {p.name for p in fx.iterdir()}
    assert {"fig4.tree", "fig7.tree", "fig6_win_tL.tree", "fig6_lose_tR.tree"} <= names
    for p in fx.iterdir():
        parse_tree_spec(p.read_text())


def test_sig_json(fx, capsys):
    code, out, _ = run(capsys, "sig", fx / "fig4.tree", "--player", "1", "--json")
    assert code == 0
    assert json.loads(out) == {"losing_indices": [1, 3, 5], "signature": [2, 1, 1]}
    code, out, _ = run(capsys, "sig", fx / "fig7.tree", "--player", "2", "--json")
    assert json.loads(out)["signature"] == "infinity"


def test_sig_oracle_and_all(fx, capsys):
    code, out, _ = run(capsys, "sig", fx / "fig7.tree", "--player", "2", "--oracle", "--all", "--json")
    data = json.loads(out)
    assert code == 0 and data["oracle"] == data["signature"]
    assert set(data["nodes"]) == set(parse_tree_spec((fx / "fig7.tree").read_text()).labels)


def test_solve_agrees_across_solvers(fx, capsys):
    outs = [json.loads(run(capsys, "solve", fx / "fig7.tree", "--solver", s, "--json")[1]) for s in ("zielonka", "pm")]
    assert outs[0]["winner"] == outs[1]["winner"] == 1
    winners = [[(r["node"], r["bit"], r["winner"]) for r in o["positions"]] for o in outs]
    assert winners[0] == winners[1]
    code, out, _ = run(capsys, "solve", fx / "fig7.tree")
    assert code == 0 and out.startswith("winner: 1") and "move" in out


def test_compare_counterexample(fx, capsys):
    code, out, _ = run(capsys, "compare", fx / "fig6_lose_tL.tree", fx / "fig6_lose_tR.tree", "--player", "1")
    assert code == 0 and "winner: EXISTS" in out
    code, out, _ = run(capsys, "compare", fx / "fig6_win_tL.tree", fx / "fig6_win_tR.tree", "--player", "1")
    assert code == 0 and "winner: FORALL" in out


def test_compare_emit_tree(fx, capsys, tmp_path):
    dst, dot = tmp_path / "c.tree", tmp_path / "c.dot"
    code, out, _ = run(capsys, "compare", fx / "fig7_t0.tree", fx / "fig7_pri3t0.tree", "--player", "1",
                       "--emit-tree", dst, "--dot", dot, "--json")
    data = json.loads(out)
    assert code == 0 and data["left"] == [0, 0] and data["right"] == [0, 1]
    assert data["winner"] == "EXISTS"
    parse_tree_spec(dst.read_text())
    assert dot.read_text().startswith("digraph")


def test_cpgame_emit_round_trip(fx, capsys, tmp_path):
    dst = tmp_path / "cp.tree"
    code, _, _ = run(capsys, "cpgame", fx / "fig7_t0.tree", fx / "fig7_pri3t0.tree", "--player", "1",
                     "--emit", dst, "--quiet")
    assert code == 0
    parse_tree_spec(dst.read_text())


def test_automaton_commands(fx, capsys, tmp_path):
    src = tmp_path / "loop.tree"
    src.write_text("alphabet angp i=0 k=2\nlet a = p1x(b, b, b);\nlet b = pri0(b);\nroot a;\n")
    code, out, _ = run(capsys, "automaton", "member", src, "--player", "1", "--json")
    assert code == 0 and json.loads(out)["member"] is True
    code, out, _ = run(capsys, "automaton", "ambiguity", src, "--json")
    assert code == 0 and json.loads(out)["unambiguous"] is True
    dot = tmp_path / "run.dot"
    code, _, _ = run(capsys, "automaton", "run", src, "--dot", dot)
    assert code == 0 and dot.read_text().startswith("digraph")
    code, _, err = run(capsys, "automaton", "member", src)
    assert code == 2 and "--player" in err


def test_reduce_emit_and_check(fx, capsys, tmp_path):
    dst = tmp_path / "closure.tree"
    code, out, _ = run(capsys, "reduce", fx / "fig7.tree", "--depth", 20, "--check-run", "--emit", dst)
    assert code == 0, out
    r = parse_tree_spec(dst.read_text())
    assert r.alphabet == "angp"
    assert isomorphic(r, parse_tree_spec(dst.read_text()))


def test_dot(fx, capsys, tmp_path):
    code, out, _ = run(capsys, "dot", fx / "fig4.tree")
    assert code == 0 and out.startswith("digraph")


def test_check_battery(capsys):
    code, out, _ = run(capsys, "check", "--count", 4, "--seed", 3)
    assert code == 0
    assert "FAIL" not in out


def test_malformed_input(capsys, tmp_path):
    bad = tmp_path / "bad.tree"
    bad.write_text("alphabet ang i=0 k=2\nlet a = pri9(a);\nroot a;\n")
    code, _, err = run(capsys, "solve", bad)
    assert code == 2
    assert err.startswith(f"paritysig: {bad}:2:")


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "solve", tmp_path / "nope.tree")
    assert code == 2 and "nope.tree" in err


def test_semantic_error(capsys, tmp_path):
    src = tmp_path / "neg.tree"
    src.write_text("alphabet ang i=0 k=2\nlet a = neg(a);\nroot a;\n")
    code, _, err = run(capsys, "sig", src, "--player", "1")
    assert code == 1 and "error" in err


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "reduce", "x.tree", "--depth", -1)[0] == 2
