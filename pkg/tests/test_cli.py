import json
import subprocess
import sys

from cdag_calculus.abstraction import is_compatible
from cdag_calculus.cli import main
from cdag_calculus.formats import parse_micro_graph, verdict_from_json
from cdag_calculus.graph_core import as_admg

from helpers import DATA, load


def run(capsys, *argv):
    try:
        code = main([str(a) for a in argv])
    except SystemExit as e:
        code = e.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rule2_on_feedback_holds(capsys):
    code, out, _ = run(capsys, "check-rule", DATA / "feedback.cdag", "--rule", "2", "--x", "Z", "--y", "Y")
    assert code == 0
    assert out == "HOLDS R2: P(y | do(z)) = P(y | z)\n"


def test_size_sensitive_separation_fails_with_witness(capsys):
    code, out, _ = run(capsys, "dsep", DATA / "size_sensitive.cdag", "--x", "X", "--y", "Y", "--z", "Z1,Z2")
    assert code == 1
    assert out.startswith("FAILS DSEP: X ⊥ Y | Z1, Z2 in every compatible graph\n")
    g, _, _ = parse_micro_graph(out.split("# compatible counterexample\n")[1])
    assert is_compatible(as_admg(g), load("size_sensitive"))


def test_validate(tmp_path, capsys):
    bad = tmp_path / "self.cdag"
    bad.write_text("cluster A 1\nedge A -> A\n")
    assert run(capsys, "validate", bad) == (1, "invalid\n", "")
    assert run(capsys, "validate", DATA / "two_cycle.cdag") == (0, "valid\n", "")


def test_graph_dumps(capsys):
    code, out, _ = run(capsys, "unfolded", DATA / "feedback.cdag")
    assert code == 0 and "edge B.2 -> Z.1 eligible" in out
    code, out, _ = run(capsys, "canonical", DATA / "cycle_chain.cdag", "--format", "json")
    assert code == 0
    assert json.loads(out)["directed"] == [["A.1", "B.2"], ["B.1", "A.1"], ["B.1", "C.1"], ["C.1", "B.2"]]
    code, out, _ = run(capsys, "reduce", DATA / "wide.cdag")
    assert code == 0 and "cluster B 3\n" in out and "cluster Y 3\n" in out


def test_witness_and_oracle(capsys):
    code, out, _ = run(capsys, "witness", DATA / "feedback.cdag", "--rule", "2", "--x", "Z", "--y", "Y")
    assert (code, out) == (0, "HOLDS\n")
    args = ("--rule", "dsep", "--x", "X", "--y", "Y", "--z", "Z1,Z2")
    code, out, _ = run(capsys, "witness", DATA / "size_sensitive.cdag", *args)
    assert code == 1 and out.startswith("vertex ")
    code, out, _ = run(capsys, "oracle-violator", DATA / "size_sensitive.cdag", *args)
    assert code == 1 and out.startswith("vertex ")
    assert run(capsys, "oracle-count", DATA / "two_cycle.cdag") == (0, "2\n", "")


def test_json_verdict_round_trips(capsys):
    code, out, _ = run(capsys, "dsep", DATA / "size_sensitive.cdag", "--x", "X", "--y", "Y", "--z", "Z1,Z2", "--format", "json")
    assert code == 1
    v = verdict_from_json(out)
    assert not v.holds and v.witness_graph is not None


def test_usage_errors(capsys):
    code, _, err = run(capsys, "check-rule", DATA / "feedback.cdag", "--rule", "4", "--x", "Z", "--y", "Y")
    assert code == 2 and "invalid choice" in err
    code, _, err = run(capsys, "dsep", DATA / "feedback.cdag", "--x", "Z", "--y", "Q")
    assert code == 2 and err.startswith("cdag: error:")
    code, _, err = run(capsys, "dsep", DATA / "feedback.cdag", "--x", "Z", "--y", "Z")
    assert code == 2
    code, _, err = run(capsys, "validate", DATA / "missing.cdag")
    assert code == 2
    code, _, err = run(capsys, "check-rule", DATA / "feedback.cdag", "--rule", "1", "--x", "Z", "--y", "Y", "--over", "A")
    assert code == 2


def test_parse_error_position(tmp_path, capsys):
    f = tmp_path / "bad.cdag"
    f.write_text("cluster A 1\ncluster A 2\n")
    code, _, err = run(capsys, "validate", f)
    assert code == 2 and "line 2, column 9" in err


def test_budget_exit_code(capsys):
    code, _, err = run(capsys, "oracle-count", DATA / "size_sensitive.cdag", "--max-graphs", "5")
    assert code == 3 and "budget" in err
    code, _, _ = run(capsys, "oracle-count", DATA / "wide.cdag")
    assert code == 3


def _cli(*argv, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "cdag_calculus", *map(str, argv)],
        input=stdin, capture_output=True, text=True, check=False,
    )


def test_stdin_and_repeatable_output():
    text = (DATA / "wide.cdag").read_text()
    args = ("dsep", "-", "--x", "X", "--y", "Y", "--z", "C,A", "--format", "json")
    a, b = _cli(*args, stdin=text), _cli(*args, stdin=text)
    assert a.returncode == 1 and a.stdout == b.stdout and a.stdout


def test_crosscheck_is_seeded():
    a = _cli("crosscheck", "--seed", "5", "--cdags", "4", "--queries", "5")
    b = _cli("crosscheck", "--seed", "5", "--cdags", "4", "--queries", "5")
    assert a.returncode == 0, a.stdout + a.stderr
    assert a.stdout == b.stdout == "seed 5: 20 queries, 0 mismatches\n"
    assert _cli("crosscheck").returncode == 2
