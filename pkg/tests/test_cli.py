import io
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from fxlang.cli import main

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


def test_run_toss(tmp_path):
    code, out, _ = run_cli("run", str(PROGRAMS / "toss.fx"))
    assert code == 0
    assert out.splitlines()[0] == "[true, false]"


def test_run_value_exit_codes(tmp_path):
    f = tmp_path / "ok.fx"
    f.write_text("return (1 + 1)\n")
    code, out, _ = run_cli("run", str(f))
    assert code == 0 and out.splitlines()[0] == "2"

    bad = tmp_path / "bad.fx"
    bad.write_text("return (\n")
    code, _, err = run_cli("run", str(bad))
    assert code == 1 and "bad.fx" in err

    illtyped = tmp_path / "illtyped.fx"
    illtyped.write_text("1 + true\n")
    code, _, err = run_cli("run", str(illtyped))
    assert code == 1

    unhandled = tmp_path / "unhandled.fx"
    unhandled.write_text("operation Branch : Unit -> Bool\ndo Branch ()\n")
    code, _, err = run_cli("run", str(unhandled))
    assert code == 2 and "Branch" in err

    code, _, err = run_cli("run", str(PROGRAMS / "diverge.fx"), "--fuel", "500")
    assert code == 3


def test_semantics_agree(tmp_path):
    f = tmp_path / "p.fx"
    f.write_text("let (a, b) = (3, 4) in a + b\n")
    c1, out1, _ = run_cli("run", str(f))
    c2, out2, _ = run_cli("run", str(f), "--semantics", "smallstep")
    assert c1 == c2 == 0
    assert out1.splitlines()[0] == "7" and out2.splitlines()[0] == "7"


def test_tree_command():
    code, out, _ = run_cli("tree", "--pred", "I0", "-n", "1")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "ε ?0"
    assert set(lines[1:3]) == {"t !true", "f !false"}
    assert lines[3] == "classification: 1-standard"

    code, out, _ = run_cli("tree", "--pred", "I2", "-n", "1")
    assert "not n-standard (repeated query 0)" in out

    code, out, _ = run_cli("tree", "--pred", "odd", "-n", "3")
    assert len([l for l in out.splitlines() if not l.startswith("classification")]) == 15
    assert "3-standard" in out


def test_tree_dot_format():
    code, out, _ = run_cli("tree", "--pred", "I0", "-n", "1", "--format", "dot")
    assert code == 0 and out.startswith("digraph")


def test_count_command():
    code, out, _ = run_cli("count", "--impl", "effcount", "--pred", "odd", "-n", "4")
    assert code == 0
    assert "8" in out.splitlines()[0]


def test_list_command():
    code, out, _ = run_cli("list")
    assert code == 0
    assert "effcount" in out and "queens" in out


def test_bench_command(tmp_path):
    out_file = tmp_path / "grid.csv"
    code, _, _ = run_cli(
        "bench", "--impls", "effcount", "--preds", "odd",
        "--nmin", "2", "--nmax", "4", "--out", str(out_file),
    )
    assert code == 0
    lines = out_file.read_text().splitlines()
    assert lines[0].startswith("impl,pred,variant,n,count")
    assert len(lines) == 4


def test_bench_spec_file():
    code, out, _ = run_cli("bench", "--spec", str(PROGRAMS / "grid.spec"))
    assert code == 0
    assert out.splitlines()[0].startswith("impl,pred")


def test_trace_flag(tmp_path):
    f = tmp_path / "t.fx"
    f.write_text("let x <- return 1 in x + x\n")
    code, out, _ = run_cli("run", str(f), "--trace")
    assert code == 0
    assert "rule=M-Let" in out and "rule=M-RetCont" in out


def test_check_command(tmp_path):
    f = tmp_path / "p.fx"
    f.write_text("return (2, true)\n")
    code, out, _ = run_cli("check", str(f))
    assert code == 0 and "ok" in out
