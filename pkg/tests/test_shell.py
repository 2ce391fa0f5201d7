"""DSL round trips and evaluation; the command line."""
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from pairrank.shell import nodes as N
from pairrank.shell import printer
from pairrank.shell.cli import main
from pairrank.shell.parser import ScriptError, parse
from pairrank.shell.runner import Options, Runner, exit_status

ROOT = Path(__file__).resolve().parent.parent
WORKED = ROOT / "examples_dsl" / "worked_example.pr"

FULL = """\
small s1, s2;
big t1, t2;
let u = s1*t1 + 1;
group G = lattice(Gm(2), [[1, -1]]);
group L = linear(Ga(2), [[s1, -1]]);
group C = explicit{coords: (x, y); equations: (x^2 + y^2 - 1); identity: (1, 0); mul: (l_x*r_x - l_y*r_y, l_x*r_y + l_y*r_x); inv: (x, -y); param (v): ((1 - v^2)/(1 + v^2), 2*v/(1 + v^2))};
imaginary a = coset_mul(t1, t1) in G;
imaginary b = coset_add(u, t2);
imaginary r = real(t1, s1*t1);
imaginary z = real();
imaginary c = torsor{group: C; witness: (t1, t2); action (p, q): (x*p - y*q, y*p + x*q); solver: ((src_p*dst_p + src_q*dst_q)/(src_p^2 + src_q^2), (src_p*dst_q - src_q*dst_p)/(src_p^2 + src_q^2))};
query rank a;
query rank b | a;
query rank r;
query rank z;
query su_real (t1, s1*t1);
query su_real (t1) | (t1^2);
query isogenous(Ga(1), Gm(1));
query homogeny(lattice(product(Gm(1), Gm(1)), [[2, -1]]), Gm(1), Gm(1));
query validate c;
query indep r | z | b;
query validate coset_mul(-1/t1, 1/t1);
"""


def run_text(text, **opts):
    return Runner(Options(stable=True, **opts)).run(parse(text))


def error_of(text):
    with pytest.raises(ScriptError) as info:
        parse(text)
    return info.value


# -- parsing ---------------------------------------------------------------------------------

def test_minimal_script():
    sc = parse("small s1; big t1; imaginary e1 = coset_add(t1);")
    assert [type(s) for s in sc.statements] == [N.Declare, N.Declare, N.ImagDef]


def test_undefined_name_has_position():
    err = error_of("small s1;\nbig t1;\nimaginary e = coset_add(u);")
    assert err.code == "NameError" and (err.line, err.col) == (3, 25)
    assert err.as_dict()["line"] == 3


def test_worked_example_parses():
    sc = parse(WORKED.read_text(), str(WORKED.parent))
    assert sum(isinstance(s, N.ImagDef) for s in sc.statements) == 3
    assert len(sc.queries) == 6


@pytest.mark.parametrize("text, code", [
    ("small s1; big t1; imaginary e = coset_add(t1)", "SyntaxError"),
    ("small s1; big t1; imaginary e = coset_add(t1); small s2; query rank e; char 0;", "SyntaxError"),
    ("char 2; small s1;", "TypeError"),
    ("small s1; big t1; group L = linear(Ga(1), [[t1]]);", "TypeError"),
    ("small s1; big t1; group G = Gm(2); imaginary e = coset_mul(t1) in G;", "TypeError"),
    ("small s1; big t1; group G = lattice(Gm(2), [[1, t1]]);", "TypeError"),
    ("small s1; big t1; imaginary e = coset_add(t1); imaginary e = coset_add(t1);", "NameError"),
    ("small s1; big t1; let l_x = t1;", "NameError"),
    ("small s1; big t1; let e = t1; query rank e;", "TypeError"),
    ("small s1; big t1; query rank coset_add(t1) $;", "SyntaxError"),
])
def test_static_errors(text, code):
    err = error_of(text)
    assert err.code == code
    assert err.line >= 1 and err.col >= 1


def test_round_trip_full_script():
    sc = parse(FULL)
    again = parse(printer.script(sc))
    assert again == sc
    assert printer.script(again) == printer.script(sc)


NAMES = ["s1", "t1", "t2"]
exprs = st.recursive(
    st.one_of(st.integers(0, 20).map(N.Num), st.sampled_from(NAMES).map(N.Var)),
    lambda inner: st.one_of(
        inner.map(N.Neg),
        st.tuples(st.sampled_from("+-*/"), inner, inner).map(lambda t: N.BinOp(*t)),
        st.tuples(inner, st.integers(-3, 4)).map(lambda t: N.Pow(*t)),
    ),
    max_leaves=8,
)


@hsettings(max_examples=200, deadline=None)
@given(exprs)
def test_expression_round_trip(e):
    sc = parse(f"small s1; big t1, t2; let x = {printer.expr(e)};")
    assert sc.statements[-1].value == e


# -- evaluation ------------------------------------------------------------------------------

def test_worked_example_results():
    rep = Runner(Options(stable=True)).run(parse(WORKED.read_text()))
    res = [r["result"] for r in rep["results"]]
    assert res[0]["rank"]["display"] == "1"
    assert res[1]["rank"]["display"] == "1"
    assert res[2]["independent"] is True and res[2]["star"]["cond_c"] is True
    assert [r["rank"]["display"] for r in res[3:]] == ["ω", "ω", "ω+1"]


def test_full_script_results():
    rep = run_text(FULL)
    by_query = {r["query"]: r for r in rep["results"]}
    assert by_query["rank a"]["result"]["rank"]["display"] == "ω-1"
    assert by_query["rank r"]["result"]["rank"]["display"] == "ω+1"
    assert by_query["rank z"]["result"]["rank"]["display"] == "0"
    assert by_query["isogenous(Ga(1), Gm(1))"]["result"] == {"isogenous": False}
    assert by_query["validate c"]["result"]["ok"] is True
    bad = by_query["validate coset_mul(-1 / t1, 1 / t1)"]["result"]
    assert not bad["ok"] and "invariant_locus" in [c["check"] for c in bad["checks"] if not c["passed"]]
    assert exit_status(rep) == 0


def test_empty_script():
    rep = run_text("small s1; big t1;")
    assert rep["results"] == [] and exit_status(rep) == 0


def test_engine_error_carries_query_index():
    rep = run_text("small s1; big t1; query rank t1;\nquery rank coset_mul(-1/t1, 1/t1);".replace(
        "query rank t1;", "query rank real(t1);"))
    err = rep["results"][1]
    assert err["index"] == 1 and err["line"] == 2 and err["error"]["code"] == "verification_failed"
    assert exit_status(rep) == 1


def test_dependency_failure_is_reported():
    rep = run_text("small s1; big t1; group G = lattice(Gm(1), [[2]]);\n"
                   "imaginary e = coset_mul(t1) in G; query rank e;")
    codes = [r["error"]["code"] for r in rep["results"] if "error" in r]
    assert codes and exit_status(rep) == 1


def test_both_oracles():
    rep = Runner(Options(oracle="both", stable=True)).run(parse(WORKED.read_text()))
    assert rep["context"]["oracle"] == "both"
    assert all("result" in r for r in rep["results"])


# -- command line ------------------------------------------------------------------------------

def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_cli_success_and_stable_json(tmp_path, capsys):
    assert main(["run", str(WORKED), "--stable"]) == 0
    first = capsys.readouterr().out
    assert main(["run", str(WORKED), "--stable"]) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["version"] == "1.0"


def test_cli_text(capsys):
    assert main(["run", str(WORKED), "--text"]) == 0
    out = capsys.readouterr().out
    assert "independent = true" in out and "rank = ω+1" in out


def test_cli_exit_codes(tmp_path, capsys):
    math_err = write(tmp_path, "m.pr", "small s1; big t1; query rank coset_mul(-1/t1, 1/t1);")
    assert main(["run", math_err]) == 1
    syntax = write(tmp_path, "s.pr", "small s1; big t1; query rank")
    assert main(["run", syntax]) == 2
    heavy = write(tmp_path, "h.pr", "small s1; big t1, t2; query rank coset_add(t1*t2 + s1*t1, t1^2*t2);")
    assert main(["run", heavy, "--budget", "5"]) == 3
    assert main(["run", str(tmp_path / "missing.pr")]) == 2


def test_cli_syntax_error_json(tmp_path, capsys):
    syntax = write(tmp_path, "s.pr", "small s1;\nbig t1;\nquery rank (")
    assert main(["run", syntax, "--json"]) == 2
    cap = capsys.readouterr()
    err = json.loads(cap.out)["error"]
    assert err["code"] == "SyntaxError" and err["line"] == 3
    assert "s.pr:" in cap.err


def test_session_round_trip(tmp_path, capsys):
    first = write(tmp_path, "a.pr", "small s1, s2; big t1, t2;\nlet u = (s1*t1 + t1)/(1 + s1);\n"
                  "group G = lattice(Gm(2), [[1, -1]]);\nimaginary a = coset_mul(t1, t1) in G;\n"
                  "imaginary b = coset_add(u, t2);\nquery rank b | a;")
    sess = str(tmp_path / "sess.json")
    assert main(["run", first, "--stable", "--save-session", sess]) == 0
    saved = json.loads(Path(sess).read_text())
    assert {d["name"] for d in saved["session"]["definitions"]} == {"u", "G", "a", "b"}
    assert [d["source"] for d in saved["session"]["definitions"] if d["name"] == "u"] == ["t1"]
    second = write(tmp_path, "b.pr", 'small s3;\nload "sess.json";\nimaginary d = coset_add(u*s3);\n'
                   "query rank b | a;\nquery rank d | b;")
    capsys.readouterr()
    assert main(["run", second, "--stable"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["results"][0]["result"]["rank"]["display"] == "ω"
    assert rep["results"][1]["result"]["rank"]["display"] == "1"
    assert rep["context"]["small"] == ["s3", "s1", "s2"] or set(rep["context"]["small"]) == {"s1", "s2", "s3"}


def test_console_script_installed():
    out = subprocess.run([sys.executable, "-m", "pairrank.shell.cli", "run", str(WORKED), "--stable"],
                         capture_output=True, text=True, cwd=os.getcwd())
    assert out.returncode == 0 and json.loads(out.stdout)["results"]
