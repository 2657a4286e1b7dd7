import io
import json

import pytest

from termite.cli import run_command

TOYAMA = "(VAR x)(RULES f(0,1,x) -> f(x,x,x) c -> 0 c -> 1)\n"


@pytest.fixture
def toyama(tmp_path):
    p = tmp_path / "toyama.trs"
    p.write_text(TOYAMA)
    return p


def run(*argv):
    out = io.StringIO()
    code = run_command([str(a) for a in argv], out)
    return code, out.getvalue()


def test_classify(toyama):
    code, out = run("classify", toyama)
    assert code == 0 and "right_flat: yes" in out
    code, out = run("classify", toyama, "--json")
    assert json.loads(out)["shallow"] is True


def test_decide_toyama(toyama, tmp_path):
    assert run("decide", toyama, "--mode", "innermost")[0] == 0
    code, out = run("decide", toyama, "--from", "f(0,1,c)", "--json")
    assert code == 1
    rep = json.loads(out)
    assert rep["result"] == "nonterminating"
    assert rep["witness"]["kind"] == "cycle" and rep["witness"]["loop_length"] == 3
    report = tmp_path / "r.json"
    report.write_text(out)
    assert run("check-witness", toyama, report) == (0, "witness ok\n")


def test_decide_plain_global_refuses_or_decides(toyama):
    # right-shallow right-linear fails (x occurs thrice on the right)
    code, _ = run("decide", toyama)
    assert code == 3


def test_budget_exit_and_env(toyama, monkeypatch):
    code, out = run("decide", toyama, "--from", "f(0,1,c)", "--budget", "1", "--json", "--engine", "bfs")
    assert code == 2
    rep = json.loads(out)
    assert rep["result"] == "unknown" and rep["reason"] == "budget" and rep["budget"]["source"] == "flag"
    monkeypatch.setenv("TERMITE_BUDGET", "1")
    code, out = run("decide", toyama, "--from", "f(0,1,c)", "--json", "--engine", "bfs")
    assert code == 2 and json.loads(out)["budget"]["source"] == "env"
    monkeypatch.setenv("TERMITE_BUDGET", "lots")
    assert run("decide", toyama, "--from", "f(0,1,c)")[0] == 3


def test_input_errors(tmp_path, toyama):
    assert run("decide", tmp_path / "missing.trs")[0] == 3
    bad = tmp_path / "bad.trs"
    bad.write_text("(VAR x)(RULES f(x -> x)")
    assert run("classify", bad)[0] == 3
    assert run("decide", toyama, "--from", "f(0,1,x)")[0] == 3
    deep = tmp_path / "deep.trs"
    deep.write_text("(VAR x)(RULES a -> g(g(a)))")
    assert run("decide", deep, "--from", "a")[0] == 3
    assert run("decide", deep, "--from", "a", "--auto-flatten")[0] == 1


def test_flatten(tmp_path):
    src = tmp_path / "s.trs"
    src.write_text("(VAR x)(RULES f(x,a) -> g(f(b,b)))(START f(b,a))")
    out = tmp_path / "flat.trs"
    code, msg = run("flatten", src, "-o", out)
    assert code == 0 and out.exists() and (tmp_path / "flat.trs.trace.json").exists()
    assert "#" in out.read_text()
    assert run("classify", out)[0] == 3  # reserved names need the internal parser
    trace = json.loads((tmp_path / "flat.trs.trace.json").read_text())
    assert trace


def test_generate_pcp_and_decide(tmp_path):
    p = tmp_path / "p.trs"
    code, _ = run("generate", "pcp", "--pairs", "aa:a,b:aba", "--witness", "1,2,1", "-o", p)
    assert code == 0
    code, out = run("decide", p, "--json")
    assert code == 1
    r = tmp_path / "p.json"
    r.write_text(out)
    assert run("check-witness", p, r)[0] == 0


def test_generate_automata(tmp_path):
    spec = '[{"states":["s","t"],"initial":"s","finals":["t"],"transitions":[["s","a","t"]]}]'
    code, text = run("generate", "automata", "--spec", spec, "--pad-single")
    assert code == 0 and "(RULES" in text
    p = tmp_path / "a.trs"
    p.write_text(text)
    assert run("decide", p)[0] == 1
    assert run("generate", "automata")[0] == 3


def test_generate_pcp_innermost(tmp_path):
    p = tmp_path / "i.trs"
    assert run("generate", "pcp-innermost", "--pairs", "a:a", "--word", "a", "-o", p)[0] == 0
    assert run("decide", p, "--mode", "innermost")[0] == 1


def test_pumping_flag(tmp_path):
    p = tmp_path / "c.trs"
    p.write_text("(VAR x)(RULES c -> f(c,c))(START c)")
    code, out = run("decide", p, "--pumping", "--json")
    assert code == 1
    rep = json.loads(out)
    assert rep["witness"]["kind"] == "height-overflow" and rep["witness"]["pumping"]["constant"] == "c"
    r = tmp_path / "c.json"
    r.write_text(out)
    assert run("check-witness", p, r)[0] == 0
