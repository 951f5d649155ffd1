import json

import pytest
from click.testing import CliRunner

from robba.cli import main, parse_pipeline, run_pipeline
from robba.errors import ParseError
from robba.series_ring import format_series, parse_series


@pytest.fixture
def run():
    runner = CliRunner()

    def go(*args, input=None):
        return runner.invoke(main, list(args), input=input)
    return go


@pytest.mark.parametrize("args,out", [
    (["eval", "psi", "T"], "-1"),
    (["--p", "2", "eval", "phi", "T"], "2*T + T^2"),
    (["eval", "res", "1/T"], "1"),
    (["eval", "psi phi", "1 + 2*T"], "1 + 2*T"),
])
def test_eval(run, args, out):
    r = run(*args)
    assert r.exit_code == 0, r.output
    assert r.output.strip() == out


def test_eval_stdin_and_json(run):
    r = run("--json", "eval", "psi", input="T^3")
    d = json.loads(r.output)
    assert d["series"] == "T" and d["min_prec"] == "inf"


def test_eval_parse_error_position(run):
    r = run("--json", "eval", "psi bogus", "T")
    assert r.exit_code == 2
    d = json.loads(r.output)
    assert d["error"] == "ParseError" and d["position"] == 4


def test_parse_pipeline():
    assert [n for n, _, _ in parse_pipeline("psi sigma(2) phi")] == ["psi", "sigma", "phi"]
    assert parse_pipeline("res∘psi")[0][0] == "res"
    for bad in ["", "sigma", "phi(2)", "psi res"]:
        with pytest.raises(ParseError):
            parse_pipeline(bad)


def test_run_pipeline_t_round_trip():
    # t is known to finite precision, so the round trip agrees with T without being exact
    f = parse_series("T", 3)
    g = run_pipeline("div_t mul_t", f, trunc=48)
    assert g.agrees(f) and g.min_prec() < float("inf")


def test_run_pipeline_restrict():
    f = parse_series("1 + T", 3)
    assert run_pipeline("restrict(1@1)", f).agrees(f)
    assert run_pipeline("restrict(0,2@1)", f).is_zero()


@pytest.mark.parametrize("a,b,lam", [("0", "1", "0"), ("0", "3", "4"), ("2", "2", "-1/2"), ("0", "1/2", "-3/8")])
def test_casimir(run, a, b, lam):
    r = run("--json", "--trunc-T", "24", "casimir", a, b, "--samples", "2")
    assert r.exit_code == 0, r.output
    d = json.loads(r.output)
    # 1/2 is not an exact p-adic integer multiple, so the prediction carries an O-term
    assert d["predicted"].split(" + O(")[0] == lam and d["ok"]


def test_wd(run):
    r = run("--json", "wd", "dirac: 1, 2:3, 4", "3^0*1 | x^2")
    assert r.exit_code == 0, r.output
    d = json.loads(r.output)
    assert d["final_ok"] and len(d["rows"]) == 3


def test_wd_rejects_support_at_p(run):
    r = run("wd", "dirac: 3")
    assert r.exit_code == 2
    assert "SupportError" in r.output


def test_suite_list_and_unknown(run):
    r = run("suite", "--list")
    assert r.exit_code == 0 and "sen-poly" in r.output
    r = run("suite", "nope")
    assert r.exit_code == 2 and "sl2-brackets" in r.output


def test_suite_run(run, tmp_path):
    out = tmp_path / "rep.jsonl"
    r = run("--trunc-T", "24", "--level", "1", "suite", "sen-poly", "casimir-scalar", "--samples", "5",
            "--output", str(out))
    assert r.exit_code == 0, r.output
    assert r.output.count("PASS") == 2
    lines = [json.loads(x) for x in out.read_text().splitlines()]
    assert sum(1 for x in lines if x.get("summary")) == 2
