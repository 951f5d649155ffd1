import json
from fractions import Fraction

import pytest

from robba.report_harness import RunManifest, UnknownSuite, list_suites, run_suite, weight_grid

SMALL = dict(samples=5, trunc_T=24, trunc_t=8, levels=(1, 2))


def test_list_suites():
    names = list_suites()
    assert len(names) == 12
    assert "sl2-brackets" in names and "wd-measures" in names


def test_unknown_suite():
    with pytest.raises(UnknownSuite) as ei:
        run_suite("no-such-suite")
    assert "sl2-brackets" in str(ei.value)


@pytest.mark.parametrize("kw", [dict(p=2), dict(p=9), dict(prec=0), dict(levels=())])
def test_manifest_validation(kw):
    with pytest.raises(ValueError):
        RunManifest(**kw)


def test_weight_grid():
    ws = weight_grid(3)
    for w in [(0, 1), (0, 2), (0, 5), (1, 3), (2, 2)]:
        assert w in ws
    # a weight that is a 3-adic integer but not an integer
    assert (0, Fraction(1, 2)) in ws


def test_run_is_deterministic():
    m = RunManifest(**SMALL)
    a, b = run_suite("casimir-scalar", m), run_suite("casimir-scalar", m)
    assert a.digest() == b.digest()
    assert a.summary["digest"] == b.summary["digest"]
    c = run_suite("casimir-scalar", RunManifest(**dict(SMALL, seed=1)))
    assert c.digest() != a.digest()


def test_workers_do_not_change_results():
    m1 = RunManifest(**SMALL)
    m2 = RunManifest(**dict(SMALL, workers=2))
    assert run_suite("sl2-brackets", m1).summary["digest"] == run_suite("sl2-brackets", m2).summary["digest"]


def test_report_jsonl_shape():
    r = run_suite("sen-poly", RunManifest(**SMALL))
    lines = [json.loads(x) for x in r.to_jsonl().splitlines()]
    assert lines[-1]["summary"] is True and lines[-1]["suite"] == "sen-poly"
    assert all({"case", "residual", "floor", "pass"} <= set(x) for x in lines[:-1])
    assert r.passed and r.summary["failed"] == 0


def test_casimir_report_values():
    r = run_suite("casimir-scalar", RunManifest(**SMALL))
    assert r.passed
    assert all(c["pass"] for c in r.cases)
