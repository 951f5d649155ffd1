"""Command-line front end: series calculus, Casimir and w_D experiments, and the check suites."""

from __future__ import annotations

import json
import random
import re
import sys
from dataclasses import dataclass
from fractions import Fraction

import click

from ._kernel import INF
from .characters import Character
from .errors import DivisibilityError, ParseError, RobbaError
from .padic_arith import PAdicScalar
from .series_ring import LaurentSeries, format_series, one_plus_T_pow, parse_series

__all__ = ["main", "CliConfig", "run_pipeline", "parse_pipeline"]


@dataclass(frozen=True)
class CliConfig:
    p: int = 3
    prec: int = 20
    trunc_T: int = 48
    trunc_t: int = 12
    level: int = 2
    tail: int = 8
    seed: int = 0
    json: bool = False


def _num(x) -> float | str:
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return float(x)


def _scalar_text(c: PAdicScalar) -> str:
    return c.rational_text()


def _emit(cfg: CliConfig, payload: dict, human: str) -> None:
    click.echo(json.dumps(payload, sort_keys=True) if cfg.json else human)


# ---------------------------------------------------------------------------------------
# eval: a flat pipeline of operators, applied right to left

_OP = re.compile(r"\s*(?P<name>[a-zA-Z_]\w*)(?:\((?P<arg>[^()]*)\))?")
_OPS_NOARG = {"phi", "psi", "nabla", "mul_t", "div_t", "res"}
_OPS_ARG = {"sigma", "pow1pT", "restrict"}


def parse_pipeline(expr: str) -> list[tuple[str, str | None, int]]:
    """Split 'psi sigma(2) phi' into [(name, arg, position)], leftmost first."""
    out = []
    pos = 0
    s = expr.replace("∘", " ").replace(".", " ")
    while pos < len(s):
        if s[pos:].strip() == "":
            break
        m = _OP.match(s, pos)
        if not m:
            raise ParseError("expected an operator", pos)
        name, arg = m.group("name"), m.group("arg")
        start = m.start("name")
        if name in _OPS_NOARG:
            if arg is not None:
                raise ParseError(f"{name} takes no argument", start)
        elif name in _OPS_ARG:
            if arg is None or not arg.strip():
                raise ParseError(f"{name} needs an argument, as in {name}(...)", start)
        else:
            raise ParseError(f"unknown operator {name!r}", start)
        out.append((name, arg, start))
        pos = m.end()
    if not out:
        raise ParseError("empty expression", 0)
    if any(n == "res" for n, _, _ in out[1:]):
        raise ParseError("res returns a scalar and can only be applied last (leftmost)", out[1][2])
    return out


def _rational(text: str, pos: int) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad number {text.strip()!r}", pos) from None


def run_pipeline(expr: str, f: LaurentSeries, trunc: int | None = None) -> LaurentSeries | PAdicScalar:
    from .psi_restriction import CompactOpenSubset, psi, restrict

    p = f.p
    x: LaurentSeries | PAdicScalar = f
    for name, arg, pos in reversed(parse_pipeline(expr)):
        if name == "phi":
            x = x.apply_phi()
        elif name == "psi":
            x = psi(x)
        elif name == "nabla":
            x = x.nabla()
        elif name == "mul_t":
            x = x.mul_t()
        elif name == "div_t":
            x = x.div_t()
        elif name == "res":
            x = x.residue()
        elif name == "sigma":
            x = x.apply_sigma(PAdicScalar.of(p, _rational(arg, pos)), trunc=trunc)
        elif name == "pow1pT":
            x = one_plus_T_pow(PAdicScalar.of(p, _rational(arg, pos)), p, M=trunc or x.trunc or 48) * x
        else:
            x = restrict(x, CompactOpenSubset.parse(arg, p))
    return x


# ---------------------------------------------------------------------------------------


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--p", "p", type=int, default=3, show_default=True, help="The prime.")
@click.option("--prec", type=int, default=20, show_default=True, help="Coefficient precision (digits).")
@click.option("--trunc-T", "trunc_T", type=int, default=48, show_default=True, help="T-adic truncation.")
@click.option("--trunc-t", "trunc_t", type=int, default=12, show_default=True, help="t-adic truncation.")
@click.option("--level", type=int, default=2, show_default=True, help="Localisation level n.")
@click.option("--tail", type=int, default=8, show_default=True, help="Cut-off B for principal parts.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.pass_context
def main(ctx, p, prec, trunc_T, trunc_t, level, tail, seed, as_json):
    """Numerical calculus on (phi, Gamma)-modules over the Robba ring."""
    ctx.obj = CliConfig(p, prec, trunc_T, trunc_t, level, tail, seed, as_json)


def _fail(cfg: CliConfig, e: RobbaError) -> None:
    payload = {"error": type(e).__name__, "message": str(e)}
    pos = getattr(e, "position", None)
    if pos is not None:
        payload["position"] = pos
    if cfg.json:
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        click.echo(f"error ({type(e).__name__}): {e}", err=True)
    sys.exit(2)


@main.command("eval")
@click.argument("expr")
@click.argument("series", default="-")
@click.pass_obj
def cmd_eval(cfg: CliConfig, expr: str, series: str):
    """Apply EXPR (operators right to left) to SERIES ('-' reads stdin).

    Operators: phi psi nabla mul_t div_t res sigma(a) pow1pT(b) restrict(U).
    """
    text = sys.stdin.read() if series == "-" else series
    try:
        f = parse_series(text, cfg.p, B=cfg.tail, wprec=cfg.prec)
        out = run_pipeline(expr, f, trunc=cfg.trunc_T)
    except RobbaError as e:
        _fail(cfg, e)
        return
    if isinstance(out, PAdicScalar):
        _emit(cfg, {"expr": expr, "input": text, "scalar": _scalar_text(out), "prec": _num(out.prec)},
              _scalar_text(out))
    else:
        s = format_series(out)
        _emit(cfg, {"expr": expr, "input": text, "series": s, "min_prec": _num(out.min_prec())}, s)


@main.command("casimir")
@click.argument("a")
@click.argument("b")
@click.option("--samples", type=int, default=5, show_default=True)
@click.pass_obj
def cmd_casimir(cfg: CliConfig, a: str, b: str, samples: int):
    """Apply the Casimir element to random vectors of the module with weights (A, B)."""
    from .phigamma import PhiGammaModule, casimir_apply, random_element, recover_scalar

    try:
        M = PhiGammaModule.with_weights(cfg.p, _rational(a, 0), _rational(b, 0))
    except RobbaError as e:
        _fail(cfg, e)
        return
    want = M.casimir_scalar
    rows = []
    for i in range(samples):
        rng = random.Random(f"{cfg.seed}:casimir:{i}")
        z = random_element(M, rng, cfg.trunc_T, cfg.prec)
        try:
            lam = recover_scalar(casimir_apply(z, M), z)
        except DivisibilityError as e:
            rows.append({"sample": i, "ok": False, "error": str(e)})
            continue
        r, fl = lam.residual(want)
        rows.append({"sample": i, "recovered": _scalar_text(lam), "residual": _num(r), "floor": _num(fl),
                     "ok": bool(r >= fl)})
    ok = all(r["ok"] for r in rows)
    human = [f"weights ({a}, {b}): predicted scalar {_scalar_text(want)}"]
    for r in rows:
        if "error" in r:
            human.append(f"  sample {r['sample']}: FAIL {r['error']}")
        else:
            human.append(f"  sample {r['sample']}: {r['recovered']}  residual {r['residual']} "
                         f"floor {r['floor']}  {'ok' if r['ok'] else 'FAIL'}")
    _emit(cfg, {"weights": [a, b], "predicted": _scalar_text(want), "samples": rows, "ok": ok}, "\n".join(human))
    sys.exit(0 if ok else 1)


def _character(text: str, p: int) -> Character:
    if text.strip() == "trivial":
        return Character.trivial(p)
    return Character.parse(text, p)


@main.command("wd")
@click.argument("measure")
@click.argument("character", default="trivial")
@click.option("--n-max", type=int, default=3, show_default=True)
@click.option("--window", type=int, default=6, show_default=True, help="Coefficients compared.")
@click.pass_obj
def cmd_wd(cfg: CliConfig, measure: str, character: str, n_max: int, window: int):
    """Riemann sums for w_D on MEASURE ('mahler: ...' or 'dirac: b[:w],...') against w_D itself.

    CHARACTER is 'trivial' or 'p^v*u | x^m<x>^s'.
    """
    from .measures import parse_measure, wD_integral, wD_riemann

    try:
        mu = parse_measure(measure, cfg.p)
        dD = _character(character, cfg.p)
        M = min(cfg.trunc_T, mu.M) if mu.atoms is None else cfg.trunc_T
        if mu.atoms is not None:
            from .measures import Measure

            mu = Measure.diracs(cfg.p, mu.atoms, M=M)
        oracle = wD_integral(mu, dD, level=n_max).amice()
        rep = wD_riemann(mu.amice(), dD, n_max=n_max, M=M)
    except RobbaError as e:
        _fail(cfg, e)
        return
    rows = []
    for n, S in enumerate(rep.sums, start=1):
        c = S.compare(oracle)
        res, fl = c.residuals[:window], c.floors[:window]
        r = float(res.min()) if len(res) else INF
        f = float(fl.min()) if len(fl) else INF
        rows.append({"n": n, "agreement": _num(min(r, f)), "residual": _num(r), "floor": _num(f),
                     "ok": bool((res >= fl).all())})
    final = rows[-1]["ok"]
    ag = [r["agreement"] for r in rows]
    steady = all((INF if x == "inf" else x) <= (INF if y == "inf" else y) for x, y in zip(ag, ag[1:]))
    ok = final and steady
    human = [f"{'n':>3}  {'agreement':>10}  {'residual':>9}  {'floor':>6}"]
    human += [f"{r['n']:>3}  {str(r['agreement']):>10}  {str(r['residual']):>9}  {str(r['floor']):>6}"
              for r in rows]
    human.append(f"final sum against w_D: {'ok' if final else 'FAIL'}; "
                 f"agreement non-decreasing: {'yes' if steady else 'no'}")
    _emit(cfg, {"measure": measure, "character": str(dD), "rows": rows, "final_ok": final,
                "non_decreasing": steady, "ok": ok}, "\n".join(human))
    sys.exit(0 if ok else 1)


@main.command("suite")
@click.argument("names", nargs=-1)
@click.option("--list", "list_only", is_flag=True, help="List the suites and exit.")
@click.option("--samples", type=int, default=100, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False, writable=True), help="Write JSONL reports here.")
@click.pass_obj
def cmd_suite(cfg: CliConfig, names, list_only: bool, samples: int, workers: int, output: str | None):
    """Run check suites by name ('all' for every suite)."""
    from .report_harness import SUITES, RunManifest, UnknownSuite, list_suites, run_suite

    if list_only:
        for n in list_suites():
            click.echo(f"{n:18s} {SUITES[n].doc}")
        return
    names = list(names) or ["all"]
    if "all" in names:
        names = list_suites()
    # levels 1 .. level+1: the trace check at level n also reads level n+1
    m = RunManifest(p=cfg.p, prec=cfg.prec, trunc_T=cfg.trunc_T, trunc_t=cfg.trunc_t,
                    levels=tuple(range(1, cfg.level + 2)), tail=cfg.tail, samples=samples, seed=cfg.seed,
                    workers=workers)
    reports = []
    for n in names:
        try:
            reports.append(run_suite(n, m))
        except UnknownSuite as e:
            _fail(cfg, e)
            return
    if output:
        with open(output, "w") as fh:
            for r in reports:
                fh.write(r.to_jsonl() + "\n")
    for r in reports:
        s = r.summary
        if cfg.json:
            click.echo(json.dumps({"suite": r.suite, "passed": r.passed, "summary": s}, sort_keys=True))
        else:
            click.echo(f"{'PASS' if r.passed else 'FAIL'}  {r.suite:18s} {s.get('cases')} cases  "
                       f"{s.get('failed')} failures  {r.wall_time:.1f}s")
    sys.exit(0 if all(r.passed for r in reports) else 1)


if __name__ == "__main__":
    main()
