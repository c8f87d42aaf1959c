"""Command line front end: ``ellsix verify`` and ``ellsix eval``.

Exit codes: 0 pass, 1 verification failure, 2 usage error, 3 numeric or
sampling failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Callable

from . import __version__
from .core import DomainError, EllipticError, EllipticParams, SingularError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- argument decoding

def _cx(v: Any, name: str) -> complex:
    """Accept 1.5, "1+2j", [re, im] or {"re": .., "im": ..}."""
    try:
        if isinstance(v, dict):
            return complex(float(v.get("re", 0)), float(v.get("im", 0)))
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return complex(float(v[0]), float(v[1]))
        if isinstance(v, str):
            return complex(v.replace(" ", ""))
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return complex(v)
    except (TypeError, ValueError):
        pass
    raise UsageError(f"argument {name!r}: cannot read {v!r} as a complex number")


def _cvec(v: Any, name: str) -> list[complex]:
    if not isinstance(v, list):
        raise UsageError(f"argument {name!r} must be a list")
    return [_cx(x, f"{name}[{i}]") for i, x in enumerate(v)]


def _ints(v: Any, name: str) -> list[int]:
    if not isinstance(v, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise UsageError(f"argument {name!r} must be a list of integers")
    return list(v)


class _Args:
    def __init__(self, data: dict):
        if not isinstance(data, dict):
            raise UsageError("arguments must be a JSON object")
        self.d = data

    def need(self, key):
        if key not in self.d:
            raise UsageError(f"missing argument {key!r}")
        return self.d[key]

    def cx(self, key, default=None):
        if key not in self.d and default is not None:
            return default
        return _cx(self.need(key), key)

    def cvec(self, key):
        return _cvec(self.need(key), key)

    def ints(self, key):
        return _ints(self.need(key), key)

    def int(self, key):
        v = self.need(key)
        if not isinstance(v, int) or isinstance(v, bool):
            raise UsageError(f"argument {key!r} must be an integer")
        return v

    def params(self, need_q: bool = True) -> EllipticParams:
        p = self.cx("p", 0j)
        q = self.cx("q") if need_q else self.cx("q", 0.5 + 0j)
        return EllipticParams(p, q)


# ---------------------------------------------------------------- evaluators

def _theta(a: _Args):
    return a.params(need_q=False).theta(a.cx("x")), {}


def _poch(a: _Args):
    return a.params().poch(a.cx("x"), a.int("k")), {}


def _phi(a: _Args):
    from .weights import phi
    return phi(a.cvec("w"), a.cvec("z"), a.cx("a"), a.params()), {}


def _dwpf(a: _Args):
    from .lattice import domain_wall_pf
    return domain_wall_pf(a.cx("lam"), a.cvec("w"), a.cvec("z"), a.params()), {}


def _pf(a: _Args):
    from .lattice import LatticeBoundary, partition_function
    bd = a.need("boundary")
    if not isinstance(bd, dict):
        raise UsageError("boundary must be an object with keys a, b, c, d")
    boundary = LatticeBoundary(*(_ints(bd.get(k), f"boundary.{k}") for k in "abcd"))
    return partition_function(a.cx("lam"), a.cvec("w"), a.cvec("z"), boundary, a.params()), {}


def _r6j(a: _Args):
    from .sixj import METHODS, SixJIndex, r6j
    method = a.d.get("method", "mcmt")
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    idx = SixJIndex(a.ints("S"), a.ints("T"), a.ints("U"), a.ints("V"),
                    a.cvec("w"), a.cvec("z"), a.cx("lam"))
    if not idx.parity_ok:
        return 0j, {"reason": "parity"}
    return r6j(idx, method, a.params()), {"method": method}


def _vnm(a: _Args):
    from .series import SeriesSpec, v_series
    term = a.need("termination")
    if not (isinstance(term, list) and len(term) == 2 and term[0] in ("b", "c")):
        raise UsageError('termination must be ["b", N] or ["c", [N_1, ..., N_n]]')
    spec = SeriesSpec(a.cx("a"), a.cvec("b"), a.cvec("c"), a.cvec("z"), tuple(term))
    return v_series(spec, a.params()), {}


def _biortho(a: _Args):
    from .biortho import BiorthoParams
    return BiorthoParams(a.cx("a"), a.cx("b"), a.cx("c"), a.cvec("x"), a.ints("N"))


def _f(a: _Args):
    from .biortho import f_fn
    return f_fn(a.ints("u"), a.ints("y"), _biortho(a), a.params()), {}


def _g(a: _Args):
    from .biortho import g_fn
    return g_fn(a.ints("u"), a.ints("y"), _biortho(a), a.params()), {}


def _weight(a: _Args):
    from .biortho import weight_w
    return weight_w(a.ints("y"), _biortho(a), a.params()), {}


def _gamma(a: _Args):
    from .biortho import norm_gamma
    return norm_gamma(a.ints("u"), _biortho(a), a.params()), {}


EVALUATORS: dict[str, Callable[[_Args], tuple[complex, dict]]] = {
    "theta": _theta,
    "poch": _poch,
    "phi": _phi,
    "dwpf": _dwpf,
    "pf": _pf,
    "r6j": _r6j,
    "vnm": _vnm,
    "f": _f,
    "g": _g,
    "weight": _weight,
    "gamma": _gamma,
}


def evaluate(expr: str, data: dict) -> dict:
    """Evaluate ``expr`` at ``data``; returns the JSON record to print."""
    if expr not in EVALUATORS:
        raise UsageError(f"unknown expression {expr!r}; choose from {', '.join(EVALUATORS)}")
    value, extra = EVALUATORS[expr](_Args(data))
    # normalize -0.0 so that printed zeros are plain
    return {"re": value.real + 0.0, "im": value.imag + 0.0, **extra}


# ---------------------------------------------------------------- commands

def _cmd_eval(ns) -> int:
    if (ns.args is None) == (ns.inline is None):
        raise UsageError("give exactly one of --args FILE or --inline JSON")
    try:
        if ns.args is not None:
            with open(ns.args, encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            data = json.loads(ns.inline)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read arguments: {exc}") from exc
    try:
        rec = evaluate(ns.expr, data)
    except SingularError as exc:
        print(json.dumps({"error": "singular", "message": str(exc)}))
        return EXIT_NUMERIC
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    except EllipticError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_NUMERIC
    print(json.dumps(rec))
    return EXIT_OK


def _cmd_verify(ns) -> int:
    from .verify import ConfigError, SuiteConfig, load_config, report_csv, report_json, run_suite

    try:
        cfg = load_config(ns.config) if ns.config else SuiteConfig()
        if ns.seed is not None:
            cfg.seed = ns.seed
        if ns.threads is not None:
            cfg.threads = ns.threads
        if ns.trials is not None:
            cfg.trials = ns.trials
        if ns.suite is not None:
            # an explicit empty selection (--suite "") gives an empty report
            cfg.suites = [s for s in ns.suite if s]
        for item in ns.tolerance or ():
            sid, sep, val = item.partition("=")
            if not sep:
                raise ConfigError(f"--tolerance expects ID=VALUE, got {item!r}")
            cfg.tolerances[sid.strip()] = float(val)
        cfg.validate()
    except (ConfigError, ValueError) as exc:
        raise UsageError(str(exc)) from exc

    report = run_suite(cfg)
    text = report_json(report)
    if ns.json:
        with open(ns.json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    if ns.csv:
        with open(ns.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(report_csv(report))
    if not ns.quiet:
        for r in report["suites"]:
            status = "PASS" if r["passed"] else ("ERROR" if "error" in r else "FAIL")
            print(f"{status:5s} {r['suite']:22s} max residual {r['max_residual']:.3e} "
                  f"(tol {r['tolerance']:.0e}, {r['trials']} trials, {r['wall_time']:.2f}s)")
            if "error" in r:
                print(f"      {r['error']}")
        print("verdict:", "PASS" if report["passed"] else "FAIL")
    if report["errored"]:
        return EXIT_NUMERIC
    return EXIT_OK if report["passed"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ellsix", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the randomized verification suites")
    v.add_argument("--config", metavar="FILE", help="INI configuration file")
    v.add_argument("--seed", type=int, help="master seed (overrides the config)")
    v.add_argument("--suite", action="append", metavar="ID",
                   help="run only this suite; repeatable")
    v.add_argument("--tolerance", action="append", metavar="ID=V",
                   help="override a suite tolerance; repeatable")
    v.add_argument("--trials", type=int, help="trials per suite (overrides defaults)")
    v.add_argument("--threads", type=int, help="worker threads")
    v.add_argument("--json", metavar="OUT", help="write the JSON report here")
    v.add_argument("--csv", metavar="OUT", help="write per-trial residuals here")
    v.add_argument("-q", "--quiet", action="store_true", help="no summary on stdout")
    v.set_defaults(func=_cmd_verify)

    e = sub.add_parser("eval", help="evaluate one function and print JSON")
    e.add_argument("expr", help=f"one of: {', '.join(EVALUATORS)}")
    e.add_argument("--args", metavar="FILE", help="JSON file with the arguments")
    e.add_argument("--inline", metavar="JSON", help="arguments as a JSON string")
    e.set_defaults(func=_cmd_eval)

    sub.add_parser("suites", help="list suite ids").set_defaults(func=_cmd_suites)
    return ap


def _cmd_suites(ns) -> int:
    from .verify import SUITES
    for s in SUITES.values():
        print(f"{s.id:22s} tol {s.tolerance:.0e}  trials {s.trials:4d}  {s.anchor}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except UsageError as exc:
        print(f"ellsix: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
