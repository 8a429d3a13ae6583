"""Command-line entry point: cover, cover-scan, cost, verdict, estimate.

Exit codes: 0 success, 1 internal error, 2 domain error, 64 usage error.
Reports are JSON on stdout; with --emit the CSV goes to the given path and
the JSON report to the same path with a .json suffix appended.

CSV columns
  cover      center_1..center_d (p/2^m strings), side (2^-k)
  cover-scan N, cost, ratio, slope_so_far
  cost       q, term, running_total, comparison_term
  estimate   hits: q, product | boxdim: j, resolution, count | tail: one summary row
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .errors import DomainError, MultcoverError
from .functions import parse_dimfn, parse_psi

SCHEMA_VERSION = 1
EX_OK, EX_INTERNAL, EX_DOMAIN, EX_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _floats(text: str) -> tuple:
    return tuple(float(Fraction(t)) for t in text.split(",") if t.strip())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="multcover", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=f"multcover {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("cover", help="dyadic cover of M(2^-N): cost and optional cube list")
    c.add_argument("--d", type=int, required=True)
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--s", type=str)
    g.add_argument("--dimfn", type=str)
    c.add_argument("--N", type=int, required=True)
    c.add_argument("--materialize", action="store_true")
    c.add_argument("--cap", type=int, default=10**6)
    c.add_argument("--emit", type=str)

    cs = sub.add_parser("cover-scan", help="cost scaling over a range of N")
    cs.add_argument("--d", type=int, required=True)
    cs.add_argument("--s", type=str, required=True)
    cs.add_argument("--N-min", type=int, required=True)
    cs.add_argument("--N-max", type=int, required=True)
    cs.add_argument("--emit", type=str)

    k = sub.add_parser("cost", help="truncated fine-cover cost ledger")
    k.add_argument("--mode", choices=["single", "double"], default="single")
    k.add_argument("--d", type=int, required=True)
    k.add_argument("--psi", type=str, required=True)
    k.add_argument("--dimfn", type=str, required=True)
    k.add_argument("--Q", type=int, required=True)
    k.add_argument("--theta", type=str)
    k.add_argument("--emit", type=str)

    v = sub.add_parser("verdict", help="measure verdict from the series criteria")
    v.add_argument("--d", type=int, required=True)
    g = v.add_mutually_exclusive_group()
    g.add_argument("--s", type=str)
    g.add_argument("--dimfn", type=str)
    v.add_argument("--psi", type=str, required=True)
    v.add_argument("--mode", choices=["homogeneous", "inhomogeneous", "doubly", "multivariable"],
                   default="homogeneous")
    v.add_argument("--m", type=int, default=1)
    v.add_argument("--theta", type=str)
    v.add_argument("--json", action="store_true", help="accepted for compatibility; output is always JSON")
    v.add_argument("--emit", type=str)

    e = sub.add_parser("estimate", help="hit counting, Monte Carlo tail, box dimension")
    e.add_argument("--what", choices=["hits", "tail", "boxdim"], required=True)
    e.add_argument("--d", type=int, required=True)
    e.add_argument("--psi", type=str, required=True)
    e.add_argument("--theta", type=str)
    e.add_argument("--x", type=str, help="point for --what hits")
    e.add_argument("--Q", type=int, help="truncation for --what hits")
    e.add_argument("--Q1", type=int)
    e.add_argument("--Q2", type=int)
    e.add_argument("--j-min", type=int, default=6)
    e.add_argument("--j-max", type=int, default=12)
    e.add_argument("--samples", type=int, default=10**5)
    e.add_argument("--seed", type=int)
    e.add_argument("--emit", type=str)
    return p


# --------------------------------------------------------------------------
# subcommands: each returns (params, results, provenance, csv_header, csv_rows)
# --------------------------------------------------------------------------


def _theta(args, d):
    if args.theta is None:
        return (0.0,) * d
    t = _floats(args.theta)
    if len(t) != d:
        raise DomainError(f"--theta has {len(t)} entries, expected {d}")
    return t


def _cmd_cover(args):
    from .hyperbola_cover import cover_cost, materialize_cover
    cost = parse_dimfn(args.dimfn) if args.dimfn else Fraction(args.s)
    cc = cover_cost(args.N, args.d, cost)
    results = {
        "total_cost": cc.total,
        "cube_count": cc.cube_total,
        "min_side_exponent": max(cc.by_kmax),
        "by_kmax": {str(k): v for k, v in sorted(cc.by_kmax.items())},
        "vectors_by_kmax": {str(k): n for k, n in sorted(cc.vectors_by_kmax.items())},
    }
    rows = []
    if args.materialize:
        cubes = materialize_cover(args.N, args.d, args.cap)
        results["materialized"] = len(cubes)
        rows = [c.center_strings() + [f"2^-{c.k_max}"] for c in cubes]
    header = [f"center_{i + 1}" for i in range(args.d)] + ["side"]
    return results, ["Lemma 2 dyadic cover (max-norm diameters)"], header, rows


def _cmd_cover_scan(args):
    from .hyperbola_cover import cost_scaling_report
    rep = cost_scaling_report(args.d, Fraction(args.s), range(args.N_min, args.N_max + 1))
    results = {
        "slope": rep.slope,
        "expected_slope": rep.s - args.d + 1,
        "ratio_sup": rep.ratio_sup,
        "ratio_inf": rep.ratio_inf,
        "rows": [list(r) for r in rep.rows],
        "profile": [[l, c] for l, c in rep.profile],
    }
    return results, ["Lemma 2 cost bound r^(s-d+1)"], ["N", "cost", "ratio", "slope_so_far"], \
        [list(r) for r in rep.rows]


def _cmd_cost(args):
    from .finecover import doubly_metric_cost_truncated, finecover_cost_truncated
    psi, f = parse_psi(args.psi, args.d), parse_dimfn(args.dimfn)
    if args.mode == "single":
        led = finecover_cost_truncated(psi, f, args.d, _theta(args, args.d), args.Q)
        prov = ["Theorem 3 convergence-case fine cover"]
    else:
        led = doubly_metric_cost_truncated(psi, f, args.d, args.Q)
        prov = ["Theorem 6 convergence-case fine cover, F(x) = x^d f(x)"]
    results = {
        "total": led.total,
        "comparison_total": led.comparison_total,
        "ratio": led.ratio,
        "K_lower": led.K_lower,
        "K_upper": led.K_upper,
        "trend": led.trend,
        "trivial_q": led.trivial_q,
        "collapse_range": list(led.collapse_range) if led.collapse_range else None,
    }
    return results, prov, ["q", "term", "running_total", "comparison_term"], \
        [list(r) for r in led.rows]


def _cmd_verdict(args):
    from .series import verdict
    s = Fraction(args.s) if args.s is not None else None
    psi = parse_psi(args.psi, args.d, s)
    f = parse_dimfn(args.dimfn) if args.dimfn else s
    v = verdict(psi, f, args.d, args.mode, args.m)
    out = v.to_json()
    rows = [[r["name"], r["e"], r["h"], r["h2"], r["classification"]] for r in out["series"]]
    return out, [v.provenance], ["name", "e", "h", "h2", "classification"], rows


def _cmd_estimate(args):
    from . import empirical
    psi = parse_psi(args.psi, args.d)
    theta = _theta(args, args.d)
    if args.what == "hits":
        if args.x is None or args.Q is None:
            raise UsageError("--what hits needs --x and --Q")
        x = _floats(args.x)
        rec = empirical.count_hits(x, theta, psi, args.Q)
        results = {"hits": rec.hits, "count": rec.count, "products": [float(p) for p in rec.products]}
        return results, ["defining inequality, exact rational evaluation"], ["q", "product"], \
            [[q, float(p)] for q, p in zip(rec.hits, rec.products)]
    if args.Q1 is None or args.Q2 is None:
        raise UsageError(f"--what {args.what} needs --Q1 and --Q2")
    if args.what == "tail":
        if args.seed is None:
            raise UsageError("--seed is mandatory for --what tail")
        est = empirical.lebesgue_tail_estimate(psi, theta, args.d, args.Q1, args.Q2,
                                               args.samples, args.seed)
        results = {"estimate": est.estimate, "ci": list(est.ci), "hits": est.hits,
                   "samples": est.samples, "union_bound": est.union_bound, "label": est.label}
        return results, ["first Borel-Cantelli tail (truncated proxy)"], \
            ["estimate", "ci_low", "ci_high", "union_bound"], \
            [[est.estimate, est.ci[0], est.ci[1], est.union_bound]]
    res = empirical.box_dimension_estimate(psi, theta, args.d, args.Q1, args.Q2,
                                           range(args.j_min, args.j_max + 1), args.seed)
    results = {"js": res.js, "counts": res.counts, "dimension": res.dimension, "label": res.label}
    return results, ["box-counting proxy for the dimension formula"], ["j", "resolution", "count"], \
        [[j, 2.0 ** -j, c] for j, c in zip(res.js, res.counts)]


_COMMANDS = {
    "cover": _cmd_cover,
    "cover-scan": _cmd_cover_scan,
    "cost": _cmd_cost,
    "verdict": _cmd_verdict,
    "estimate": _cmd_estimate,
}


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def run(argv: Sequence[str]) -> dict:
    """Parse and execute; returns the RunReport dict (raises on errors)."""
    argv = list(argv)
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise UsageError(build_parser().format_usage().rstrip())
    results, provenance, header, rows = _COMMANDS[args.command](args)
    params = {k: v for k, v in vars(args).items() if k != "command"}
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": "multcover",
        "version": __version__,
        "subcommand": args.command,
        "argv": argv,
        "params": params,
        "seed": params.get("seed"),
        "provenance": provenance,
        "results": results,
    }
    if args.emit:
        with open(args.emit, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        with open(args.emit + ".json", "w") as fh:
            json.dump(report, fh, indent=2, default=_jsonable)
    return report


def dispatch(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        report = run(argv)
    except UsageError as exc:
        print(str(exc), file=stderr)
        return EX_USAGE
    except DomainError as exc:
        print(f"multcover: domain error: {exc}", file=stderr)
        return EX_DOMAIN
    except MultcoverError as exc:
        print(f"multcover: error: {exc}", file=stderr)
        return EX_INTERNAL
    except SystemExit as exc:       # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001
        print(f"multcover: internal error: {type(exc).__name__}: {exc}", file=stderr)
        return EX_INTERNAL
    if report["params"].get("emit"):
        print(f"wrote {report['params']['emit']} and {report['params']['emit']}.json", file=stderr)
    else:
        print(json.dumps(report, indent=2, default=_jsonable), file=stdout)
    return EX_OK


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
