"""Command-line front end.

Exit codes: 0 success, 2 parse or input error, 3 conjecture violated on the
input (or a fuzz run found violations), 4 corpus write failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .certificates import certify_cluster_bound
from .czds import alpha_scan, czds_check, power_sequence
from .numeric import parse_rational, precision_cap
from .poly import ParseError, Polynomial, descartes_counts, sturm_count
from .preservers import MultiplierSeq, preset, s_power_search
from .tropical import analyze
from .witnesses import append_corpus, build_counterexample, conjecture_fuzz

EXIT_OK, EXIT_PARSE, EXIT_VIOLATION, EXIT_CORPUS = 0, 2, 3, 4
DEFAULT_CORPUS = "troprules-corpus.jsonl"


class InputError(ValueError):
    pass


def _provenance(args: argparse.Namespace) -> dict:
    return {
        "tool": "troprules",
        "version": __version__,
        "command": args.command,
        "argv": list(args.argv),
        "seed": args.seed,
        "precision_cap_bits": precision_cap(),
        "decimals": "midpoints of certified enclosures, at least 64 bits",
    }


def load_lambda(source: str, d: int) -> MultiplierSeq:
    """A preset name (``dagger``, ``delta``, ``flat``) or a JSON file."""
    if source in ("dagger", "delta", "flat"):
        return preset(source, max(d, 1) if source == "delta" else d)
    path = Path(source)
    if not path.is_file():
        raise InputError(f"unknown lambda {source!r}: not a preset and no such file")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        if isinstance(data, list):
            lam = MultiplierSeq.from_values(parse_rational(str(v)) for v in data)
            lam = MultiplierSeq(lam.log_entries, path.stem)
        else:
            lam = MultiplierSeq.from_json(data)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{source}: {exc}") from exc
    if len(lam) < d + 1:
        raise InputError(f"{source}: sequence has length {len(lam)}, need {d + 1}")
    return lam


def read_polynomial(text: str) -> Polynomial:
    """Inline syntax, or ``@FILE`` holding inline syntax or polynomial JSON."""
    if text.startswith("@"):
        try:
            body = Path(text[1:]).read_text(encoding="utf-8").strip()
        except OSError as exc:
            raise InputError(str(exc)) from exc
        if body.startswith("{"):
            try:
                return Polynomial.from_json(json.loads(body))
            except (ValueError, KeyError, TypeError) as exc:
                raise InputError(f"{text[1:]}: {exc}") from exc
        text = body
    return Polynomial.parse(text)


# -- commands ------------------------------------------------------------------


def cmd_analyze(args) -> tuple[dict, int]:
    t0 = time.perf_counter()
    p = read_polynomial(args.poly)
    if p.is_zero:
        raise InputError("the zero polynomial has no tropicalization")
    pos_bound, neg_bound = descartes_counts(p)
    rc = sturm_count(p)
    distinct = sturm_count(p, "distinct")
    names = args.lam or ["flat"]
    code = EXIT_OK
    tropical = []
    for name in names:
        lam = load_lambda(name, p.degree)
        ta = analyze(p, lam)
        holds = rc.positive <= ta.essential_positive and rc.negative <= ta.essential_negative
        if not holds:
            code = EXIT_VIOLATION
        tropical.append(
            {
                "lambda": name,
                "analysis": ta.to_json(),
                "conjecture": {
                    "positive": f"{rc.positive} <= {ta.essential_positive}",
                    "negative": f"{rc.negative} <= {ta.essential_negative}",
                    "holds": holds,
                },
            }
        )
    report = {
        "input": {"text": args.poly, "polynomial": p.to_json(), "pretty": str(p)},
        "descartes": {"positive": pos_bound, "negative": neg_bound},
        "sturm": rc.to_json(),
        "sturm_distinct": distinct.to_json(),
        "tropical": tropical,
    }
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - t0, 6)
    return report, code


def cmd_fuzz(args) -> tuple[dict, int]:
    results = []
    violations = []
    for d in args.degree:
        lam = load_lambda(args.lam, d)
        res = conjecture_fuzz(d, args.trials, args.seed, lam, args.distribution)
        results.append(res.to_json())
        violations.extend(res.violations)
    report = {"runs": results, "violation_count": len(violations)}
    if violations:
        path = args.corpus or DEFAULT_CORPUS
        try:
            append_corpus(path, violations)
        except OSError as exc:
            report["corpus_error"] = str(exc)
            return report, EXIT_CORPUS
        report["corpus"] = path
        return report, EXIT_VIOLATION
    return report, EXIT_OK


def cmd_counterexample(args) -> tuple[dict, int]:
    lam = load_lambda(args.lam, args.degree)
    t0 = time.perf_counter()
    rec = build_counterexample(args.k, args.degree, lam, args.delta)
    report = {"record": rec.to_json(), "verified": rec.verify()}
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - t0, 3)
    if args.corpus:
        try:
            append_corpus(args.corpus, [rec])
        except OSError as exc:
            report["corpus_error"] = str(exc)
            return report, EXIT_CORPUS
        report["corpus"] = args.corpus
    return report, EXIT_OK


def cmd_preserver_search(args) -> tuple[dict, int]:
    base = load_lambda(args.base, args.degree)
    res = s_power_search(
        base, args.degree, args.trials, args.seed, parse_rational(args.s_max), parse_rational(args.resolution)
    )
    return {"base": args.base, "result": res.to_json()}, EXIT_OK


def cmd_czds(args) -> tuple[dict, int]:
    if args.scan:
        lo, hi, step = (parse_rational(v) for v in args.scan)
        return {"scan": alpha_scan(lo, hi, args.degree, step)}, EXIT_OK
    if args.alpha is None:
        raise InputError("czds needs --alpha or --scan")
    alpha = parse_rational(args.alpha)
    if alpha <= 0:
        raise InputError("alpha must be positive")
    star = load_lambda(args.lambda_star, args.degree)
    cert = czds_check(power_sequence(alpha, args.degree), star, args.degree, args.method)
    return {"certificate": cert.to_json()}, EXIT_OK


def cmd_certify(args) -> tuple[dict, int]:
    p = read_polynomial(args.poly)
    if p.is_zero:
        raise InputError("the zero polynomial has no roots to bound")
    lam = load_lambda(args.lam, p.degree)
    sides = ["positive", "negative"] if args.side == "both" else [args.side]
    reports = [certify_cluster_bound(p, lam, s).to_json() for s in sides]
    return {"input": {"text": args.poly, "polynomial": p.to_json()}, "lambda": args.lam, "reports": reports}, EXIT_OK


# -- text rendering ------------------------------------------------------------


def _render_analyze(r: dict) -> list[str]:
    out = [
        f"polynomial: {r['input']['pretty']}",
        f"descartes bounds: positive <= {r['descartes']['positive']}, negative <= {r['descartes']['negative']}",
        "real roots (with multiplicity): positive {positive}, negative {negative}, zero {zero_multiplicity}".format(**r["sturm"]),
    ]
    for t in r["tropical"]:
        a = t["analysis"]
        c = a["counts"]
        out.append(f"[lambda = {t['lambda']}] tropical indices {a['tropical_indices']}")
        for root in a["roots"]:
            out.append(f"  root xi ~ {root['approx']}  mult {root['mult']}  {root['class']}  indices {root['indices']}")
        out.append(
            f"  essential: positive {c['essential_positive']}, negative {c['essential_negative']}, total {c['essential_total']}"
        )
        j = t["conjecture"]
        out.append(f"  conjecture: positive {j['positive']}, negative {j['negative']} -> {'holds' if j['holds'] else 'VIOLATED'}")
    return out


def _render_fuzz(r: dict) -> list[str]:
    out = []
    for run in r["runs"]:
        dist = ", ".join(f"{k} {v}" for k, v in run["by_distribution"].items())
        out.append(f"degree {run['degree']}: {run['trials']} trials (seed {run['seed']}; {dist}): {len(run['violations'])} violations")
    if "corpus" in r:
        out.append(f"violations appended to {r['corpus']}")
    return out


def _render_counterexample(r: dict) -> list[str]:
    rec = r["record"]
    prov = rec["provenance"]
    rc = rec["real_root_count"]
    ess = rec["essential_counts"]
    return [
        f"P = delta*(x^{prov['d']} + 1) + x^{prov['k']}*R with delta = {prov['delta']}",
        f"real roots: negative {rc['negative']} ({rec['distinct_negative']} distinct), positive {rc['positive']}",
        f"tropical roots: {rec['tropical_root_count']}; essential positive {ess['positive']}, negative {ess['negative']}",
        f"violation: {rec['violation']}; re-verified: {r['verified']}",
    ]


def _render_preserver(r: dict) -> list[str]:
    res = r["result"]
    out = [f"base {r['base']}, degree {res['degree']}, {res['trials']} trials, seed {res['seed']}"]
    out += [f"  s = {s}: {n} violations" for s, n in res["tested"]]
    out.append(f"empirical s* = {res['s_star']}")
    return out


def _render_czds(r: dict) -> list[str]:
    if "scan" in r:
        scan = r["scan"]
        out = ["alpha,status,failed_index,min_gap"]
        for row in scan["rows"]:
            gap = "" if row["min_gap"] is None else f"{row['min_gap']:.12g}"
            idx = "" if row["failed_index"] is None else row["failed_index"]
            out.append(f"{row['alpha']},{row['status']},{idx},{gap}")
        out.append(f"# first certified alpha: {scan['first_certified_alpha']}")
        out.append(f"# {scan['conditional']}")
        return out
    c = r["certificate"]
    out = [f"lam = {c['lam']}, lam_star = {c['lam_star']}, degree {c['degree']}, method {c['method']}: {c['status']}"]
    if c["min_gap"] is not None:
        out.append(f"smallest consecutive root gap ~ {c['min_gap']:.12g} (2 ln 3 ~ 2.19722457734)")
    out.append(c["conditional"])
    return out


def _render_certify(r: dict) -> list[str]:
    out = [f"polynomial: {Polynomial.from_json(r['input']['polynomial'])}, lambda = {r['lambda']}"]
    for rep in r["reports"]:
        out.append(
            f"{rep['side']}: bound {rep['total_bound']} over {len(rep['clusters'])} clusters, "
            f"real roots {rep['real_roots']}, essential {rep['essential_tropical_roots']}, "
            f"{'passed' if rep['passed'] else 'FAILED'}"
        )
        out += [f"  {f}" for f in rep["failures"]]
    return out


COMMANDS = {
    "analyze": (cmd_analyze, _render_analyze),
    "fuzz": (cmd_fuzz, _render_fuzz),
    "counterexample": (cmd_counterexample, _render_counterexample),
    "preserver-search": (cmd_preserver_search, _render_preserver),
    "czds": (cmd_czds, _render_czds),
    "certify": (cmd_certify, _render_certify),
}


# -- argument parsing ----------------------------------------------------------


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # subcommands repeat the flags with SUPPRESS so either position works
    def dflt(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--json", action="store_true", default=dflt(False), help="machine-readable output")
    parser.add_argument("--seed", type=int, default=dflt(0), help="random seed (default 0)")
    parser.add_argument("--precision-cap", type=int, default=dflt(None), help="bit cap for exact comparisons")
    parser.add_argument("--corpus", default=dflt(None), metavar="PATH", help="JSON-lines counterexample corpus")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="troprules", description="Tropical bounds on real-root counts.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="Descartes, Sturm and tropical report for one polynomial")
    p.add_argument("poly", help="inline polynomial such as '1 + x + x^2/4', or @FILE")
    p.add_argument("--lambda", dest="lam", action="append", help="dagger, delta, flat or a JSON file (repeatable)")
    p.add_argument("--timing", action="store_true", help="include wall-clock time")

    p = sub.add_parser("fuzz", parents=[common], help="seeded conjecture fuzzing against Sturm counts")
    p.add_argument("--degree", type=int, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--lambda", dest="lam", default="dagger")
    p.add_argument("--distribution", choices=["dense", "sparse", "double-root"])

    p = sub.add_parser("counterexample", parents=[common], help="explicit witness with more real than essential roots")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--degree", type=int, default=102)
    p.add_argument("--lambda", dest="lam", default="flat")
    p.add_argument("--delta", type=parse_rational, default=None, help="fixed delta instead of the halving search")
    p.add_argument("--timing", action="store_true")

    p = sub.add_parser("preserver-search", parents=[common], help="empirical s for which base^s preserves root counts")
    p.add_argument("--base", default="dagger")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--s-max", default="4096")
    p.add_argument("--resolution", default="1/64")

    p = sub.add_parser("czds", parents=[common], help="conditional certificates for lam_k = exp(-k^alpha)")
    p.add_argument("--alpha")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--method", choices=["separation", "central"], default="separation")
    p.add_argument("--lambda-star", default="dagger")
    p.add_argument("--scan", nargs=3, metavar=("LO", "HI", "STEP"), help="alpha grid; CSV table unless --json")

    p = sub.add_parser("certify", parents=[common], help="cluster and Rolle root-count certificate")
    p.add_argument("poly")
    p.add_argument("--lambda", dest="lam", default="delta")
    p.add_argument("--side", choices=["positive", "negative", "both"], default="both")
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    if args.precision_cap is not None:
        if args.precision_cap < 64:
            parser.error("--precision-cap must be at least 64")
        os.environ["TROPRULES_PRECISION_CAP"] = str(args.precision_cap)
    run, render = COMMANDS[args.command]
    try:
        report, code = run(args)
    except ParseError as exc:
        text = getattr(args, "poly", "")
        print(f"troprules: parse error: {exc}", file=sys.stderr)
        if exc.position is not None and text and not text.startswith("@"):
            print(f"  {text}\n  {' ' * exc.position}^", file=sys.stderr)
        return EXIT_PARSE
    except (InputError, ValueError) as exc:
        print(f"troprules: {exc}", file=sys.stderr)
        return EXIT_PARSE
    report = {"provenance": _provenance(args), **report}
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for line in render(report):
            print(line)
    if code == EXIT_CORPUS:
        print(f"troprules: corpus write failed: {report.get('corpus_error')}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
