"""Command-line interface: ``walras <command> ...``.

Exit codes: 0 success, 1 an axiom or replay check failed, 2 a solver or
certification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from ._rational import q
from .axioms import ALL_CHECKS, AXIOMS, DeviationPool, check_all, compare_revenue
from .equilibrium import ComputationLimit, SolverFailure, max_walrasian_prices, min_walrasian_prices, solver_mode
from .generate import FAMILIES, generate_market
from .harness import outline_scenarios, render_report, run_batch, theorem1_batch, theorem1_summary
from .market import CertificationError
from .mechanisms import REGISTRY, get_mechanism
from .prooflab import d_threshold, enumerate_iric, replay_outline
from .serialize import encode, load_json, market_from_json, market_to_json, outcome_to_json, pool_from_json, report_to_json

OK, VIOLATION, SOLVER_FAILURE = 0, 1, 2


def _emit(doc, args) -> None:
    text = doc if isinstance(doc, str) else json.dumps(doc, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params(items: Optional[Sequence[str]]) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise SystemExit(f"--param expects key=value, got {item!r}")
        out[key] = value if key == "literal" else (int(value) if key == "favored_agent" else q(value))
    if out.get("literal") is not None:
        out["literal"] = str(out["literal"]).lower() in ("1", "true", "yes")
    return out


def _mechanism(args):
    return get_mechanism(args.mechanism, **_params(args.param))


def cmd_solve(args) -> int:
    market = market_from_json(load_json(args.market))
    res = max_walrasian_prices(market) if args.max else min_walrasian_prices(market, args.mode)
    _emit(
        {
            "prices": encode(res.p),
            "allocation": list(res.allocation),
            "certificate": {
                "ok": res.certificate.ok,
                "violating_set": encode(res.certificate.violating_set),
                "violation_kind": res.certificate.violation_kind,
            },
            "mode": res.mode,
            "route": res.route,
            "tolerance": encode(res.tolerance),
        },
        args,
    )
    return OK


def cmd_run(args) -> int:
    market = market_from_json(load_json(args.market))
    with solver_mode(args.mode):
        out = _mechanism(args)(market)
    _emit(outcome_to_json(out), args)
    return OK


def cmd_check(args) -> int:
    market = market_from_json(load_json(args.market))
    if args.pool:
        pool = pool_from_json(load_json(args.pool), market.n)
    else:
        pool = DeviationPool.default(args.seed, market.n, market.m)
    axioms = tuple(args.axioms.split(",")) if args.axioms else AXIOMS
    with solver_mode(args.mode):
        reports = check_all(_mechanism(args), market, pool, axioms)
    _emit([report_to_json(r) for r in reports], args)
    return OK if all(r.holds for r in reports) else VIOLATION


def cmd_compare(args) -> int:
    markets = [market_from_json(load_json(path)) for path in args.market]
    first, second = get_mechanism(args.first), get_mechanism(args.second)
    with solver_mode(args.mode):
        res = compare_revenue(first, second, markets)
    _emit(encode(res), args)
    return OK


def cmd_generate(args) -> int:
    market = generate_market(args.seed, args.n, args.m, args.family, {"twins": args.twins})
    _emit(market_to_json(market), args)
    return OK


def cmd_replay(args) -> int:
    report = replay_outline(q(args.v))
    if args.format == "text":
        lines = [f"outline replay v={report.v}: {'ok' if report.ok else 'FAILED'}"]
        for step in report.steps:
            lines.append(
                f"  {step['profile']}: p={encode(step['prices'])} allocation={list(step['allocation'])} "
                f"demands={step['demands']} certificate={step['certificate']}"
            )
        lines += [f"  failure: {f}" for f in report.failures]
        _emit("\n".join(lines) + "\n", args)
    else:
        ctx = report.context
        _emit(
            {
                "v": encode(report.v),
                "ok": report.ok,
                "steps": encode(report.steps),
                "failures": report.failures,
                "converted_agents": ctx.agents if ctx else [],
                "thresholds": encode(ctx.thresholds) if ctx else [],
            },
            args,
        )
    return OK if report.ok else VIOLATION


def cmd_iric(args) -> int:
    market = market_from_json(load_json(args.market))
    obj, _, t = args.seed_bundle.partition(",")
    seed = (int(obj), q(t))
    seqs = enumerate_iric(market, seed)
    _emit(
        [
            {
                "agents": list(s.agents),
                "objects": list(s.objects),
                "bundles": encode(s.bundles),
                "threshold": encode(d_threshold(market, seed, s)),
            }
            for s in seqs
        ],
        args,
    )
    return OK


def cmd_suite(args) -> int:
    if args.suite == "theorem1":
        scenarios = theorem1_batch(args.size, args.seed)
    else:
        scenarios = outline_scenarios()
    if args.mode == "epsilon":
        from dataclasses import replace

        scenarios = [replace(s, mode="epsilon") for s in scenarios]
    records = run_batch(scenarios)
    if args.format == "json":
        doc = json.loads(render_report(records, "json"))
        doc["summary"] = theorem1_summary(records)
        _emit(doc, args)
    else:
        _emit(render_report(records, args.format), args)
    summary = theorem1_summary(records)
    if summary["errors"]:
        return SOLVER_FAILURE
    return OK if all(summary["verdict"].values()) else VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("exact", "epsilon"), default=None, help="solver mode (default: WALRAS_MODE or exact)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")

    parser = argparse.ArgumentParser(prog="walras", description="Walrasian equilibrium prices and mechanism axioms for unit-demand markets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="minimum (or maximum) equilibrium prices")
    p.add_argument("--market", required=True)
    p.add_argument("--max", action="store_true")
    p.set_defaults(func=cmd_solve)

    for name, func, help_text in (("run", cmd_run, "evaluate a mechanism"), ("check-axioms", cmd_check, "check axioms for a mechanism")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--mechanism", required=True, choices=sorted(REGISTRY))
        p.add_argument("--market", required=True)
        p.add_argument("--param", action="append", help="mechanism parameter key=value (repeatable)")
        if name == "check-axioms":
            p.add_argument("--pool", help="deviation pool file (default: generated from --seed)")
            p.add_argument("--axioms", help=f"comma-separated subset of {','.join(ALL_CHECKS)}")
        p.set_defaults(func=func)

    p = sub.add_parser("compare", parents=[common], help="compare revenues of two mechanisms")
    p.add_argument("--first", required=True, choices=sorted(REGISTRY))
    p.add_argument("--second", required=True, choices=sorted(REGISTRY))
    p.add_argument("--market", required=True, action="append")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("generate", parents=[common], help="write a random market")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--family", choices=FAMILIES, default="mixed")
    p.add_argument("--twins", type=int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("prooflab", help="proof constructions")
    lab = p.add_subparsers(dest="lab", required=True)
    r = lab.add_parser("replay-outline", parents=[common])
    r.add_argument("--v", required=True, help="common valuation, e.g. 10 or 7/3")
    r.set_defaults(func=cmd_replay)
    r = lab.add_parser("iric", parents=[common])
    r.add_argument("--market", required=True)
    r.add_argument("--seed-bundle", "--bundle", dest="seed_bundle", required=True, help="object,transfer e.g. 1,5")
    r.set_defaults(func=cmd_iric)

    p = sub.add_parser("suite", parents=[common], help="run a fixed scenario suite")
    p.add_argument("suite", choices=("theorem1", "outline"))
    p.add_argument("--size", type=int, default=100)
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SolverFailure, ComputationLimit, CertificationError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return SOLVER_FAILURE


if __name__ == "__main__":
    sys.exit(main())
