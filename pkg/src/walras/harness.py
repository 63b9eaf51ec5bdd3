"""Scenarios, batch runs, run records and reports.

A scenario fixes a market, the mechanisms to run, a deviation pool, a seed
and a solver mode.  Running it yields a :class:`RunRecord` whose content hash
is reproducible bit for bit in exact mode (timings are kept out of the hash).
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ._rational import Rat, fmt, q
from .axioms import AXIOMS, DeviationPool, check_all
from .equilibrium import DEFAULT_EPSILON, MODES, max_walrasian_prices, min_walrasian_prices, solver_mode
from .generate import generate_market
from .market import Market
from .mechanisms import REGISTRY, get_mechanism
from .prooflab import outline_profile
from .serialize import (
    encode,
    market_from_json,
    market_to_json,
    outcome_to_json,
    pool_from_json,
    pool_to_json,
    prices_to_json,
    report_to_json,
)

# mechanism name -> axiom it is built to violate
DESIGNATED = {
    "max_wep": "SP",
    "mwep_with_fee": "IR",
    "dictator_then_mwep": "ETE",
    "no_sale": "NW",
    "mwep_with_subsidy": "NS",
}
THEOREM1_MECHANISMS = (
    ("mwep", ()),
    ("max_wep", ()),
    ("mwep_with_fee", (("fee", 1),)),
    ("dictator_then_mwep", ()),
    ("no_sale", ()),
    ("mwep_with_subsidy", (("subsidy", 1),)),
)
SHAPES = ((3, 2), (4, 2), (4, 3), (5, 3))
FAMILY_CYCLE = ("mixed", "quasilinear", "piecewise")


@dataclass(frozen=True)
class MechanismSpec:
    name: str
    params: tuple = ()

    def __post_init__(self):
        if self.name not in REGISTRY:
            raise KeyError(f"unknown mechanism {self.name!r}")
        object.__setattr__(self, "params", tuple((str(k), v) for k, v in self.params))

    def build(self):
        return get_mechanism(self.name, **dict(self.params))

    @property
    def key(self) -> str:
        return self.build().display_name


@dataclass(frozen=True)
class Scenario:
    name: str
    market: Market
    mechanisms: tuple[MechanismSpec, ...]
    pool: DeviationPool
    seed: int = 0
    mode: str = "exact"
    axioms: tuple[str, ...] = AXIOMS + ("PE",)

    def __post_init__(self):
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        object.__setattr__(self, "axioms", tuple(self.axioms))
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if len(self.pool.per_agent) != self.market.n:
            raise ValueError("the deviation pool must list alternatives for every agent")


def scenario_to_json(s: Scenario) -> dict:
    return {
        "name": s.name,
        "seed": s.seed,
        "mode": s.mode,
        "axioms": list(s.axioms),
        "mechanisms": [{"name": m.name, "params": {k: encode(v) for k, v in m.params}} for m in s.mechanisms],
        "market": market_to_json(s.market),
        "pool": pool_to_json(s.pool),
    }


def _param(value):
    if isinstance(value, str) and value.lstrip("-").replace("/", "").isdigit():
        return q(value)
    return value


def scenario_from_json(doc: dict) -> Scenario:
    market = market_from_json(doc["market"])
    return Scenario(
        name=doc["name"],
        market=market,
        mechanisms=tuple(
            MechanismSpec(m["name"], tuple((k, _param(v)) for k, v in m.get("params", {}).items()))
            for m in doc["mechanisms"]
        ),
        pool=pool_from_json(doc["pool"], market.n),
        seed=int(doc.get("seed", 0)),
        mode=doc.get("mode", "exact"),
        axioms=tuple(doc.get("axioms", AXIOMS + ("PE",))),
    )


def scenario_hash(s: Scenario) -> str:
    blob = json.dumps(scenario_to_json(s), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunRecord:
    scenario_hash: str
    scenario: str
    seed: int
    mode: str
    equilibrium: dict = field(default_factory=dict)
    outcomes: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def content(self) -> dict:
        return {
            "scenario_hash": self.scenario_hash,
            "scenario": self.scenario,
            "seed": self.seed,
            "mode": self.mode,
            "equilibrium": self.equilibrium,
            "outcomes": self.outcomes,
            "reports": self.reports,
            "errors": self.errors,
        }

    @property
    def record_hash(self) -> str:
        blob = json.dumps(self.content(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_json(self) -> dict:
        doc = self.content()
        doc["record_hash"] = self.record_hash
        doc["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return doc

    def failures(self, mechanism: str) -> list[str]:
        return [r["axiom"] for r in self.reports.get(mechanism, []) if not r["holds"]]


def run_scenario(scenario: Scenario) -> RunRecord:
    """Solve the market, run every mechanism and every check; errors are recorded, not raised."""
    rec = RunRecord(scenario_hash(scenario), scenario.name, scenario.seed, scenario.mode)
    tol = 2 * DEFAULT_EPSILON if scenario.mode == "epsilon" else Rat(0)
    market = scenario.market
    with solver_mode(scenario.mode):
        start = time.perf_counter()
        try:
            lo = min_walrasian_prices(market)
            hi = max_walrasian_prices(market)
            rec.equilibrium = {
                "min": prices_to_json(lo.p),
                "min_allocation": list(lo.allocation),
                "min_route": lo.route,
                "max": prices_to_json(hi.p),
                "max_route": hi.route,
                "certified": lo.certificate.ok and hi.certificate.ok,
                "all_prices_positive": all(x > 0 for x in lo.p.real),
            }
        except Exception as exc:  # recorded for the batch report
            rec.errors.append(f"equilibrium: {type(exc).__name__}: {exc}")
        rec.timings["equilibrium"] = time.perf_counter() - start
        for spec in scenario.mechanisms:
            key = spec.key
            start = time.perf_counter()
            try:
                mech = spec.build()
                rec.outcomes[key] = outcome_to_json(mech(market))
                reports = check_all(mech, market, scenario.pool, scenario.axioms, tol)
                rec.reports[key] = [report_to_json(r) for r in reports]
            except Exception as exc:
                rec.errors.append(f"{key}: {type(exc).__name__}: {exc}")
            rec.timings[key] = time.perf_counter() - start
    return rec


def run_batch(scenarios: Iterable[Scenario]) -> list[RunRecord]:
    return [run_scenario(s) for s in scenarios]


def theorem1_batch(size: int = 100, seed: int = 1000, pool_size: tuple[int, int] = (12, 8)) -> list[Scenario]:
    """Fixed mixed batch: shapes and families cycle; every fifth market gives agents 0 and 1 the same preference."""
    specs = tuple(MechanismSpec(name, params) for name, params in THEOREM1_MECHANISMS)
    out = []
    for k in range(size):
        n, m = SHAPES[k % len(SHAPES)]
        family = FAMILY_CYCLE[k % len(FAMILY_CYCLE)]
        params = {"twins": 2 if k % 5 == 0 else 1}
        market = generate_market(seed + k, n, m, family, params)
        pool = DeviationPool.default(seed + 4000 + k, n, m, pool_size)
        out.append(Scenario(f"theorem1-{k:03d}", market, specs, pool, seed + k))
    return out


def outline_scenarios(values: Sequence = (10, "1/2", "7/3"), seed: int = 7) -> list[Scenario]:
    specs = tuple(MechanismSpec(name, params) for name, params in THEOREM1_MECHANISMS)
    out = []
    for v in values:
        market = outline_profile(v)
        pool = DeviationPool.default(seed, market.n, market.m)
        out.append(Scenario(f"outline-v={fmt(q(v))}", market, specs, pool, seed))
    return out


def theorem1_summary(records: Sequence[RunRecord]) -> dict:
    """Failure counts per mechanism and axiom, plus the verdict for each mechanism."""
    counts: dict = {}
    for rec in records:
        for mech, reports in rec.reports.items():
            row = counts.setdefault(mech, {})
            for r in reports:
                row[r["axiom"]] = row.get(r["axiom"], 0) + (0 if r["holds"] else 1)
    verdict = {}
    for mech, row in counts.items():
        base = mech.split("(")[0]
        target = DESIGNATED.get(base)
        others = [a for a in AXIOMS if a != target and row.get(a, 0)]
        if target is None:
            verdict[mech] = not any(row.get(a, 0) for a in AXIOMS)
        else:
            verdict[mech] = row.get(target, 0) > 0 and not others
    errors = sum(len(r.errors) for r in records)
    return {"failures": counts, "verdict": verdict, "errors": errors, "scenarios": len(records)}


CSV_FIELDS = ("scenario_hash", "scenario", "seed", "mode", "mechanism", "axiom", "holds", "note")


def _rows(records: Sequence[RunRecord]):
    for rec in records:
        for mech, reports in rec.reports.items():
            for r in reports:
                yield {
                    "scenario_hash": rec.scenario_hash,
                    "scenario": rec.scenario,
                    "seed": rec.seed,
                    "mode": rec.mode,
                    "mechanism": mech,
                    "axiom": r["axiom"],
                    "holds": r["holds"],
                    "note": r["note"],
                }


def render_report(records: Sequence[RunRecord], fmt_name: str = "json") -> str:
    if fmt_name == "json":
        return json.dumps({"records": [r.to_json() for r in records]}, indent=2) + "\n"
    if fmt_name == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in _rows(records):
            writer.writerow(row)
        return buf.getvalue()
    if fmt_name == "text":
        lines = []
        for rec in records:
            eqm = rec.equilibrium
            lines.append(f"{rec.scenario} [{rec.scenario_hash[:12]}] mode={rec.mode}")
            if eqm:
                lines.append(f"  p_min={eqm['min']} p_max={eqm['max']}")
            for mech, reports in rec.reports.items():
                failed = [r["axiom"] for r in reports if not r["holds"]]
                lines.append(f"  {mech}: " + ("all checks pass" if not failed else "fails " + ", ".join(failed)))
            for err in rec.errors:
                lines.append(f"  error: {err}")
        return "\n".join(lines) + ("\n" if lines else "")
    raise ValueError(f"unknown report format {fmt_name!r}")


def emit_report(records: Sequence[RunRecord], fmt_name: str = "json", path: Optional[str | Path] = None) -> str:
    """Render the records and, when ``path`` is given, write them there."""
    text = render_report(records, fmt_name)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
