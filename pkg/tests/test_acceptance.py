"""One test per acceptance criterion; each prints a single pass/fail line."""

import time
from fractions import Fraction as F

import pytest

from conftest import record_criterion, session_elapsed
from walras import (
    Market,
    PriceVector,
    certify_equilibrium,
    generate_market,
    grid_oracle_min_prices,
    max_walrasian_prices,
    min_walrasian_prices,
    mwep,
    replay_outline,
    vcg_quasilinear,
)
from walras.equilibrium import OracleFailure
from walras.harness import DESIGNATED, run_batch, theorem1_batch, theorem1_summary
from walras.preferences import NULL
from walras.prooflab import (
    compute_v_bar,
    d_threshold,
    d_value,
    enumerate_iric,
    is_iric,
    unassigned_pay_nothing,
    favoring_switch_keeps_bundle,
)

FAMILIES = ("quasilinear", "piecewise", "mixed")
AXIOMS = ("SP", "IR", "ETE", "NW", "NS")
INVARIANTS_OK = {}


def shapes(max_n, max_m):
    return [(n, m) for n in range(3, max_n + 1) for m in range(2, min(max_m, n - 1) + 1)]


def sample_markets(count, seed, max_n, max_m, families=FAMILIES):
    grid = shapes(max_n, max_m)
    return [
        generate_market(seed + k, *grid[k % len(grid)], families[k % len(families)])
        for k in range(count)
    ]


def perturb(p, a, sign):
    return PriceVector(tuple(x + sign if b == a else x for b, x in enumerate(p)))


@pytest.fixture(scope="module")
def batch():
    scenarios = theorem1_batch(100)
    return scenarios, run_batch(scenarios)


def revenue(record, key):
    return F(record.outcomes[key]["revenue"])


# ------------------------------------------------------------------ 1


@pytest.mark.parametrize("v", [F(10), F(1, 2), F(7, 3)])
def test_criterion_1_outline_reproduction(v):
    start = time.perf_counter()
    report = replay_outline(v)
    elapsed = time.perf_counter() - start
    by_name = {step["profile"]: step["prices"] for step in report.steps}
    target = PriceVector.of([v, v])
    passed = report.ok and by_name.get("R") == target and by_name.get("R2") == target and elapsed < 1
    record_criterion(1, f"outline reproduction v={v}", passed, f"{elapsed:.3f}s")
    assert report.ok, report.failures
    assert by_name["R"] == target and by_name["R2"] == target
    assert elapsed < 1


# ------------------------------------------------------------------ 2


def test_criterion_2_prices_strictly_positive():
    bad = []
    for k, market in enumerate(sample_markets(200, 3000, 6, 4)):
        p = min_walrasian_prices(market, "exact").p
        if not all(x > 0 for x in p.real):
            bad.append((k, str(p)))
    record_criterion(2, "minimum prices strictly positive", not bad, f"200 markets, {len(bad)} with a zero price")
    assert not bad


# ------------------------------------------------------------------ 3


def test_criterion_3_certificates():
    slack = F(1, 10**6)
    problems, perturbed = [], 0
    for k, market in enumerate(sample_markets(50, 5000, 5, 3)):
        exact = min_walrasian_prices(market, "exact").p
        if not certify_equilibrium(market, exact).ok:
            problems.append((k, "exact certificate failed"))
        approx = min_walrasian_prices(market, "epsilon").p
        if not certify_equilibrium(market, approx, slack).ok:
            problems.append((k, "epsilon certificate failed"))
        for a in market.objects:
            for sign in (1, -1):
                if sign < 0 and exact[a] < 1:
                    continue  # the perturbed vector would carry a negative price
                moved = perturb(exact, a, sign)
                perturbed += 1
                if certify_equilibrium(market, moved).ok:
                    problems.append((k, f"certificate passed at x{a} {sign:+d}"))
    record_criterion(3, "certificates and perturbations", not problems, f"50 instances, {perturbed} perturbed vectors")
    assert not problems


# ------------------------------------------------------------------ 4

LADDER = (F(1), F(1, 2), F(1, 3), F(1, 4), F(1, 6))


def integer_valued(market):
    return all(p.is_quasilinear and all(v.denominator == 1 for v in p.quasilinear_values()) for p in market.profile)


def test_criterion_4_grid_minimality():
    problems, integral = [], 0
    for k, market in enumerate(sample_markets(30, 2000, 5, 3)):
        exact = min_walrasian_prices(market, "exact").p
        bound = compute_v_bar(market)
        if integer_valued(market):
            integral += 1
            got = grid_oracle_min_prices(market, 1, bound)
            if got != exact:
                problems.append((k, str(got), str(exact)))
            continue
        for step in LADDER:
            try:
                got = grid_oracle_min_prices(market, step, bound)
                break
            except OracleFailure:
                got = None
        if got is None or max(abs(x - y) for x, y in zip(got, exact)) > step:
            problems.append((k, str(got), str(exact)))
    record_criterion(4, "grid oracle minimality", not problems, f"30 instances, {integral} integer-valued")
    assert not problems


# ------------------------------------------------------------------ 5


def test_criterion_5_necessity_suite(batch):
    scenarios, records = batch
    summary = theorem1_summary(records)
    fails = summary["failures"]
    problems = [f"{len(r.errors)} errors in {r.scenario}" for r in records if r.errors]
    if any(fails["mwep"][a] for a in AXIOMS):
        problems.append(f"mwep fails {fails['mwep']}")
    for key, row in fails.items():
        target = DESIGNATED.get(key.split("(")[0])
        if target is None:
            continue
        if not row[target]:
            problems.append(f"{key} never fails {target}")
        problems += [f"{key} fails {a} {row[a]} times" for a in AXIOMS if a != target and row[a]]
    counts = ", ".join(f"{k.split('(')[0]} {DESIGNATED[k.split('(')[0]]}={fails[k][DESIGNATED[k.split('(')[0]]]}" for k in fails if k != "mwep")
    record_criterion(5, "necessity suite", not problems, counts)
    assert len(scenarios) == 100 and all(len(s.pool[0]) == 20 for s in scenarios)
    assert not problems, problems


# ------------------------------------------------------------------ 6


def test_criterion_6_pareto_efficiency(batch):
    scenarios, records = batch
    problems = []
    positive = 0
    for scn, rec in zip(scenarios, records):
        pe = {key: [r for r in reports if r["axiom"] == "PE"][0] for key, reports in rec.reports.items()}
        if not pe["mwep"]["holds"]:
            problems.append(f"mwep inefficient in {scn.name}")
        valuations = [pref.valuation(a, (NULL, 0)) for pref in scn.market.profile for a in scn.market.objects]
        if all(v > 0 for v in valuations):
            positive += 1
            if pe["no_sale"]["holds"]:
                problems.append(f"no_sale efficient in {scn.name}")
    record_criterion(6, "efficiency of mwep, inefficiency of no_sale", not problems, f"{positive} scenarios with positive valuations")
    assert positive > 0 and not problems, problems


# ------------------------------------------------------------------ 7


def test_criterion_7_vcg_coincidence():
    problems = []
    for k, market in enumerate(sample_markets(50, 7000, 5, 3, ("quasilinear",))):
        assert all(p.is_quasilinear for p in market.profile)
        if vcg_quasilinear(market).transfers != mwep(market).transfers:
            problems.append(k)
    record_criterion(7, "vcg coincidence", not problems, f"50 quasilinear markets, {len(problems)} mismatches")
    assert not problems


# ------------------------------------------------------------------ 8


def test_criterion_8_revenue_ordering(batch):
    scenarios, records = batch
    ordering, gaps = [], []
    for scn, rec in zip(scenarios, records):
        top, mid = revenue(rec, "max_wep"), revenue(rec, "mwep")
        if not top >= mid >= 0:
            ordering.append(scn.name)
        gap = mid - revenue(rec, "mwep_with_subsidy(subsidy=1)")
        if gap != scn.market.n:
            gaps.append((scn.name, str(gap), scn.market.n))
    detail = f"ordering violations {len(ordering)}, subsidy gap differs from n on {len(gaps)} of {len(records)}"
    record_criterion(8, "revenue ordering", not ordering and not gaps, detail)
    assert not ordering, ordering
    assert not gaps, gaps[:5]


# ------------------------------------------------------------------ 9


def test_criterion_9_prooflab_invariants():
    problems, sequences = [], 0
    for k in range(30):
        n, m = shapes(5, 3)[k % 5]
        market = generate_market(9000 + k, n, m, FAMILIES[k % 3], {"twins": 2 if k % 4 == 0 else 1})
        v_bar = compute_v_bar(market)
        out = mwep(market)
        p = min_walrasian_prices(market).p
        seeds = {b for b in out.bundles if b[0] != NULL}
        seeds |= {(a, p[a] - 1) for a in market.objects}
        for seed in sorted(seeds):
            for seq in enumerate_iric(market, seed):
                sequences += 1
                if not is_iric(market, seed, seq.agents, seq.objects):
                    problems.append((k, seed, "clauses"))
                d = d_threshold(market, seed, seq)
                if not d > seed[1]:
                    problems.append((k, seed, "threshold not above seed"))
                if is_iric(market, (seed[0], d + 1), seq.agents, seq.objects):
                    problems.append((k, seed, "still IRIC at d+1"))
            if d_value(market, seed, v_bar) > v_bar:
                problems.append((k, seed, "d above V_bar"))
        if not unassigned_pay_nothing(market) or not favoring_switch_keeps_bundle(market):
            problems.append((k, "null bundle or favoring switch"))
    INVARIANTS_OK["passed"] = not problems
    INVARIANTS_OK["detail"] = f"30 seeds, {sequences} sequences"
    assert sequences > 0 and not problems, problems


def test_bundle_invariants_on_the_batch(batch):
    scenarios, _ = batch
    bad = [s.name for s in scenarios if not (unassigned_pay_nothing(s.market) and favoring_switch_keeps_bundle(s.market))]
    INVARIANTS_OK["batch"] = not bad
    assert not bad


@pytest.mark.runs_last
def test_criterion_9_total_runtime():
    elapsed = session_elapsed()
    passed = INVARIANTS_OK.get("passed", False) and INVARIANTS_OK.get("batch", False) and elapsed < 300
    record_criterion(9, "prooflab invariants and runtime", passed, f"{INVARIANTS_OK.get('detail', 'not run')}, session {elapsed:.0f}s")
    assert INVARIANTS_OK.get("passed") and INVARIANTS_OK.get("batch")
    assert elapsed < 300
