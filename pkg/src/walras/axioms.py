"""Exact decision procedures for the mechanism axioms.

Every check returns an :class:`AxiomReport`; a failing report carries a
witness that :func:`replay_witness` re-verifies from scratch.  Comparisons are
exact unless a tolerance is passed (used for epsilon-mode outcomes).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ._rational import Rat
from .equilibrium import min_walrasian_prices
from .generate import default_pool
from .market import Market
from .matching import best_assignments, lexmin_optimal_assignment
from .mechanisms import Mechanism, MechanismOutcome
from .preferences import NULL, ClassicalPreference

ZERO = Rat(0)
EMPTY = (NULL, ZERO)

AXIOMS = ("SP", "IR", "ETE", "NW", "NS")
ALL_CHECKS = AXIOMS + ("NE", "PE", "DOM")


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    holds: bool
    witness: Optional[dict] = field(default=None, compare=False)
    note: str = ""

    def __post_init__(self):
        if self.holds != (self.witness is None):
            raise ValueError("a report carries a witness exactly when the axiom fails")


@dataclass(frozen=True)
class DeviationPool:
    """Per-agent lists of alternative preferences standing in for the whole domain."""

    per_agent: tuple[tuple[ClassicalPreference, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "per_agent", tuple(tuple(p) for p in self.per_agent))

    @classmethod
    def uniform(cls, prefs: Iterable[ClassicalPreference], n: int) -> "DeviationPool":
        prefs = tuple(prefs)
        return cls(tuple(prefs for _ in range(n)))

    @classmethod
    def default(cls, seed: int, n: int, m: int, size: tuple[int, int] = (12, 8)) -> "DeviationPool":
        return cls.uniform(default_pool(seed, m, *size), n)

    def __getitem__(self, agent: int) -> tuple[ClassicalPreference, ...]:
        return self.per_agent[agent]


def _weakly(pref: ClassicalPreference, a, b, tol: Rat) -> bool:
    return pref.null_equivalent(*a) <= pref.null_equivalent(*b) + tol


def _ok(axiom: str, note: str = "") -> AxiomReport:
    return AxiomReport(axiom, True, None, note)


def _fail(axiom: str, witness: dict) -> AxiomReport:
    return AxiomReport(axiom, False, witness)


def check_strategy_proof(mechanism: Mechanism, market: Market, pool: DeviationPool, tol: Rat = ZERO) -> AxiomReport:
    """No agent gains by reporting any preference from its pool; stops at the first gain."""
    truth = mechanism(market)
    for i, pref in enumerate(market.profile):
        for alt in pool[i]:
            if alt == pref:
                continue
            lie = mechanism(market.with_preference(i, alt))[i]
            if not _weakly(pref, truth[i], lie, tol):
                return _fail("SP", {"agent": i, "deviation": alt, "truthful": truth[i], "deviant": lie})
    return _ok("SP", "pass on pool")


def check_ir(mechanism: Mechanism, market: Market, tol: Rat = ZERO) -> AxiomReport:
    out = mechanism(market)
    for i, pref in enumerate(market.profile):
        if not _weakly(pref, out[i], EMPTY, tol):
            return _fail("IR", {"agent": i, "bundle": out[i]})
    return _ok("IR")


def check_ete(mechanism: Mechanism, market: Market, tol: Rat = ZERO) -> AxiomReport:
    out = mechanism(market)
    prof = market.profile
    for i in range(market.n):
        for j in range(i + 1, market.n):
            if prof[i] != prof[j]:
                continue
            gap = prof[i].null_equivalent(*out[i]) - prof[i].null_equivalent(*out[j])
            if abs(gap) > tol:
                return _fail("ETE", {"agents": (i, j), "bundles": (out[i], out[j])})
    return _ok("ETE")


def check_no_wastage(mechanism: Mechanism, market: Market) -> AxiomReport:
    assigned = set(mechanism(market).allocation)
    for a in market.objects:
        if a not in assigned:
            return _fail("NW", {"object": a})
    return _ok("NW")


def check_no_subsidy(mechanism: Mechanism, market: Market) -> AxiomReport:
    for i, t in enumerate(mechanism(market).transfers):
        if t < 0:
            return _fail("NS", {"agent": i, "transfer": t})
    return _ok("NS")


def check_no_envy(mechanism: Mechanism, market: Market, tol: Rat = ZERO) -> AxiomReport:
    out = mechanism(market)
    for i, pref in enumerate(market.profile):
        for j in range(market.n):
            if j != i and not _weakly(pref, out[i], out[j], tol):
                return _fail("NE", {"agent": i, "envied": j, "bundles": (out[i], out[j])})
    return _ok("NE")


def transfer_capacity(market: Market, outcome: MechanismOutcome) -> tuple[Rat, tuple[int, ...]]:
    """Largest total payment any allocation can collect while keeping every agent indifferent.

    Agent ``i`` paired with object ``a`` pays ``V_i(a, f_i)``; the maximum
    over allocations is found by brute force on small markets and by the
    exact assignment solver otherwise.
    """
    weights = [
        [pref.valuation(a, outcome[i]) for a in range(market.m + 1)]
        for i, pref in enumerate(market.profile)
    ]
    if market.n <= 6 and market.m <= 4:
        best, winners = best_assignments(weights)
        return best, winners[0]
    return lexmin_optimal_assignment(weights)


def check_pareto_efficient(mechanism: Mechanism, market: Market) -> AxiomReport:
    out = mechanism(market)
    best, alloc = transfer_capacity(market, out)
    if best > out.revenue:
        return _fail("PE", {"allocation": alloc, "capacity": best, "revenue": out.revenue})
    return _ok("PE")


def check_domination(mechanism: Mechanism, market: Market, tol: Rat = ZERO) -> AxiomReport:
    """Every agent weakly prefers its bundle to its bundle in the minimum-price equilibrium."""
    out = mechanism(market)
    ref = min_walrasian_prices(market)
    for i, pref in enumerate(market.profile):
        a = ref.allocation[i]
        if not _weakly(pref, out[i], (a, ref.p[a]), tol):
            return _fail("DOM", {"agent": i, "bundle": out[i], "reference": (a, ref.p[a])})
    return _ok("DOM")


def check_all(
    mechanism: Mechanism,
    market: Market,
    pool: DeviationPool,
    axioms: Sequence[str] = AXIOMS,
    tol: Rat = ZERO,
) -> list[AxiomReport]:
    """Run the named checks in order; ``tol`` loosens every preference comparison."""
    table = {
        "SP": lambda: check_strategy_proof(mechanism, market, pool, tol),
        "IR": lambda: check_ir(mechanism, market, tol),
        "ETE": lambda: check_ete(mechanism, market, tol),
        "NW": lambda: check_no_wastage(mechanism, market),
        "NS": lambda: check_no_subsidy(mechanism, market),
        "NE": lambda: check_no_envy(mechanism, market, tol),
        "PE": lambda: check_pareto_efficient(mechanism, market),
        "DOM": lambda: check_domination(mechanism, market, tol),
    }
    unknown = [name for name in axioms if name not in table]
    if unknown:
        raise KeyError(f"unknown checks {unknown}; known: {', '.join(table)}")
    return [table[name]() for name in axioms]


def compare_revenue(first: Mechanism, second: Mechanism, markets: Iterable[Market]) -> dict:
    pairs = [(first(mk).revenue, second(mk).revenue) for mk in markets]
    return {
        "pairs": pairs,
        "first_weakly_higher": all(a >= b for a, b in pairs),
        "second_weakly_higher": all(b >= a for a, b in pairs),
    }


def replay_witness(report: AxiomReport, mechanism: Mechanism, market: Market) -> bool:
    """Recompute the violation described by a failing report; True iff it reproduces."""
    if report.holds:
        return False
    w = report.witness
    out = mechanism(market)
    prof = market.profile
    kind = report.axiom
    if kind == "SP":
        i = w["agent"]
        lie = mechanism(market.with_preference(i, w["deviation"]))[i]
        return lie == w["deviant"] and prof[i].strictly_prefers(lie, out[i])
    if kind == "IR":
        i = w["agent"]
        return prof[i].strictly_prefers(EMPTY, out[i])
    if kind == "ETE":
        i, j = w["agents"]
        return prof[i] == prof[j] and prof[i].null_equivalent(*out[i]) != prof[i].null_equivalent(*out[j])
    if kind == "NW":
        return w["object"] not in out.allocation
    if kind == "NS":
        return out.transfers[w["agent"]] < 0
    if kind == "NE":
        i, j = w["agent"], w["envied"]
        return prof[i].strictly_prefers(out[j], out[i])
    if kind == "PE":
        alloc = w["allocation"]
        total = sum((prof[i].valuation(a, out[i]) for i, a in enumerate(alloc)), ZERO)
        return len(set(a for a in alloc if a)) == len([a for a in alloc if a]) and total > out.revenue
    if kind == "DOM":
        i = w["agent"]
        return prof[i].strictly_prefers(w["reference"], out[i])
    raise ValueError(f"unknown axiom {kind!r}")
