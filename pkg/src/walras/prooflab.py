"""Executable pieces of the uniqueness argument for the minimum-price rule.

Includes the valuation bound ``V_bar``, individually rational
indifference-connected (IRIC) sequences and their thresholds, the step-by-step
profile conversion that swaps agents to favoring preferences, and a replay of
the three-agent, two-object walkthrough.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ._rational import Rat, RationalLike, q
from .equilibrium import ComputationLimit, min_walrasian_prices
from .market import Market, PriceVector, certify_equilibrium, demands
from .mechanisms import MechanismOutcome, mwep
from .preferences import (
    NULL,
    ClassicalPreference,
    make_favoring,
    make_piecewise,
    make_quasilinear,
    make_step1_preference,
    step1_conditions,
)

ZERO = Rat(0)
EMPTY = (NULL, ZERO)
MAX_IRIC_OBJECTS = 6


def compute_v_bar(market: Market) -> Rat:
    """One more than the largest valuation of any object at ``(0, 0)``."""
    return max(pref.valuation(a, EMPTY) for pref in market.profile for a in market.objects) + 1


@dataclass(frozen=True)
class IricSequence:
    agents: tuple[int, ...]
    objects: tuple[int, ...]
    bundles: tuple[tuple[int, Rat], ...]

    def __len__(self):
        return len(self.agents)


def chain_bundles(market: Market, seed, agents: Sequence[int], objects: Sequence[int]) -> list:
    """Bundles ``z^1..z^k``: each next bundle is indifferent to the previous one for the previous agent."""
    z = (objects[0], q(seed[1]))
    out = [z]
    for j in range(1, len(objects)):
        z = (objects[j], market.profile[agents[j - 1]].valuation(objects[j], z))
        out.append(z)
    return out


def is_iric(market: Market, seed, agents: Sequence[int], objects: Sequence[int]) -> bool:
    """Check the three defining clauses directly."""
    k = len(agents)
    if k == 0 or k != len(objects) or k > market.m:
        return False
    if len(set(agents)) != k or len(set(objects)) != k or NULL in objects:
        return False
    if objects[0] != seed[0]:
        return False
    bundles = chain_bundles(market, seed, agents, objects)
    prof = market.profile
    if bundles[0] != (seed[0], q(seed[1])):
        return False
    if not all(prof[i].strictly_prefers(z, EMPTY) for i, z in zip(agents, bundles)):
        return False
    return all(
        prof[agents[j]].compare(bundles[j], bundles[j + 1]).name == "INDIFFERENT" for j in range(k - 1)
    )


def enumerate_iric(market: Market, seed) -> list[IricSequence]:
    """All IRIC sequences from ``seed`` (every length), in depth-first order."""
    a, t = seed[0], q(seed[1])
    if a == NULL or not 1 <= a <= market.m:
        raise ValueError("an IRIC seed needs a real object")
    if market.m > MAX_IRIC_OBJECTS:
        raise ComputationLimit(f"IRIC enumeration is limited to m <= {MAX_IRIC_OBJECTS}")
    prof = market.profile
    found: list[IricSequence] = []

    def extend(agents: list, objects: list, bundles: list):
        found.append(IricSequence(tuple(agents), tuple(objects), tuple(bundles)))
        if len(agents) == market.m:
            return
        last = prof[agents[-1]]
        for b in market.objects:
            if b in objects:
                continue
            z = (b, last.valuation(b, bundles[-1]))
            for j in range(market.n):
                if j not in agents and prof[j].strictly_prefers(z, EMPTY):
                    extend(agents + [j], objects + [b], bundles + [z])

    z1 = (a, t)
    for i in range(market.n):
        if prof[i].strictly_prefers(z1, EMPTY):
            extend([i], [a], [z1])
    return found


def d_threshold(market: Market, seed, seq: IricSequence) -> Rat:
    """Supremum of seed transfers ``t'`` from which ``seq`` stays IRIC.

    The chain transfers increase with ``t'``.  Clause ``j`` holds iff the
    ``j``-th transfer is below the agent's valuation at ``(0, 0)``;
    pulling each bound back through the chain and taking the minimum gives
    the supremum.  The sequence is IRIC for every ``t' < d`` and not at ``d``.
    """
    if not is_iric(market, seed, seq.agents, seq.objects):
        raise ValueError("sequence is not IRIC from the seed")
    prof = market.profile
    agents, objects = seq.agents, seq.objects
    best = None
    for j in range(len(agents)):
        # the transfer on objects[j] at which agent j becomes indifferent to (0, 0)
        y = prof[agents[j]].maps[objects[j] - 1](ZERO)
        for l in range(j - 1, -1, -1):
            y = prof[agents[l]].valuation(objects[l], (objects[l + 1], y))
        if best is None or y < best:
            best = y
    return best


def d_value(market: Market, z, v_bar: Optional[RationalLike] = None) -> Rat:
    """Smallest threshold over all IRIC sequences from ``z``, or ``V_bar`` when there are none."""
    vb = compute_v_bar(market) if v_bar is None else q(v_bar)
    seqs = enumerate_iric(market, z)
    if not seqs:
        return vb
    return min(d_threshold(market, z, s) for s in seqs)


# ------------------------------------------------------------ conversions


@dataclass
class ProofContext:
    v_bar: Rat
    base_profile: Market
    step_profiles: list = field(default_factory=list)
    agents: list = field(default_factory=list)
    objects: list = field(default_factory=list)
    preferences: list = field(default_factory=list)
    thresholds: list = field(default_factory=list)
    conditions: list = field(default_factory=list)
    bundle_kept: list = field(default_factory=list)
    events: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            not self.events
            and all(all(c.values()) for c in self.conditions)
            and all(self.bundle_kept)
        )


def build_step1_sequence(
    market: Market,
    start_agent: int,
    start_object: Optional[int] = None,
    mechanism: Callable[[Market], MechanismOutcome] = mwep,
) -> ProofContext:
    """Convert agents one at a time to favoring preferences, following the objects cyclically.

    Agent ``k`` holds object ``x_k`` at the current profile and is given a
    preference that favors its current bundle, values ``x_k`` just below the
    IRIC threshold, and values ``x_{k+1}`` above ``V_bar``.  The next agent is
    whoever receives ``x_{k+1}`` afterwards.  Problems (an unassigned object or
    a repeat agent) are recorded as events instead of raised.
    """
    base = mechanism(market)
    held = base.allocation[start_agent]
    if start_object is None:
        start_object = held
    if held != start_object or held == NULL:
        raise ValueError(f"agent {start_agent} does not hold object x{start_object}")
    m = market.m
    order = [(start_object - 1 + k) % m + 1 for k in range(m)]
    ctx = ProofContext(compute_v_bar(market), market, [market], [start_agent], order)
    for k in range(m):
        agent, profile = ctx.agents[k], ctx.step_profiles[k]
        x_k, x_next = order[k], order[(k + 1) % m]
        bundle = mechanism(profile)[agent]
        if bundle[0] != x_k:
            ctx.events.append(f"agent {agent} holds {bundle[0]} instead of x{x_k} before conversion {k + 1}")
            break
        d = d_value(market, bundle, ctx.v_bar)
        pref = make_step1_preference(m, x_k, x_next, bundle, d, ctx.v_bar, label=f"converted{agent}")
        nxt = profile.with_preference(agent, pref)
        ctx.preferences.append(pref)
        ctx.thresholds.append(d)
        ctx.conditions.append(step1_conditions(pref, x_k, x_next, bundle, d, ctx.v_bar))
        ctx.step_profiles.append(nxt)
        outcome = mechanism(nxt)
        ctx.bundle_kept.append(outcome[agent] == bundle)
        if k + 1 == m:
            break
        if x_next not in outcome.allocation:
            ctx.events.append(f"x{x_next} is unassigned after conversion {k + 1}")
            break
        receiver = outcome.allocation.index(x_next)
        if receiver in ctx.agents:
            ctx.events.append(f"x{x_next} went to already converted agent {receiver}")
            break
        ctx.agents.append(receiver)
    return ctx


def unassigned_pay_nothing(market: Market, mechanism: Callable[[Market], MechanismOutcome] = mwep) -> bool:
    """Agents receiving the null object pay nothing."""
    return all(t == 0 for a, t in mechanism(market).bundles if a == NULL)


def favoring_switch_keeps_bundle(market: Market, mechanism: Callable[[Market], MechanismOutcome] = mwep) -> bool:
    """Switching any assigned agent to a preference favoring its bundle leaves that bundle unchanged."""
    out = mechanism(market)
    for i, (a, t) in enumerate(out.bundles):
        if a == NULL:
            continue
        alt = market.with_preference(i, make_favoring(market.m, a, t))
        if mechanism(alt)[i] != (a, t):
            return False
    return True


# ------------------------------------------------------------- walkthrough


def outline_profile(v: RationalLike) -> Market:
    """Three distinct preferences over two objects, each valuing both objects at ``v`` from ``(0, 0)``."""
    v = q(v)
    if v <= 0:
        raise ValueError("v must be positive")
    first = make_quasilinear([v, v], label="flat")
    second = make_piecewise([[(0, v), (v, 3 * v)], [(0, v)]], label="steep-x1")
    third = make_piecewise([[(-v, v / 2), (0, v)], [(0, v), (v, 3 * v / 2)]], label="kinked")
    return Market((first, second, third))


@dataclass
class OutlineReport:
    v: Rat
    steps: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    context: Optional[ProofContext] = None

    @property
    def ok(self) -> bool:
        return not self.failures


def _snapshot(name: str, market: Market) -> dict:
    res = min_walrasian_prices(market)
    cert = certify_equilibrium(market, res.p)
    return {
        "profile": name,
        "prices": res.p,
        "allocation": res.allocation,
        "demands": [sorted(d) for d in demands(market, res.p)],
        "certificate": "ok" if cert.ok else f"{cert.violation_kind} {sorted(cert.violating_set)}",
    }


def replay_outline(v: RationalLike) -> OutlineReport:
    v = q(v)
    report = OutlineReport(v)
    target = PriceVector.of([v, v])
    base = outline_profile(v)

    def expect(name: str, market: Market):
        snap = _snapshot(name, market)
        report.steps.append(snap)
        if snap["prices"] != target:
            report.failures.append(f"minimum prices at {name} are {snap['prices']}, expected {target}")
        return snap

    snap = expect("R", base)
    idle = [i for i, a in enumerate(snap["allocation"]) if a == NULL]
    if len(idle) != 1:
        report.failures.append(f"expected exactly one unassigned agent at R, got {idle}")
        return report
    i3 = idle[0]
    if not all(base.profile[i3].compare((a, v), EMPTY).name == "INDIFFERENT" for a in (1, 2)):
        report.failures.append("the unassigned agent is not indifferent to both priced objects")
    holder = snap["allocation"].index(1)
    ctx = build_step1_sequence(base, holder, 1)
    report.context = ctx
    if not ctx.ok:
        report.failures.append(f"conversion steps failed: {ctx.events or ctx.conditions}")
        return report
    expect("R1", ctx.step_profiles[1])
    second = ctx.step_profiles[2]
    expect("R2", second)
    untouched = [i for i in range(base.n) if i not in ctx.agents]
    if len(untouched) == 1:
        swapped = second.with_preference(ctx.agents[0], base.profile[untouched[0]])
        expect("R''", swapped)
    return report
