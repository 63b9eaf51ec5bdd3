"""Mechanisms: the minimum-price Walrasian rule and the rules that each drop one axiom.

A mechanism maps a market to one ``(object, transfer)`` bundle per agent.
All mechanisms here are deterministic and exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ._rational import Rat, RationalLike, q
from .equilibrium import max_walrasian_prices, min_walrasian_prices
from .market import Market, PriceVector, validate_allocation
from .matching import best_assignments, hungarian_max, lexmin_optimal_assignment
from .preferences import NULL

Bundle = tuple[int, Rat]


class DomainError(ValueError):
    """A mechanism was applied outside the preference domain it is defined on."""


@dataclass(frozen=True)
class MechanismOutcome:
    bundles: tuple[Bundle, ...]
    prices: Optional[PriceVector] = field(default=None, compare=False)

    def __post_init__(self):
        bundles = tuple((int(a), q(t)) for a, t in self.bundles)
        object.__setattr__(self, "bundles", bundles)
        validate_allocation([a for a, _ in bundles], max([a for a, _ in bundles] + [0]))

    @property
    def allocation(self) -> tuple[int, ...]:
        return tuple(a for a, _ in self.bundles)

    @property
    def transfers(self) -> tuple[Rat, ...]:
        return tuple(t for _, t in self.bundles)

    @property
    def revenue(self) -> Rat:
        return sum(self.transfers, Rat(0))

    def __getitem__(self, agent: int) -> Bundle:
        return self.bundles[agent]

    def __len__(self):
        return len(self.bundles)


@dataclass(frozen=True)
class Mechanism:
    name: str
    evaluate: Callable[[Market], MechanismOutcome] = field(compare=False)
    params: tuple = ()

    def __call__(self, market: Market) -> MechanismOutcome:
        return self.evaluate(market)

    @property
    def display_name(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}(" + ", ".join(f"{k}={v}" for k, v in self.params) + ")"


def _priced(allocation, p: PriceVector) -> MechanismOutcome:
    return MechanismOutcome(tuple((a, p[a]) for a in allocation), p)


def mwep(market: Market) -> MechanismOutcome:
    """Minimum Walrasian equilibrium prices with the lexicographic supporting allocation."""
    res = min_walrasian_prices(market)
    return _priced(res.allocation, res.p)


def max_wep(market: Market) -> MechanismOutcome:
    res = max_walrasian_prices(market)
    return _priced(res.allocation, res.p)


def _mwep_after_payment(market: Market, amount: Rat, literal: bool) -> MechanismOutcome:
    # every agent pays ``amount`` up front, then MWEP runs on the post-payment preferences
    if literal:
        base = mwep(market)
    else:
        base = mwep(Market(tuple(pref.after_payment(amount) for pref in market.profile), market.strict))
    return MechanismOutcome(tuple((a, t + amount) for a, t in base.bundles), base.prices)


def mwep_with_fee(market: Market, fee: RationalLike = 1, literal: bool = False) -> MechanismOutcome:
    """MWEP with a participation fee collected from every agent.

    By default agents pay the fee first and MWEP runs on their preferences
    after that payment, which keeps the rule strategy-proof under income
    effects.  ``literal=True`` instead adds the fee to the plain MWEP outcome;
    the two agree on quasilinear markets.
    """
    return _mwep_after_payment(market, q(fee), literal)


def mwep_with_subsidy(market: Market, subsidy: RationalLike = 1, literal: bool = False) -> MechanismOutcome:
    """MWEP with a participation subsidy paid to every agent (a negative fee)."""
    return _mwep_after_payment(market, -q(subsidy), literal)


def dictator_then_mwep(market: Market, favored_agent: int = 0) -> MechanismOutcome:
    """The favored agent takes its best free object; everyone else plays MWEP on what is left."""
    pref = market.profile[favored_agent]
    levels = [(pref.null_equivalent(a, Rat(0)), a) for a in market.objects]
    pick = min(levels)[1]  # ties go to the smaller object index
    rest_objects = [a for a in market.objects if a != pick]
    rest_agents = [i for i in range(market.n) if i != favored_agent]
    sub = Market(tuple(market.profile[i].restrict(rest_objects) for i in rest_agents), strict=False)
    res = min_walrasian_prices(sub)
    bundles: list[Bundle] = [(NULL, Rat(0))] * market.n
    bundles[favored_agent] = (pick, Rat(0))
    for j, i in enumerate(rest_agents):
        a = res.allocation[j]
        bundles[i] = (rest_objects[a - 1] if a else NULL, res.p[a])
    return MechanismOutcome(tuple(bundles))


def no_sale(market: Market) -> MechanismOutcome:
    return MechanismOutcome(tuple((NULL, Rat(0)) for _ in range(market.n)))


def _welfare(weights) -> Rat:
    if not weights:
        return Rat(0)
    n, m = len(weights), len(weights[0]) - 1
    if n <= 6 and m <= 4:
        return best_assignments(weights)[0]
    return hungarian_max(weights)[0]


def vcg_quasilinear(market: Market) -> MechanismOutcome:
    """Welfare-maximising assignment with Clarke pivot payments (quasilinear markets only)."""
    if not all(pref.is_quasilinear for pref in market.profile):
        raise DomainError("VCG is only defined here for quasilinear preferences")
    weights = [[Rat(0)] + list(pref.quasilinear_values()) for pref in market.profile]
    total, alloc = lexmin_optimal_assignment(weights)
    bundles = []
    for i, a in enumerate(alloc):
        others = _welfare(weights[:i] + weights[i + 1 :])
        bundles.append((a, others - (total - weights[i][a])))
    return MechanismOutcome(tuple(bundles))


def _plain(name: str, fn: Callable[[Market], MechanismOutcome]):
    def build(**params) -> Mechanism:
        if params:
            raise TypeError(f"{name} takes no parameters, got {sorted(params)}")
        return Mechanism(name, fn)

    return build


def _participation(name: str, key: str, fn):
    def build(**params) -> Mechanism:
        amount = q(params.pop(key, 1))
        literal = bool(params.pop("literal", False))
        if params:
            raise TypeError(f"unexpected parameters {sorted(params)}")
        if amount <= 0:
            raise ValueError(f"the participation {key} must be positive")
        shown = ((key, amount),) + ((("literal", True),) if literal else ())
        return Mechanism(name, lambda mk: fn(mk, amount, literal), shown)

    return build


def _dictator(**params) -> Mechanism:
    agent = int(params.pop("favored_agent", 0))
    if params:
        raise TypeError(f"unexpected parameters {sorted(params)}")
    return Mechanism("dictator_then_mwep", lambda mk: dictator_then_mwep(mk, agent), (("favored_agent", agent),))


REGISTRY: dict[str, Callable[..., Mechanism]] = {
    "mwep": _plain("mwep", mwep),
    "max_wep": _plain("max_wep", max_wep),
    "mwep_with_fee": _participation("mwep_with_fee", "fee", mwep_with_fee),
    "mwep_with_subsidy": _participation("mwep_with_subsidy", "subsidy", mwep_with_subsidy),
    "dictator_then_mwep": _dictator,
    "no_sale": _plain("no_sale", no_sale),
    "vcg_quasilinear": _plain("vcg_quasilinear", vcg_quasilinear),
}


def get_mechanism(name: str, **params) -> Mechanism:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown mechanism {name!r}; known: {', '.join(sorted(REGISTRY))}") from None
    return factory(**params)
