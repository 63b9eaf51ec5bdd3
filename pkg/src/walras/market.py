"""Markets, price vectors, demand sets, and Walrasian-equilibrium certificates."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ._rational import Rat, RationalLike, q
from .matching import hall_violator, max_matching, surplus_violator
from .preferences import NULL, ClassicalPreference

ObjectAllocation = tuple  # tuple[int, ...], one object per agent


class MarketError(ValueError):
    pass


class CertificationError(RuntimeError):
    """A structure the theory guarantees (e.g. a demand chain) was not found."""


@dataclass(frozen=True)
class Market:
    """``n`` agents with classical preferences over ``m`` real objects, ``n > m``.

    ``strict=False`` relaxes ``m >= 2`` (for subeconomies) but keeps ``n > m``.
    """

    profile: tuple[ClassicalPreference, ...]
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "profile", tuple(self.profile))
        if not self.profile:
            raise MarketError("a market needs agents")
        ms = {pref.m for pref in self.profile}
        if len(ms) != 1:
            raise MarketError("all preferences must cover the same objects")
        n, m = self.n, self.m
        if self.strict and (n < 2 or m < 2):
            raise MarketError(f"need n >= 2 and m >= 2, got n={n}, m={m}")
        if n <= m:
            raise MarketError(f"need more agents than objects, got n={n}, m={m}")

    @property
    def n(self) -> int:
        return len(self.profile)

    @property
    def m(self) -> int:
        return self.profile[0].m

    @property
    def objects(self) -> range:
        return range(1, self.m + 1)

    def with_preference(self, agent: int, pref: ClassicalPreference) -> "Market":
        prof = list(self.profile)
        prof[agent] = pref
        return Market(tuple(prof), self.strict)


@dataclass(frozen=True)
class PriceVector:
    """Nonnegative prices indexed by object, with the null object pinned at 0."""

    values: tuple[Rat, ...]

    def __post_init__(self):
        vals = tuple(q(x) for x in self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) < 2:
            raise MarketError("a price vector covers at least one real object")
        if vals[0] != 0:
            raise MarketError("the null object is always free")
        if any(x < 0 for x in vals):
            raise MarketError("prices must be nonnegative")

    @classmethod
    def of(cls, real: Iterable[RationalLike]) -> "PriceVector":
        return cls((Rat(0),) + tuple(q(x) for x in real))

    @classmethod
    def zeros(cls, m: int) -> "PriceVector":
        return cls((Rat(0),) * (m + 1))

    @property
    def m(self) -> int:
        return len(self.values) - 1

    @property
    def real(self) -> tuple[Rat, ...]:
        return self.values[1:]

    def __getitem__(self, obj: int) -> Rat:
        return self.values[obj]

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def shifted(self, objects: Iterable[int], amount: Rat) -> "PriceVector":
        objs = set(objects)
        return PriceVector(tuple(x + amount if a in objs else x for a, x in enumerate(self.values)))

    def leq(self, other: "PriceVector") -> bool:
        return all(x <= y for x, y in zip(self.values, other.values))

    def __str__(self):
        return "(0; " + ", ".join(str(x) for x in self.real) + ")"


@dataclass(frozen=True)
class Certificate:
    ok: bool
    violating_set: Optional[frozenset] = None
    violation_kind: Optional[str] = None  # "overdemanded" | "weakly-underdemanded" | ...

    def __post_init__(self):
        if self.ok != (self.violating_set is None):
            raise ValueError("a certificate carries a violating set exactly when it fails")


def demand_set(pref: ClassicalPreference, p: PriceVector, tol: Rat = Rat(0)) -> frozenset:
    """Objects whose priced bundle is best for ``pref`` (within ``tol`` null-transfer units)."""
    levels = [Rat(0)] + [f.inverse(x) for f, x in zip(pref.maps, p.real)]
    cut = min(levels) + tol
    return frozenset(a for a, u in enumerate(levels) if u <= cut)


def demands(market: Market, p: PriceVector, tol: Rat = Rat(0)) -> tuple[frozenset, ...]:
    return tuple(demand_set(pref, p, tol) for pref in market.profile)


def _overdemanded_in(dem: Sequence[frozenset], within: frozenset) -> Optional[frozenset]:
    adj = {i: sorted(d) for i, d in enumerate(dem) if NULL not in d and d <= within}
    viol = hall_violator(adj)
    return None if viol is None else viol[1]


def find_overdemanded(market: Market, p: PriceVector, dem: Sequence[frozenset] | None = None) -> Optional[frozenset]:
    """An inclusion-minimal overdemanded set of real objects, or ``None``.

    A Hall violator of the agents-to-objects demand graph is shrunk until no
    proper subset is overdemanded.
    """
    dem = demands(market, p) if dem is None else dem
    found = _overdemanded_in(dem, frozenset(market.objects))
    if found is None:
        return None
    shrinking = True
    while shrinking:
        shrinking = False
        for x in sorted(found):
            smaller = _overdemanded_in(dem, found - {x})
            if smaller is not None:
                found, shrinking = smaller, True
                break
    return found


def find_weakly_underdemanded(market: Market, p: PriceVector, dem: Sequence[frozenset] | None = None) -> Optional[frozenset]:
    """A set of positively priced objects demanded by at most as many agents as it has members."""
    dem = demands(market, p) if dem is None else dem
    adj = {a: [i for i, d in enumerate(dem) if a in d] for a in market.objects if p[a] > 0}
    if not adj:
        return None
    viol = surplus_violator(adj)
    return None if viol is None else frozenset(viol)


def find_underdemanded(market: Market, p: PriceVector, dem: Sequence[frozenset] | None = None) -> Optional[frozenset]:
    """An inclusion-minimal set of positively priced objects with fewer demanders than members."""
    dem = demands(market, p) if dem is None else dem

    def within(objs: frozenset):
        adj = {a: [i for i, d in enumerate(dem) if a in d] for a in sorted(objs)}
        viol = hall_violator(adj)
        return None if viol is None else viol[0]

    found = within(frozenset(a for a in market.objects if p[a] > 0))
    if found is None:
        return None
    shrinking = True
    while shrinking:
        shrinking = False
        for x in sorted(found):
            smaller = within(found - {x})
            if smaller is not None:
                found, shrinking = smaller, True
                break
    return found


def find_weakly_overdemanded(market: Market, p: PriceVector, dem: Sequence[frozenset] | None = None) -> Optional[frozenset]:
    """A nonempty object set ``S`` with at least ``|S|`` agents whose demand lies inside ``S``."""
    dem = demands(market, p) if dem is None else dem
    adj = {i: sorted(d) for i, d in enumerate(dem) if NULL not in d}
    if not adj:
        return None
    agents = surplus_violator(adj)
    if agents is None:
        return None
    return frozenset().union(*(dem[i] for i in agents))


def certify_equilibrium(market: Market, p: PriceVector, tol: Rat = Rat(0)) -> Certificate:
    """Minimum-price certificate: no overdemanded and no weakly underdemanded set.

    A positive ``tol`` widens every demand set by that many null-transfer units,
    which relaxes both conditions (used for epsilon-mode results).
    """
    dem = demands(market, p, tol)
    over = find_overdemanded(market, p, dem)
    if over is not None:
        return Certificate(False, over, "overdemanded")
    under = find_weakly_underdemanded(market, p, dem)
    if under is not None:
        return Certificate(False, under, "weakly-underdemanded")
    return Certificate(True)


def certify_max_equilibrium(market: Market, p: PriceVector) -> Certificate:
    """Maximum-price certificate: an equilibrium price with no weakly overdemanded set."""
    dem = demands(market, p)
    over = find_overdemanded(market, p, dem)
    if over is not None:
        return Certificate(False, over, "overdemanded")
    under = find_underdemanded(market, p, dem)
    if under is not None:
        return Certificate(False, under, "underdemanded")
    wover = find_weakly_overdemanded(market, p, dem)
    if wover is not None:
        return Certificate(False, wover, "weakly-overdemanded")
    return Certificate(True)


def is_equilibrium_price(market: Market, p: PriceVector) -> bool:
    """Whether some object allocation forms a Walrasian equilibrium with ``p``."""
    dem = demands(market, p)
    return find_overdemanded(market, p, dem) is None and find_underdemanded(market, p, dem) is None


def validate_allocation(allocation: Sequence[int], m: int) -> None:
    real = [a for a in allocation if a != NULL]
    if any(not 0 <= a <= m for a in allocation):
        raise MarketError(f"allocation {tuple(allocation)} names unknown objects")
    if len(real) != len(set(real)):
        raise MarketError(f"allocation {tuple(allocation)} assigns an object twice")


def is_walrasian_equilibrium(market: Market, allocation: Sequence[int], p: PriceVector) -> bool:
    validate_allocation(allocation, market.m)
    if len(allocation) != market.n:
        raise MarketError("allocation must name one object per agent")
    if any(a not in demand_set(pref, p) for pref, a in zip(market.profile, allocation)):
        return False
    assigned = set(allocation)
    return all(p[a] == 0 for a in market.objects if a not in assigned)


def demand_connected_sequence(market: Market, allocation: Sequence[int], p: PriceVector, start_agent: int) -> list[int]:
    """Shortest chain of distinct agents from ``start_agent`` to an agent holding the null object.

    Consecutive agents ``i, j`` satisfy ``{a_i, a_j} <= D(R_j, p)``.
    """
    dem = demands(market, p)
    if allocation[start_agent] == NULL:
        return [start_agent]
    parent = {start_agent: None}
    frontier = deque([start_agent])
    while frontier:
        i = frontier.popleft()
        for j in range(market.n):
            if j in parent or not {allocation[i], allocation[j]} <= dem[j]:
                continue
            parent[j] = i
            if allocation[j] == NULL:
                chain = [j]
                while parent[chain[-1]] is not None:
                    chain.append(parent[chain[-1]])
                return chain[::-1]
            frontier.append(j)
    raise CertificationError(f"no demand-connected sequence from agent {start_agent}")


def demand_graph_matching(market: Market, p: PriceVector) -> dict:
    """A maximum matching of non-null-demanding agents to demanded objects."""
    dem = demands(market, p)
    return max_matching({i: sorted(d - {NULL}) for i, d in enumerate(dem)})
