"""Minimum and maximum Walrasian equilibrium prices.

Exact mode runs an ascending auction that raises a minimal overdemanded set
uniformly until some agent's demand changes, then certifies the result.  With
income effects the uniform raise can break ties inside the raised set and
overshoot; when the certificate fails, prices are recomputed by the lattice
solver, which for every full object assignment computes the least supporting
price vector exactly (monotone fixed-point iteration) and keeps the
componentwise minimum.  Maximum prices mirror both routes.

Epsilon mode runs an adaptive-step auction on widened demand sets and certifies
with the same tolerance.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _kernels
from ._rational import Rat, RationalLike, q
from .market import (
    Certificate,
    CertificationError,
    Market,
    PriceVector,
    certify_equilibrium,
    certify_max_equilibrium,
    demands,
    find_overdemanded,
    find_underdemanded,
    find_weakly_underdemanded,
)
from .matching import _key, max_matching, perfect_object_assignments
from .preferences import NULL

DEFAULT_EPSILON = Rat(1, 10**6)
DEFAULT_MAX_ITER = 10**5
ZERO = Rat(0)


class SolverFailure(RuntimeError):
    pass


class ComputationLimit(RuntimeError):
    pass


class OracleFailure(RuntimeError):
    pass


MODES = ("exact", "epsilon")
_mode_override: list[str] = []


def default_mode() -> str:
    """Innermost :func:`solver_mode` setting, else ``WALRAS_MODE``, else exact."""
    if _mode_override:
        return _mode_override[-1]
    mode = os.environ.get("WALRAS_MODE", "exact").strip().lower()
    if mode not in MODES:
        raise ValueError(f"WALRAS_MODE must be 'exact' or 'epsilon', got {mode!r}")
    return mode


@contextmanager
def solver_mode(mode: Optional[str]):
    """Temporarily route mode-less minimum-price calls (e.g. inside mechanisms) to ``mode``."""
    if mode is None:
        yield
        return
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    _mode_override.append(mode)
    try:
        yield
    finally:
        _mode_override.pop()


@dataclass(frozen=True)
class EquilibriumResult:
    p: PriceVector
    allocation: tuple[int, ...]
    certificate: Certificate
    mode: str  # "exact" | "epsilon"
    route: str  # "auction" | "lattice" | "epsilon-auction" | "exact-auction" | "exact-lattice"
    iterations: int = 0
    tolerance: Rat = ZERO


# ---------------------------------------------------------------- auctions


def ascending_auction(market: Market, max_iter: int = DEFAULT_MAX_ITER) -> tuple[PriceVector, int]:
    """Uniform-raise auction from zero prices; returns ``(p, iterations)`` when no set is overdemanded."""
    p = PriceVector.zeros(market.m)
    for it in range(max_iter):
        dem = demands(market, p)
        over = find_overdemanded(market, p, dem)
        if over is None:
            return p, it
        step = None
        for pref, d in zip(market.profile, dem):
            if NULL in d or not d <= over:
                continue
            # level of the best bundle outside the raised set
            outside = min([ZERO] + [pref.maps[b - 1].inverse(p[b]) for b in market.objects if b not in over])
            reach = max(pref.maps[a - 1](outside) - p[a] for a in over)
            if step is None or reach < step:
                step = reach
        p = p.shifted(over, step)
    raise ComputationLimit(f"ascending auction did not stop within {max_iter} rounds")


def descending_auction(market: Market, max_iter: int = DEFAULT_MAX_ITER) -> tuple[PriceVector, int]:
    """Uniform-lowering auction from above every valuation at ``(0, 0)``."""
    zero = (NULL, ZERO)
    top = [max(pref.valuation(a, zero) for pref in market.profile) + 1 for a in market.objects]
    p = PriceVector.of(top)
    for it in range(max_iter):
        dem = demands(market, p)
        under = find_underdemanded(market, p, dem)
        if under is None:
            return p, it
        step = min(p[a] for a in under)
        for pref, d in zip(market.profile, dem):
            if d & under:
                continue
            level = pref.null_equivalent(min(d), p[min(d)])
            reach = min(p[a] - pref.maps[a - 1](level) for a in under)
            if reach < step:
                step = reach
        p = p.shifted(under, -step)
    raise ComputationLimit(f"descending auction did not stop within {max_iter} rounds")


def epsilon_auction(
    market: Market,
    epsilon: Rat = DEFAULT_EPSILON,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[PriceVector, int]:
    """Adaptive-step ascending auction on demand sets widened by ``epsilon``.

    A minimal overdemanded set (for the widened demands) is raised by the
    current step.  A raise that leaves some set weakly underdemanded is an
    overshoot: it is undone and the step halved.  Accepted raises double the
    step, so long climbs stay short.
    """
    zero = (NULL, ZERO)
    step = max(pref.valuation(a, zero) for pref in market.profile for a in market.objects) / 2
    floor = epsilon / (4 * market.m)
    p = PriceVector.zeros(market.m)
    for it in range(max_iter):
        dem = demands(market, p, epsilon)
        over = find_overdemanded(market, p, dem)
        if over is None:
            return p, it
        cand = p.shifted(over, step)
        if find_weakly_underdemanded(market, cand, demands(market, cand, epsilon)) is None:
            p, step = cand, step * 2
        elif step > floor:
            step /= 2
        else:
            raise SolverFailure(f"epsilon auction cannot raise {set(over)} without overshooting")
    raise ComputationLimit(f"epsilon auction did not stop within {max_iter} rounds")


# ---------------------------------------------------------- lattice solver


def _least_supporting(market: Market, alloc: Sequence[int], cap: Optional[list]) -> Optional[list]:
    """Least prices supporting a full assignment, or ``None`` if it cannot be an equilibrium one."""
    prof, m = market.profile, market.m
    owner = {a: i for i, a in enumerate(alloc) if a}
    base = [ZERO] * (m + 1)
    for i, a in enumerate(alloc):
        if a == NULL:
            pref = prof[i]
            for b in range(1, m + 1):
                v = pref.maps[b - 1](ZERO)
                if v > base[b]:
                    base[b] = v
    ceiling = [ZERO] + [prof[owner[a]].maps[a - 1](ZERO) for a in range(1, m + 1)]
    p = list(base)
    for _ in range(m + 2):
        if any(p[a] > ceiling[a] for a in range(1, m + 1)):
            return None
        if cap is not None and any(p[a] > cap[a] for a in range(1, m + 1)):
            return None
        new = list(base)
        for a, i in owner.items():
            pref = prof[i]
            u = pref.maps[a - 1].inverse(p[a])
            for b in range(1, m + 1):
                if b != a:
                    v = pref.maps[b - 1](u)
                    if v > new[b]:
                        new[b] = v
        if new == p:
            return p
        p = new
    return None


def _greatest_supporting(market: Market, alloc: Sequence[int], floor: Optional[list]) -> Optional[list]:
    """Greatest prices supporting a full assignment, or ``None``."""
    prof, m = market.profile, market.m
    owner = {a: i for i, a in enumerate(alloc) if a}
    lower = [ZERO] * (m + 1)
    for i, a in enumerate(alloc):
        if a == NULL:
            for b in range(1, m + 1):
                v = prof[i].maps[b - 1](ZERO)
                if v > lower[b]:
                    lower[b] = v
    top = [ZERO] + [prof[owner[a]].maps[a - 1](ZERO) for a in range(1, m + 1)]
    p = list(top)
    for _ in range(m + 2):
        if any(p[a] < lower[a] for a in range(1, m + 1)):
            return None
        if floor is not None and any(p[a] < floor[a] for a in range(1, m + 1)):
            return None
        new = list(top)
        for a in range(1, m + 1):
            pref = prof[owner[a]]
            f = pref.maps[a - 1]
            for b in range(1, m + 1):
                if b != a:
                    v = f(pref.maps[b - 1].inverse(p[b]))
                    if v < new[a]:
                        new[a] = v
        if new == p:
            return p
        p = new
    return None


def lattice_min_prices(market: Market) -> Optional[PriceVector]:
    best: Optional[list] = None
    for alloc in perfect_object_assignments(market.n, market.m):
        cand = _least_supporting(market, alloc, best)
        if cand is not None:
            best = cand if best is None else [min(x, y) for x, y in zip(best, cand)]
    return None if best is None else PriceVector(tuple(best))


def lattice_max_prices(market: Market) -> Optional[PriceVector]:
    best: Optional[list] = None
    for alloc in perfect_object_assignments(market.n, market.m):
        cand = _greatest_supporting(market, alloc, best)
        if cand is not None:
            best = cand if best is None else [max(x, y) for x, y in zip(best, cand)]
    return None if best is None else PriceVector(tuple(best))


# ------------------------------------------------------ allocation choice


def _completable(dem: Sequence[frozenset], start: int, taken: set, positive: Sequence[int]) -> bool:
    rest = range(start, len(dem))
    adj = {j: [a for a in sorted(dem[j]) if a not in taken] for j in rest if NULL not in dem[j]}
    if len(max_matching(adj)) < len(adj):
        return False
    need = {a: [j for j in rest if a in dem[j]] for a in positive if a not in taken}
    return len(max_matching(need)) == len(need)


def supporting_allocations(market: Market, p: PriceVector) -> Iterator[tuple[int, ...]]:
    """All object allocations forming a Walrasian equilibrium with ``p``, lexicographically.

    Real objects order before the null object for every agent.
    """
    dem = demands(market, p)
    positive = [a for a in market.objects if p[a] > 0]
    n, m = market.n, market.m
    current: list[int] = []
    taken: set[int] = set()

    def rec(i: int):
        if i == n:
            yield tuple(current)
            return
        for a in sorted(dem[i], key=lambda o: _key(o, m)):
            if a and a in taken:
                continue
            current.append(a)
            if a:
                taken.add(a)
            if _completable(dem, i + 1, taken, positive):
                yield from rec(i + 1)
            current.pop()
            taken.discard(a)

    if _completable(dem, 0, taken, positive):
        yield from rec(0)


def select_zmin_allocation(market: Market, p_min: PriceVector) -> tuple[int, ...]:
    """Lexicographically smallest supporting allocation (agent order, real objects before null)."""
    for alloc in supporting_allocations(market, p_min):
        return alloc
    raise CertificationError(f"no allocation supports {p_min}")


# ----------------------------------------------------------- entry points


def _route_budget(market: Market) -> int:
    # successful auction runs stay far below this; stalled ones fall back early
    return 4 * market.n * (market.m + 1) + 16


def _exact_min(market: Market) -> EquilibriumResult:
    iterations = 0
    try:
        p, iterations = ascending_auction(market, max_iter=_route_budget(market))
        cert = certify_equilibrium(market, p)
        route = "auction"
    except ComputationLimit:
        cert = Certificate(False, frozenset(), "iteration-cap")
    if not cert.ok:
        p = lattice_min_prices(market)
        if p is None:
            raise SolverFailure("no candidate minimum price vector found")
        cert = certify_equilibrium(market, p)
        route = "lattice"
        if not cert.ok:
            raise SolverFailure(f"minimum price certificate failed: {cert.violation_kind} {set(cert.violating_set)}")
    return EquilibriumResult(p, select_zmin_allocation(market, p), cert, "exact", route, iterations)


def _exact_max(market: Market) -> EquilibriumResult:
    iterations = 0
    try:
        p, iterations = descending_auction(market, max_iter=_route_budget(market))
        cert = certify_max_equilibrium(market, p)
        route = "auction"
    except ComputationLimit:
        cert = Certificate(False, frozenset(), "iteration-cap")
    if not cert.ok:
        p = lattice_max_prices(market)
        if p is None:
            raise SolverFailure("no candidate maximum price vector found")
        cert = certify_max_equilibrium(market, p)
        route = "lattice"
        if not cert.ok:
            raise SolverFailure(f"maximum price certificate failed: {cert.violation_kind} {set(cert.violating_set)}")
    return EquilibriumResult(p, select_zmin_allocation(market, p), cert, "exact", route, iterations)


def _epsilon_budget(market: Market) -> int:
    # finished runs need a few hundred rounds; oscillating ones are cut off here
    return min(DEFAULT_MAX_ITER, 200 * market.n * (market.m + 1))


def _epsilon_min(market: Market, epsilon: Rat) -> EquilibriumResult:
    """Epsilon auction on demands widened by ``epsilon / 4m``, certified at ``epsilon``.

    The narrower widening keeps the result within ``epsilon`` of the minimum.
    When the auction stalls (common under income effects) the exact route
    answers instead and ``route`` says so.
    """
    width = epsilon / (4 * market.m)
    try:
        p, iterations = epsilon_auction(market, width, _epsilon_budget(market))
        cert = certify_equilibrium(market, p, epsilon)
    except (SolverFailure, ComputationLimit):
        cert = None
    if cert is None or not cert.ok:
        exact = _exact_min(market)
        return EquilibriumResult(
            exact.p, exact.allocation, exact.certificate, "epsilon", f"exact-{exact.route}", exact.iterations, epsilon
        )
    alloc = _epsilon_allocation(market, p, epsilon)
    return EquilibriumResult(p, alloc, cert, "epsilon", "epsilon-auction", iterations, epsilon)


@lru_cache(maxsize=8192)
def _solve(market: Market, which: str, mode: str, epsilon: Rat) -> EquilibriumResult:
    if mode == "exact" or which == "max":
        return _exact_min(market) if which == "min" else _exact_max(market)
    return _epsilon_min(market, epsilon)


def _epsilon_allocation(market: Market, p: PriceVector, epsilon: Rat) -> tuple[int, ...]:
    dem = demands(market, p, epsilon)
    positive = [a for a in market.objects if p[a] > 0]
    n, m = market.n, market.m
    alloc: list[int] = []
    taken: set[int] = set()
    for i in range(n):
        for a in sorted(dem[i], key=lambda o: _key(o, m)):
            if a and a in taken:
                continue
            if a:
                taken.add(a)
            if _completable(dem, i + 1, taken, positive):
                alloc.append(a)
                break
            taken.discard(a)
        else:
            raise SolverFailure("no allocation supports the epsilon-mode prices")
    return tuple(alloc)


def min_walrasian_prices(market: Market, mode: Optional[str] = None, epsilon: RationalLike = DEFAULT_EPSILON) -> EquilibriumResult:
    return _solve(market, "min", mode or default_mode(), q(epsilon))


def max_walrasian_prices(market: Market) -> EquilibriumResult:
    """Maximum prices; always solved exactly (the descending auction and lattice need no tolerance)."""
    return _solve(market, "max", "exact", DEFAULT_EPSILON)


# ------------------------------------------------------------ grid oracle


def _scaled_levels(market: Market, grid: Sequence[Rat]) -> np.ndarray:
    """Null-equivalent levels on the grid, as int64 over a common denominator when they fit."""
    raw = [[[pref.maps[a].inverse(g) for g in grid] for a in range(market.m)] for pref in market.profile]
    flat = [x for plane in raw for row in plane for x in row]
    denom = math.lcm(*(int(x.denominator) for x in flat))
    scaled = [int(x.numerator) * (denom // int(x.denominator)) for x in flat]
    shape = (market.n, market.m, len(grid))
    if max(abs(v) for v in scaled) < 2**62:
        return np.array(scaled, dtype=np.int64).reshape(shape)
    return np.array(scaled, dtype=object).reshape(shape)


def grid_flags(market: Market, grid_step: RationalLike, bound: RationalLike) -> tuple[list[Rat], np.ndarray]:
    """Condition bits at every grid price vector ``{0, step, ..., bound}^m``."""
    step, top = q(grid_step), q(bound)
    if step <= 0:
        raise ValueError("grid step must be positive")
    size = int(top // step) + 1
    if size ** market.m > 10_000_000:
        raise OracleFailure(f"grid of {size}^{market.m} points is too large")
    grid = [step * k for k in range(size)]
    return grid, _kernels.grid_flags(_scaled_levels(market, grid), size)


def _grid_points(grid: Sequence[Rat], m: int, hits: np.ndarray) -> np.ndarray:
    size = len(grid)
    return np.array(np.unravel_index(hits, (size,) * m)).T.reshape(-1, m)


def grid_oracle_min_prices(market: Market, grid_step: RationalLike, bound: RationalLike) -> PriceVector:
    """Componentwise-minimal grid point passing the minimum-price certificate."""
    grid, flags = grid_flags(market, grid_step, bound)
    want = _kernels.NO_OVER | _kernels.NO_WEAK_UNDER
    hits = np.flatnonzero((flags & want) == want)
    if hits.size == 0:
        raise OracleFailure("no grid point is certified; the grid is too coarse or too small")
    pts = _grid_points(grid, market.m, hits)
    low = pts.min(axis=0)
    if not (pts == low).all(axis=1).any():
        raise OracleFailure("certified grid points have no componentwise minimum")
    return PriceVector.of(grid[k] for k in low)


def grid_oracle_max_prices(market: Market, grid_step: RationalLike, bound: RationalLike) -> PriceVector:
    """Componentwise-maximal grid point supporting a Walrasian equilibrium."""
    grid, flags = grid_flags(market, grid_step, bound)
    want = _kernels.NO_OVER | _kernels.NO_UNDER
    hits = np.flatnonzero((flags & want) == want)
    if hits.size == 0:
        raise OracleFailure("no equilibrium grid point")
    pts = _grid_points(grid, market.m, hits)
    high = pts.max(axis=0)
    if not (pts == high).all(axis=1).any():
        raise OracleFailure("equilibrium grid points have no componentwise maximum")
    return PriceVector.of(grid[k] for k in high)


def grid_equilibrium_prices(market: Market, grid_step: RationalLike, bound: RationalLike) -> list[PriceVector]:
    grid, flags = grid_flags(market, grid_step, bound)
    want = _kernels.NO_OVER | _kernels.NO_UNDER
    pts = _grid_points(grid, market.m, np.flatnonzero((flags & want) == want))
    return [PriceVector.of(grid[k] for k in row) for row in pts]
