"""Bipartite matching, Hall violators, and exact assignment solvers.

Everything is deterministic: neighbours are tried in the order given, so equal
inputs always yield equal matchings.
"""

from __future__ import annotations

from itertools import permutations
from typing import Hashable, Mapping, Sequence

from ._rational import Rat


def max_matching(adj: Mapping[Hashable, Sequence[Hashable]]) -> dict:
    """Maximum matching of left vertices into right vertices (augmenting paths).

    Returns ``{left: right}``.  Sizes here are tiny, so the simple Kuhn
    algorithm beats Hopcroft-Karp on constant factors.
    """
    owner: dict = {}

    def augment(u, seen: set) -> bool:
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if v not in owner or augment(owner[v], seen):
                owner[v] = u
                return True
        return False

    for u in adj:
        augment(u, set())
    return {u: v for v, u in owner.items()}


def hall_violator(adj: Mapping[Hashable, Sequence[Hashable]], matching: Mapping | None = None):
    """Left set ``X`` with ``|N(X)| < |X|``, or ``None`` when every left vertex is matchable.

    Returns ``(X, N(X))`` found by alternating reachability from an unmatched
    left vertex of a maximum matching.
    """
    if matching is None:
        matching = max_matching(adj)
    free = [u for u in adj if u not in matching]
    if not free:
        return None
    owner = {v: u for u, v in matching.items()}
    left = {free[0]}
    right: set = set()
    stack = [free[0]]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v in right:
                continue
            right.add(v)
            w = owner[v]  # v must be matched, else the matching was not maximum
            if w not in left:
                left.add(w)
                stack.append(w)
    return frozenset(left), frozenset(right)


def surplus_violator(adj: Mapping[Hashable, Sequence[Hashable]]):
    """Nonempty left set ``X`` with ``|N(X)| <= |X|``, or ``None``.

    Every left set has surplus ``|N(X)| >= |X| + 1`` iff for each left vertex
    ``x`` the graph with ``x`` doubled has a left-saturating matching.
    """
    base = max_matching(adj)
    if len(base) < len(adj):
        x, _ = hall_violator(adj, base)
        return x
    for x in adj:
        doubled = dict(adj)
        twin = ("__twin__", x)
        doubled[twin] = adj[x]
        viol = hall_violator(doubled)
        if viol is not None:
            left, _ = viol
            return frozenset(u for u in left if u != twin) | {x}
    return None


def _key(obj: int, m: int) -> int:
    # null object sorts after every real object
    return m + 1 if obj == 0 else obj


def best_assignments(weights: Sequence[Sequence[Rat]]):
    """All unit-demand assignments maximising total weight, brute force.

    ``weights[i][a]`` is agent ``i``'s weight for object ``a`` (column 0 is the
    null object, which any number of agents may share).  Returns
    ``(best_value, [assignments...])`` with assignments as object tuples in
    lexicographic order (real objects before null).
    """
    n = len(weights)
    m = len(weights[0]) - 1
    best = None
    winners: list[tuple[int, ...]] = []
    options = [0] + list(range(1, m + 1))
    current = [0] * n
    used = [False] * (m + 1)

    def rec(i: int, acc: Rat):
        nonlocal best, winners
        if i == n:
            if best is None or acc > best:
                best, winners = acc, [tuple(current)]
            elif acc == best:
                winners.append(tuple(current))
            return
        for a in options:
            if a and used[a]:
                continue
            current[i] = a
            if a:
                used[a] = True
            rec(i + 1, acc + weights[i][a])
            if a:
                used[a] = False

    rec(0, Rat(0))
    winners.sort(key=lambda alloc: [_key(a, m) for a in alloc])
    return best, winners


def hungarian_max(weights: Sequence[Sequence[Rat]]) -> tuple[Rat, tuple[int, ...]]:
    """Exact maximum-weight unit-demand assignment (Kuhn-Munkres with potentials).

    Same input convention as :func:`best_assignments`; the null object is
    expanded into one private copy per agent.  Runs on exact rationals, so no
    rounding is involved.
    """
    n = len(weights)
    m = len(weights[0]) - 1
    cols = m + n
    big = max((abs(w) for row in weights for w in row), default=Rat(0)) + 1

    def cost(i: int, j: int) -> Rat:
        # minimise cost = -weight; null copies j >= m map to column 0
        return -(weights[i][j + 1] if j < m else weights[i][0])

    inf = big * (n + cols + 1) * 4
    u = [Rat(0)] * (n + 1)
    v = [Rat(0)] * (cols + 1)
    p = [0] * (cols + 1)
    way = [0] * (cols + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (cols + 1)
        used = [False] * (cols + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta, j1 = inf, 0
            for j in range(1, cols + 1):
                if used[j]:
                    continue
                cur = cost(i0 - 1, j - 1) - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j], way[j] = cur, j0
                if minv[j] < delta:
                    delta, j1 = minv[j], j
            for j in range(cols + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    alloc = [0] * n
    for j in range(1, cols + 1):
        if p[j]:
            alloc[p[j] - 1] = j if j <= m else 0
    total = sum((weights[i][alloc[i]] for i in range(n)), Rat(0))
    return total, tuple(alloc)


def lexmin_optimal_assignment(weights: Sequence[Sequence[Rat]], brute_force_limit: int = 6):
    """Maximum-weight assignment, ties broken lexicographically (real objects first).

    Brute force for small instances; otherwise fixes agents one at a time while
    checking with :func:`hungarian_max` that the optimum is preserved.
    """
    n = len(weights)
    m = len(weights[0]) - 1
    if n <= brute_force_limit and m <= 4:
        best, winners = best_assignments(weights)
        return best, winners[0]
    best, _ = hungarian_max(weights)
    fixed: list[int] = []
    taken: set[int] = set()
    acc = Rat(0)
    for i in range(n):
        for a in sorted(range(m + 1), key=lambda o: _key(o, m)):
            if a and a in taken:
                continue
            free = [b for b in range(1, m + 1) if b not in taken and b != a]
            sub = [[weights[k][0]] + [weights[k][b] for b in free] for k in range(i + 1, n)]
            rest = hungarian_max(sub)[0] if sub else Rat(0)
            if acc + weights[i][a] + rest == best:
                fixed.append(a)
                acc += weights[i][a]
                if a:
                    taken.add(a)
                break
    return best, tuple(fixed)


def perfect_object_assignments(n: int, m: int):
    """Every injective assignment of all ``m`` objects to ``n`` agents, as object tuples."""
    for agents in permutations(range(n), m):
        alloc = [0] * n
        for obj, i in enumerate(agents, start=1):
            alloc[i] = obj
        yield tuple(alloc)
