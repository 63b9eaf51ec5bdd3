"""Classical preferences over (object, payment) bundles.

A preference is stored through its indifference maps: for every real object
``a`` an increasing bijection ``V_a`` sending a null transfer ``t0`` to the
payment on ``a`` that the agent finds exactly as good as ``(0, t0)``.  Each map
is piecewise linear with rational breakpoints and unit-slope tails, so every
query below is answered exactly.

Bundles are ``(object, transfer)`` pairs; object ``0`` is the null object and
real objects are ``1..m``.  A bundle's *null equivalent* is the null transfer
it is indifferent to; smaller null equivalents are better.
"""

from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ._rational import Rat, RationalLike, q

Bundle = tuple  # (object, Rat)

NULL = 0
ONE = Rat(1)


class PreferenceError(ValueError):
    """Raised when a preference would violate a classical-preference axiom."""


class Comparison(enum.Enum):
    PREFERRED = "strict-preference"
    INDIFFERENT = "indifference"
    REVERSE = "reverse"


def _canonical(xs: list[Rat], ys: list[Rat]) -> tuple[tuple, tuple]:
    # drop interior breakpoints lying on a straight segment
    i = 1
    while i < len(xs) - 1:
        if (ys[i] - ys[i - 1]) * (xs[i + 1] - xs[i]) == (ys[i + 1] - ys[i]) * (xs[i] - xs[i - 1]):
            del xs[i], ys[i]
        else:
            i += 1
    # drop end breakpoints that continue a unit-slope tail
    while len(xs) > 1 and ys[1] - ys[0] == xs[1] - xs[0]:
        del xs[0], ys[0]
    while len(xs) > 1 and ys[-1] - ys[-2] == xs[-1] - xs[-2]:
        del xs[-1], ys[-1]
    if len(xs) == 1:
        ys[0] -= xs[0]
        xs[0] = Rat(0)
    return tuple(xs), tuple(ys)


class IndifferenceMap:
    """Increasing piecewise-linear bijection ``V_a`` with unit-slope tails."""

    __slots__ = ("xs", "ys", "_slopes", "_hash")

    def __init__(self, points: Iterable[tuple[RationalLike, RationalLike]]):
        pts = sorted((q(x), q(y)) for x, y in points)
        if not pts:
            raise PreferenceError("an indifference map needs at least one breakpoint")
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        for k in range(1, len(xs)):
            if xs[k] == xs[k - 1]:
                raise PreferenceError(f"duplicate breakpoint at t0={xs[k]}")
            if ys[k] <= ys[k - 1]:
                raise PreferenceError("indifference map must be strictly increasing")
        for x, y in zip(xs, ys):
            # unit tails keep V(t0) - t0 constant outside, affine pieces inside
            if y <= x:
                raise PreferenceError(f"desirability fails at t0={x}: V={y} <= t0")
        self.xs, self.ys = _canonical(xs, ys)
        self._slopes = tuple(
            (self.ys[k + 1] - self.ys[k]) / (self.xs[k + 1] - self.xs[k])
            for k in range(len(self.xs) - 1)
        )
        self._hash = hash((self.xs, self.ys))

    @classmethod
    def translation(cls, value: RationalLike) -> "IndifferenceMap":
        return cls([(0, value)])

    @property
    def breakpoints(self) -> tuple[tuple[Rat, Rat], ...]:
        return tuple(zip(self.xs, self.ys))

    @property
    def is_translation(self) -> bool:
        return len(self.xs) == 1

    def __call__(self, t0: Rat) -> Rat:
        xs, ys = self.xs, self.ys
        if t0 <= xs[0]:
            return t0 + (ys[0] - xs[0])
        if t0 >= xs[-1]:
            return t0 + (ys[-1] - xs[-1])
        k = bisect_right(xs, t0) - 1
        return ys[k] + self._slopes[k] * (t0 - xs[k])

    def inverse(self, t: Rat) -> Rat:
        xs, ys = self.xs, self.ys
        if t <= ys[0]:
            return t - (ys[0] - xs[0])
        if t >= ys[-1]:
            return t - (ys[-1] - xs[-1])
        k = bisect_right(ys, t) - 1
        return xs[k] + (t - ys[k]) / self._slopes[k]

    def __eq__(self, other):
        if not isinstance(other, IndifferenceMap):
            return NotImplemented
        return self.xs == other.xs and self.ys == other.ys

    def __hash__(self):
        return self._hash

    def __repr__(self):
        inner = ", ".join(f"({x}, {y})" for x, y in self.breakpoints)
        return f"IndifferenceMap([{inner}])"


@dataclass(frozen=True)
class ClassicalPreference:
    """A classical preference given by one indifference map per real object.

    Equality is structural on the canonical maps; ``label`` is informational.
    """

    maps: tuple[IndifferenceMap, ...]
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.maps:
            raise PreferenceError("a preference needs at least one real object")

    @property
    def m(self) -> int:
        return len(self.maps)

    def null_equivalent(self, obj: int, t: Rat) -> Rat:
        if obj == NULL:
            return t
        return self.maps[obj - 1].inverse(t)

    def valuation(self, target: int, bundle: Bundle) -> Rat:
        """V(target, bundle): the payment on ``target`` indifferent to ``bundle``."""
        obj, t = bundle
        if obj == target:
            return t
        u = self.null_equivalent(obj, t)
        return u if target == NULL else self.maps[target - 1](u)

    def compare(self, a: Bundle, b: Bundle) -> Comparison:
        ua = self.null_equivalent(a[0], a[1])
        ub = self.null_equivalent(b[0], b[1])
        if ua < ub:
            return Comparison.PREFERRED
        if ua == ub:
            return Comparison.INDIFFERENT
        return Comparison.REVERSE

    def weakly_prefers(self, a: Bundle, b: Bundle) -> bool:
        return self.null_equivalent(a[0], a[1]) <= self.null_equivalent(b[0], b[1])

    def strictly_prefers(self, a: Bundle, b: Bundle) -> bool:
        return self.null_equivalent(a[0], a[1]) < self.null_equivalent(b[0], b[1])

    def indifference_vector(self, u: RationalLike) -> tuple[Rat, ...]:
        """Payments ``(u, V_1(u), ..., V_m(u))``: all mutually indifferent."""
        u = q(u)
        return (u,) + tuple(f(u) for f in self.maps)

    @property
    def is_quasilinear(self) -> bool:
        return all(f.is_translation for f in self.maps)

    def quasilinear_values(self) -> tuple[Rat, ...]:
        if not self.is_quasilinear:
            raise PreferenceError("preference has income effects")
        return tuple(f.ys[0] for f in self.maps)

    def restrict(self, objects: Sequence[int]) -> "ClassicalPreference":
        """The preference over the listed real objects, renumbered ``1..len``."""
        return ClassicalPreference(tuple(self.maps[a - 1] for a in objects), self.label)

    def with_label(self, label: str) -> "ClassicalPreference":
        return ClassicalPreference(self.maps, label)

    def after_payment(self, amount: RationalLike) -> "ClassicalPreference":
        """The preference of this agent once it has already paid ``amount``.

        ``(a, t)`` is ranked like ``(a, t + amount)`` was; with quasilinear
        preferences nothing changes.
        """
        c = q(amount)
        if c == 0:
            return self
        maps = tuple(IndifferenceMap([(x - c, y - c) for x, y in f.breakpoints]) for f in self.maps)
        return ClassicalPreference(maps, self.label)


def valuation_at(pref: ClassicalPreference, target: int, anchor: Bundle) -> Rat:
    return pref.valuation(target, (anchor[0], q(anchor[1])))


def compare(pref: ClassicalPreference, a: Bundle, b: Bundle) -> Comparison:
    return pref.compare((a[0], q(a[1])), (b[0], q(b[1])))


def invariant_violations(pref: ClassicalPreference) -> list[str]:
    """Re-check the classical axioms from the raw breakpoints; empty when valid."""
    problems = []
    for a, f in enumerate(pref.maps, start=1):
        pts = f.breakpoints
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if not (x1 > x0 and y1 > y0):
                problems.append(f"x{a}: map not strictly increasing between t0={x0} and t0={x1}")
        for x, y in pts:
            if y <= x:
                problems.append(f"x{a}: desirability fails at t0={x}")
        for t in (f.xs[0] - 1, f.xs[-1] + 1):
            if f(t) <= t:
                problems.append(f"x{a}: desirability fails on a tail at t0={t}")
            if f.inverse(f(t)) != t:
                problems.append(f"x{a}: map is not invertible at t0={t}")
    return problems


def make_quasilinear(values: Sequence[RationalLike] | Mapping[int, RationalLike], label: str = "") -> ClassicalPreference:
    """Quasilinear preference with object values ``v`` (``V_a(t0) = t0 + v_a``)."""
    if isinstance(values, Mapping):
        vals = [values[a] for a in sorted(values)]
    else:
        vals = list(values)
    maps = []
    for a, v in enumerate(vals, start=1):
        v = q(v)
        if v <= 0:
            raise PreferenceError(f"object x{a} must have a positive value, got {v}")
        maps.append(IndifferenceMap.translation(v))
    return ClassicalPreference(tuple(maps), label)


def make_piecewise(breakpoints: Sequence[Iterable[tuple[RationalLike, RationalLike]]], label: str = "") -> ClassicalPreference:
    return ClassicalPreference(tuple(IndifferenceMap(pts) for pts in breakpoints), label)


def is_favoring(pref: ClassicalPreference, bundle: Bundle) -> bool:
    """Whether ``pref`` demands exactly ``{a}`` when ``a`` costs ``t`` and all else is free."""
    a, t = bundle
    u = pref.null_equivalent(a, q(t))
    return u < 0 and all(pref.maps[b - 1].inverse(Rat(0)) > u for b in range(1, pref.m + 1) if b != a)


def make_favoring(
    m: int,
    target: int,
    threshold: RationalLike,
    others: Mapping[int, RationalLike] | None = None,
    slack: RationalLike = 1,
) -> ClassicalPreference:
    """An ``(target, threshold)``-favoring quasilinear preference.

    Objects other than ``target`` get the values in ``others`` (default: the
    slack); ``target`` is valued at ``threshold + slack + max(others)``, which
    makes ``V(b, (target, threshold)) = v_b - max(others) - slack < 0``.
    """
    t, sigma = q(threshold), q(slack)
    if not 1 <= target <= m:
        raise PreferenceError(f"target x{target} is not a real object")
    if t < 0:
        raise PreferenceError("favoring threshold must be nonnegative")
    if sigma <= 0:
        raise PreferenceError("slack must be positive")
    other_vals = {b: q(others[b]) if others and b in others else sigma for b in range(1, m + 1) if b != target}
    if any(v <= 0 for v in other_vals.values()):
        raise PreferenceError("margins for non-target objects must be positive")
    values = dict(other_vals)
    values[target] = t + sigma + max(other_vals.values())
    pref = make_quasilinear(values, label=f"favoring(x{target},{t})")
    assert is_favoring(pref, (target, t))
    return pref


def step1_conditions(
    pref: ClassicalPreference,
    x_k: int,
    x_next: int,
    favored_bundle: Bundle,
    d_threshold: Rat,
    v_bar: Rat,
) -> dict[str, bool]:
    """Evaluate the three conditions a converted agent's preference must meet."""
    zero = (NULL, Rat(0))
    others = [a for a in range(1, pref.m + 1) if a not in (x_k, x_next)]
    return {
        "favoring": is_favoring(pref, favored_bundle),
        "low_on_current": pref.valuation(x_k, zero) < d_threshold,
        "high_on_next": pref.valuation(x_next, zero) > v_bar,
        "bounded_elsewhere": all(pref.valuation(a, zero) < v_bar for a in others),
        "next_beats_others": all(pref.valuation(x_next, (a, Rat(0))) > v_bar for a in others),
    }


def make_step1_preference(
    m: int,
    x_k: int,
    x_next: int,
    favored_bundle: Bundle,
    d_threshold: RationalLike,
    v_bar: RationalLike,
    label: str = "",
) -> ClassicalPreference:
    """Preference used to convert one agent in the step-by-step profile change.

    With ``t`` the favored transfer and ``e = min(1, d - t) / 2`` it uses
    ``V_{x_k}(u) = u + t + e`` (so the favored bundle sits at level ``-e``),
    translations ``u + e/2`` for the remaining objects, and a two-breakpoint map
    for ``x_next`` that is negative at level ``-e`` but exceeds ``v_bar`` from
    level ``-e/2`` on.
    """
    a, t = favored_bundle[0], q(favored_bundle[1])
    d, vb = q(d_threshold), q(v_bar)
    if a != x_k:
        raise PreferenceError("the favored bundle must be on the current object")
    if x_k == x_next or not (1 <= x_k <= m and 1 <= x_next <= m):
        raise PreferenceError("current and next objects must be distinct real objects")
    if t < 0:
        raise PreferenceError("favored transfer must be nonnegative")
    if d <= t:
        raise PreferenceError(f"threshold {d} does not exceed favored transfer {t}")
    if d > vb:
        raise PreferenceError(f"threshold {d} exceeds the upper bound {vb}")
    e = min(ONE, d - t) / 2
    maps = []
    for b in range(1, m + 1):
        if b == x_k:
            maps.append(IndifferenceMap.translation(t + e))
        elif b == x_next:
            maps.append(IndifferenceMap([(-e, -e / 2), (-e / 2, vb + 1)]))
        else:
            maps.append(IndifferenceMap.translation(e / 2))
    pref = ClassicalPreference(tuple(maps), label or f"step1(x{x_k}->x{x_next})")
    failed = [k for k, ok in step1_conditions(pref, x_k, x_next, (a, t), d, vb).items() if not ok]
    if failed:
        raise PreferenceError(f"constructed preference fails {failed}")
    return pref


def make_rich_witness(target: int, p_hat: Sequence[RationalLike], p: Sequence[RationalLike]) -> ClassicalPreference:
    """Preference demanding exactly ``{target}`` at ``p_hat`` and exactly ``{0}`` at ``p``.

    Both price vectors are indexed by object with entry 0 for the null object.
    """
    ph = [q(x) for x in p_hat]
    pp = [q(x) for x in p]
    m = len(ph) - 1
    if len(pp) != m + 1 or not 1 <= target <= m:
        raise ValueError("price vectors must cover the same objects as the target")
    if ph[target] <= 0 or any(ph[b] != 0 for b in range(1, m + 1) if b != target):
        raise ValueError("p_hat must price only the target, and positively")
    if any(pp[x] <= ph[x] for x in range(1, m + 1)):
        raise ValueError("p must exceed p_hat on every real object")
    maps = []
    for b in range(1, m + 1):
        if b == target:
            maps.append(IndifferenceMap([(-1, ph[b]), (0, (ph[b] + pp[b]) / 2)]))
        else:
            maps.append(IndifferenceMap.translation(min(ONE, pp[b]) / 2))
    return ClassicalPreference(tuple(maps), f"rich(x{target})")
