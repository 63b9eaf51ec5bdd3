"""Deterministic random markets and deviation pools.

All randomness comes from numpy's PCG64 generator seeded by the caller, so the
same arguments always produce the same preferences on every platform.
"""

from __future__ import annotations

from typing import Mapping, Optional

import numpy as np

from ._rational import Rat
from .market import Market
from .preferences import ClassicalPreference, IndifferenceMap, PreferenceError, make_quasilinear

FAMILIES = ("quasilinear", "piecewise", "mixed")
SLOPES = (Rat(1, 2), Rat(1), Rat(2), Rat(3))


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_quasilinear(rng: np.random.Generator, m: int, vmax: int = 12, label: str = "") -> ClassicalPreference:
    return make_quasilinear([int(v) for v in rng.integers(1, vmax + 1, size=m)], label)


def random_map(rng: np.random.Generator, vmax: int = 12, max_kinks: int = 2) -> IndifferenceMap:
    """Random piecewise-linear indifference map with integer breakpoints, retrying until desirable."""
    while True:
        k = int(rng.integers(2, max_kinks + 2))
        xs = sorted(int(x) for x in rng.choice(np.arange(-vmax, vmax + 1), size=k, replace=False))
        y = Rat(xs[0] + int(rng.integers(1, vmax + 1)))
        pts = [(Rat(xs[0]), y)]
        for x0, x1 in zip(xs, xs[1:]):
            y += SLOPES[int(rng.integers(len(SLOPES)))] * (x1 - x0)
            pts.append((Rat(x1), y))
        try:
            return IndifferenceMap(pts)
        except PreferenceError:
            continue


def random_piecewise(rng: np.random.Generator, m: int, vmax: int = 12, label: str = "") -> ClassicalPreference:
    """A preference with income effects on at least one object."""
    while True:
        pref = ClassicalPreference(tuple(random_map(rng, vmax) for _ in range(m)), label)
        if not pref.is_quasilinear:
            return pref


def generate_market(
    seed: int,
    n: int,
    m: int,
    family: str = "mixed",
    params: Optional[Mapping] = None,
) -> Market:
    """Pseudo-random market.

    ``params`` may set ``vmax`` (value scale, default 12) and ``twins`` (how
    many leading agents share agent 0's preference, default 1 = none).  The
    mixed family makes agent 0 non-quasilinear and draws the rest at random.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if m < 2 or n <= m:
        raise ValueError(f"need n > m >= 2, got n={n}, m={m}")
    params = dict(params or {})
    vmax = int(params.get("vmax", 12))
    twins = int(params.get("twins", 1))
    rng = rng_for(seed)
    prefs = []
    for i in range(n):
        if family == "quasilinear":
            kind = "q"
        elif family == "piecewise":
            kind = "p"
        else:
            kind = "p" if i == 0 or rng.random() < 0.5 else "q"
        draw = random_piecewise if kind == "p" else random_quasilinear
        prefs.append(draw(rng, m, vmax, label=f"agent{i}"))
    for i in range(1, min(twins, n)):
        prefs[i] = prefs[0].with_label(f"agent{i}")
    return Market(tuple(prefs))


def default_pool(seed: int, m: int, n_quasilinear: int = 12, n_piecewise: int = 8, vmax: int = 12) -> tuple[ClassicalPreference, ...]:
    """Deviation pool of quasilinear and piecewise-linear preferences."""
    rng = rng_for(seed)
    pool = [random_quasilinear(rng, m, vmax, f"pool-q{k}") for k in range(n_quasilinear)]
    pool += [random_piecewise(rng, m, vmax, f"pool-p{k}") for k in range(n_piecewise)]
    return tuple(pool)
