from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import markets
from walras import (
    ComputationLimit,
    Market,
    build_step1_sequence,
    compute_v_bar,
    d_threshold,
    d_value,
    enumerate_iric,
    make_quasilinear,
    mwep,
    replay_outline,
)
from walras.prooflab import (
    IricSequence,
    chain_bundles,
    is_iric,
    unassigned_pay_nothing,
    favoring_switch_keeps_bundle,
    outline_profile,
)

QL = make_quasilinear([10, 2])
TRIPLE = Market((QL, QL, QL))
OUTLINE = outline_profile(10)


def profile_points(market):
    return [oracles.raw_points(p) for p in market.profile]


@st.composite
def market_and_seed(draw):
    market = draw(markets(max_n=4, max_m=3))
    a = draw(st.integers(1, market.m))
    t = F(draw(st.integers(-4, 24)), draw(st.sampled_from([1, 2, 3])))
    return market, (a, t)


# ------------------------------------------------------------------ V bar


def test_v_bar():
    assert compute_v_bar(OUTLINE) == 11
    assert compute_v_bar(TRIPLE) == 11


@given(markets(max_n=5, max_m=3))
def test_v_bar_is_strict_upper_bound(market):
    vb = compute_v_bar(market)
    assert vb > 0
    assert all(vb > p.valuation(a, (0, 0)) for p in market.profile for a in market.objects)


# ------------------------------------------------------------------- IRIC


def test_no_sequence_above_every_valuation():
    assert enumerate_iric(OUTLINE, (1, 50)) == []


def test_outline_sequences_match_brute_force():
    seqs = enumerate_iric(OUTLINE, (1, 5))
    got = {(s.agents, s.objects) for s in seqs}
    assert got == oracles.iric_by_brute_force(profile_points(OUTLINE), (1, 5), 2)
    assert len(seqs) == 9  # frozen from the brute-force count
    assert {s.agents for s in seqs if len(s) == 1} == {(0,), (1,), (2,)}


@given(market_and_seed())
def test_enumeration_matches_brute_force(case):
    market, seed = case
    seqs = enumerate_iric(market, seed)
    assert {(s.agents, s.objects) for s in seqs} == oracles.iric_by_brute_force(profile_points(market), seed, market.m)
    for s in seqs:
        assert is_iric(market, seed, s.agents, s.objects)
        assert list(s.bundles) == chain_bundles(market, seed, s.agents, s.objects)


@given(market_and_seed())
def test_singleton_exists_iff_seed_beats_empty_bundle(case):
    market, seed = case
    singles = [s for s in enumerate_iric(market, seed) if len(s) == 1]
    assert bool(singles) == any(p.strictly_prefers(seed, (0, 0)) for p in market.profile)


def test_enumeration_is_capped():
    big = Market((make_quasilinear([1] * 7),) * 8)
    with pytest.raises(ComputationLimit):
        enumerate_iric(big, (1, 0))
    with pytest.raises(ValueError):
        enumerate_iric(OUTLINE, (0, 0))


# ------------------------------------------------------------- thresholds


def test_singleton_threshold():
    seq = IricSequence((0,), (1,), ((1, F(5)),))
    assert d_threshold(OUTLINE, (1, 5), seq) == 10
    with pytest.raises(ValueError):
        d_threshold(OUTLINE, (1, 12), seq)


@given(market_and_seed(), st.fractions(F(1, 100), 1))
def test_threshold_is_the_supremum(case, frac):
    market, seed = case
    for s in enumerate_iric(market, seed):
        d = d_threshold(market, seed, s)
        assert d > seed[1]
        assert not is_iric(market, (seed[0], d + 1), s.agents, s.objects)
        assert not is_iric(market, (seed[0], d), s.agents, s.objects)
        inside = seed[1] + (d - seed[1]) * (1 - frac)
        assert is_iric(market, (seed[0], inside), s.agents, s.objects)


@given(market_and_seed(), st.fractions(0, 3))
def test_chain_transfers_rise_with_seed(case, raise_by):
    market, seed = case
    for s in enumerate_iric(market, seed):
        low = chain_bundles(market, seed, s.agents, s.objects)
        high = chain_bundles(market, (seed[0], seed[1] + raise_by), s.agents, s.objects)
        assert all(h[1] >= l[1] for l, h in zip(low, high))


def test_d_value_examples():
    assert d_value(OUTLINE, (1, 50)) == compute_v_bar(OUTLINE)
    seqs = enumerate_iric(OUTLINE, (1, 5))
    expected = min(d_threshold(OUTLINE, (1, 5), s) for s in seqs)
    assert d_value(OUTLINE, (1, 5)) == expected == 10


@given(market_and_seed())
def test_d_value_never_exceeds_v_bar(case):
    market, seed = case
    assert d_value(market, seed) <= compute_v_bar(market)


# ---------------------------------------------------------- conversions


def test_outline_conversions():
    ctx = build_step1_sequence(OUTLINE, 0, 1)
    assert ctx.ok and ctx.agents == [0, 1] and ctx.objects == [1, 2]
    assert len(ctx.step_profiles) == 3
    first, second = ctx.preferences
    assert first.valuation(2, (1, 10)) < 0  # favors its bundle on x1
    assert second.valuation(1, (2, 10)) < 0  # roles of the objects swapped
    assert second.valuation(1, (0, 0)) > ctx.v_bar
    assert all(ctx.bundle_kept)


def test_conversion_rejects_wrong_start():
    with pytest.raises(ValueError):
        build_step1_sequence(OUTLINE, 2, 1)


@settings(max_examples=20)
@given(markets(max_n=4, max_m=3))
def test_conversions_succeed_for_mwep(market):
    out = mwep(market)
    start = next(i for i, a in enumerate(out.allocation) if a)
    ctx = build_step1_sequence(market, start)
    assert ctx.ok, ctx.events
    assert len(ctx.preferences) == market.m
    assert len(set(ctx.agents)) == market.m


@given(markets(max_n=5, max_m=3))
def test_null_bundles_and_favoring_switch_for_mwep(market):
    assert unassigned_pay_nothing(market)
    assert favoring_switch_keeps_bundle(market)


# ---------------------------------------------------------------- replay


@pytest.mark.parametrize("v", [F(10), F(1, 2), F(7, 3)])
def test_replay_outline(v):
    report = replay_outline(v)
    assert report.ok, report.failures
    assert [s["profile"] for s in report.steps] == ["R", "R1", "R2", "R''"]
    assert all(s["prices"].real == (v, v) and s["certificate"] == "ok" for s in report.steps)
    assert report.steps[0]["allocation"][2] == 0


def test_outline_preferences_are_distinct_but_agree_at_origin():
    prefs = OUTLINE.profile
    assert len(set(prefs)) == 3
    assert {p.valuation(a, (0, 0)) for p in prefs for a in (1, 2)} == {10}
    with pytest.raises(ValueError):
        outline_profile(0)
