import csv
import io
import json
import random
import re

import pytest
from hypothesis import given, settings

from conftest import markets
from walras import DeviationPool, generate_market, make_quasilinear, run_scenario
from walras.harness import (
    CSV_FIELDS,
    MechanismSpec,
    Scenario,
    emit_report,
    outline_scenarios,
    render_report,
    run_batch,
    scenario_from_json,
    scenario_hash,
    scenario_to_json,
    theorem1_batch,
)
from walras.serialize import (
    FormatError,
    load_json,
    market_from_json,
    market_to_json,
    pool_from_json,
    pool_to_json,
    preference_from_json,
    preference_to_json,
    prices_from_json,
    prices_to_json,
    save_json,
)
from walras.market import PriceVector
from walras.prooflab import outline_profile

RATIONAL = re.compile(r"^-?\d+(/\d+)?$")


def small_scenario(market, name="small", mechanisms=("mwep", "no_sale"), mode="exact"):
    pool = DeviationPool.default(2, market.n, market.m, (3, 2))
    return Scenario(name, market, tuple(MechanismSpec(m) for m in mechanisms), pool, seed=2, mode=mode)


def all_strings(doc):
    if isinstance(doc, dict):
        for v in doc.values():
            yield from all_strings(v)
    elif isinstance(doc, list):
        for v in doc:
            yield from all_strings(v)
    elif isinstance(doc, str):
        yield doc


# ------------------------------------------------------------- generation


def test_generation_is_reproducible():
    assert generate_market(1, 3, 2, "quasilinear") == generate_market(1, 3, 2, "quasilinear")
    assert all(p.is_quasilinear for p in generate_market(1, 3, 2, "quasilinear").profile)


def test_generation_rejects_bad_shapes():
    with pytest.raises(ValueError):
        generate_market(1, 2, 2)
    with pytest.raises(ValueError):
        generate_market(1, 4, 3, "smooth")


def test_mixed_family_has_income_effects():
    assert any(not p.is_quasilinear for p in generate_market(7, 5, 3, "mixed").profile)


def test_twins_share_a_preference():
    mk = generate_market(4, 4, 3, "piecewise", {"twins": 2})
    assert mk.profile[0] == mk.profile[1] and mk.profile[1] != mk.profile[2]


# --------------------------------------------------------------- serialization


def test_preference_documents():
    doc = preference_to_json(make_quasilinear([10, 2]))
    assert doc == {"kind": "quasilinear", "v": {"x1": "10", "x2": "2"}}
    pw = preference_from_json({"kind": "piecewise", "breakpoints": {"x1": [["0", "10"], ["5", "18"]], "x2": [["0", "5/2"]]}})
    assert pw.valuation(1, (0, 2)) == pw.maps[0](2)


@pytest.mark.parametrize(
    "doc",
    [
        {"kind": "smooth"},
        {"kind": "quasilinear", "v": {"x1": "1", "x3": "2"}},
        {"kind": "quasilinear", "v": {"apple": "1"}},
        {"kind": "quasilinear", "v": {"x1": "0.5", "x2": "1"}},
    ],
)
def test_bad_preference_documents(doc):
    with pytest.raises((FormatError, ValueError)):
        preference_from_json(doc)


@given(markets(max_n=5, max_m=3))
def test_market_round_trip(market):
    doc = market_to_json(market)
    back = market_from_json(json.loads(json.dumps(doc)))
    assert back == market
    assert all(RATIONAL.match(s) for s in all_strings(doc) if s not in ("quasilinear", "piecewise") and not s.startswith("agent"))


def test_price_and_pool_round_trip():
    p = PriceVector.of(["7/2", 9])
    assert prices_to_json(p) == ["0", "7/2", "9"]
    assert prices_from_json(prices_to_json(p)) == p
    pool = DeviationPool.default(3, 3, 2, (2, 2))
    assert pool_from_json(json.loads(json.dumps(pool_to_json(pool)))) == pool
    flat = pool_from_json([preference_to_json(make_quasilinear([1, 2]))], 3)
    assert len(flat.per_agent) == 3
    with pytest.raises(FormatError):
        pool_from_json([preference_to_json(make_quasilinear([1, 2]))])


@settings(max_examples=15)
@given(markets(max_n=4, max_m=3))
def test_scenario_file_round_trip(tmp_path_factory, market):
    path = tmp_path_factory.mktemp("scn") / "scenario.json"
    scn = Scenario(
        "rt", market, (MechanismSpec("mwep"), MechanismSpec("mwep_with_fee", (("fee", 1),))),
        DeviationPool.default(5, market.n, market.m, (2, 1)), seed=5, mode="epsilon",
    )
    save_json(scenario_to_json(scn), path)
    back = scenario_from_json(load_json(path))
    assert back == scn and scenario_hash(back) == scenario_hash(scn)


def test_scenario_rejects_unknown_mechanism():
    with pytest.raises(KeyError):
        MechanismSpec("lottery")


# ------------------------------------------------------------------- runs


def test_outline_record():
    rec = run_scenario(outline_scenarios([10])[0])
    assert rec.equilibrium["min"] == ["0", "10", "10"]
    assert rec.equilibrium["all_prices_positive"] and not rec.errors
    assert rec.failures("mwep") == []
    assert set(rec.failures("no_sale")) == {"NW", "PE"}


def test_replay_is_bit_identical():
    scn = small_scenario(generate_market(9, 4, 3, "mixed"))
    first, second = run_scenario(scn), run_scenario(scenario_from_json(scenario_to_json(scn)))
    assert first.record_hash == second.record_hash
    assert json.dumps(first.content(), sort_keys=True) == json.dumps(second.content(), sort_keys=True)


def test_batch_is_order_independent():
    scns = [small_scenario(generate_market(s, 3, 2, "mixed"), f"s{s}") for s in range(5)]
    forward = {r.scenario: r.record_hash for r in run_batch(scns)}
    shuffled = list(scns)
    random.Random(0).shuffle(shuffled)
    assert {r.scenario: r.record_hash for r in run_batch(shuffled)} == forward


def test_errors_are_recorded_not_raised():
    rec = run_scenario(small_scenario(outline_profile(10), mechanisms=("vcg_quasilinear", "mwep")))
    assert any("vcg_quasilinear" in e and "DomainError" in e for e in rec.errors)
    assert "mwep" in rec.reports


def test_epsilon_mode_record():
    rec = run_scenario(small_scenario(Market3(), mode="epsilon"))
    assert rec.mode == "epsilon" and not rec.errors
    assert rec.failures("mwep") == []


def Market3():
    from walras import Market

    return Market((make_quasilinear([10, 2]),) * 3)


def test_batch_fixture_is_fixed():
    a, b = theorem1_batch(6), theorem1_batch(6)
    assert [scenario_hash(s) for s in a] == [scenario_hash(s) for s in b]
    assert [s.market.n for s in a] == [3, 4, 4, 5, 3, 4]
    assert all(len(s.pool[0]) == 20 for s in a)


# ---------------------------------------------------------------- reports


def test_json_report():
    rec = run_scenario(small_scenario(outline_profile(10)))
    doc = json.loads(emit_report([rec], "json"))
    assert doc["records"][0]["scenario_hash"] == rec.scenario_hash
    assert doc["records"][0]["equilibrium"]["min"] == ["0", "10", "10"]


def test_empty_reports():
    assert json.loads(emit_report([], "json")) == {"records": []}
    assert emit_report([], "csv") == ",".join(CSV_FIELDS) + "\n"
    assert emit_report([], "text") == ""


def test_csv_has_one_row_per_mechanism_and_check():
    scn = small_scenario(outline_profile(10), mechanisms=("mwep", "max_wep", "no_sale"))
    rows = list(csv.DictReader(io.StringIO(emit_report([run_scenario(scn)], "csv"))))
    assert len(rows) == 3 * len(scn.axioms)
    assert {(r["mechanism"], r["axiom"]) for r in rows} == {(m, a) for m in ("mwep", "max_wep", "no_sale") for a in scn.axioms}
    assert list(rows[0]) == list(CSV_FIELDS)


def test_text_report_and_file_output(tmp_path):
    rec = run_scenario(small_scenario(outline_profile(10)))
    path = tmp_path / "report.txt"
    text = emit_report([rec], "text", path)
    assert path.read_text() == text and "no_sale: fails NW, PE" in text
    with pytest.raises(ValueError):
        render_report([rec], "xml")


def test_unwritable_path():
    with pytest.raises(OSError):
        emit_report([], "json", "/nonexistent-dir/report.json")
