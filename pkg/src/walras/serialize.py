"""JSON encodings for preferences, markets, prices, outcomes and reports.

Rationals are always written as ``"p/q"`` strings (integers without a
denominator) and read back exactly, so every round trip is lossless.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Any

from ._rational import Rat, fmt, q
from .axioms import AxiomReport, DeviationPool
from .market import Market, PriceVector
from .mechanisms import MechanismOutcome
from .preferences import ClassicalPreference, IndifferenceMap, make_quasilinear

_OBJ = re.compile(r"^x([1-9][0-9]*)$")


class FormatError(ValueError):
    pass


def _object_index(key: str) -> int:
    match = _OBJ.match(key)
    if not match:
        raise FormatError(f"object keys look like 'x1', got {key!r}")
    return int(match.group(1))


def _ordered(mapping: dict) -> list:
    idx = sorted((_object_index(k), v) for k, v in mapping.items())
    if [i for i, _ in idx] != list(range(1, len(idx) + 1)):
        raise FormatError(f"objects must be x1..x{len(idx)}")
    return [v for _, v in idx]


def preference_to_json(pref: ClassicalPreference) -> dict:
    if pref.is_quasilinear:
        doc: dict = {"kind": "quasilinear", "v": {f"x{a}": fmt(v) for a, v in enumerate(pref.quasilinear_values(), 1)}}
    else:
        doc = {
            "kind": "piecewise",
            "breakpoints": {
                f"x{a}": [[fmt(x), fmt(y)] for x, y in f.breakpoints] for a, f in enumerate(pref.maps, 1)
            },
        }
    if pref.label:
        doc["label"] = pref.label
    return doc


def preference_from_json(doc: dict) -> ClassicalPreference:
    kind = doc.get("kind")
    label = doc.get("label", "")
    if kind == "quasilinear":
        return make_quasilinear([q(v) for v in _ordered(doc["v"])], label)
    if kind == "piecewise":
        maps = tuple(IndifferenceMap([(q(x), q(y)) for x, y in pts]) for pts in _ordered(doc["breakpoints"]))
        return ClassicalPreference(maps, label)
    raise FormatError(f"unknown preference kind {kind!r}")


def market_to_json(market: Market) -> dict:
    return {"agents": [preference_to_json(p) for p in market.profile]}


def market_from_json(doc: dict, strict: bool = True) -> Market:
    return Market(tuple(preference_from_json(p) for p in doc["agents"]), strict)


def prices_to_json(p: PriceVector) -> list:
    return [fmt(x) for x in p]


def prices_from_json(doc: list) -> PriceVector:
    return PriceVector(tuple(q(x) for x in doc))


def pool_to_json(pool: DeviationPool) -> dict:
    return {"per_agent": [[preference_to_json(p) for p in prefs] for prefs in pool.per_agent]}


def pool_from_json(doc: Any, n: int | None = None) -> DeviationPool:
    """Accepts ``{"per_agent": [[...], ...]}`` or a flat list shared by all ``n`` agents."""
    if isinstance(doc, dict) and "per_agent" in doc:
        return DeviationPool(tuple(tuple(preference_from_json(p) for p in prefs) for prefs in doc["per_agent"]))
    if isinstance(doc, list):
        if n is None:
            raise FormatError("a flat pool needs the number of agents")
        return DeviationPool.uniform((preference_from_json(p) for p in doc), n)
    raise FormatError("unrecognised pool document")


def outcome_to_json(out: MechanismOutcome) -> dict:
    doc = {
        "bundles": [{"object": a, "transfer": fmt(t)} for a, t in out.bundles],
        "revenue": fmt(out.revenue),
    }
    if out.prices is not None:
        doc["prices"] = prices_to_json(out.prices)
    return doc


def encode(value: Any) -> Any:
    """Generic JSON view: rationals to strings, tuples/sets to lists, domain objects to their documents."""
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, Rat) or hasattr(value, "denominator"):
        return fmt(value)
    if isinstance(value, ClassicalPreference):
        return preference_to_json(value)
    if isinstance(value, PriceVector):
        return prices_to_json(value)
    if isinstance(value, MechanismOutcome):
        return outcome_to_json(value)
    if isinstance(value, Market):
        return market_to_json(value)
    if isinstance(value, dict):
        return {str(k): encode(v) for k, v in value.items()}
    if isinstance(value, (frozenset, set)):
        return sorted(encode(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [encode(v) for v in value]
    raise TypeError(f"cannot encode {type(value).__name__}")


def report_to_json(report: AxiomReport) -> dict:
    return {"axiom": report.axiom, "holds": report.holds, "note": report.note, "witness": encode(report.witness)}


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=False)


def load_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def save_json(doc: Any, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc) + "\n")
