from __future__ import annotations

import os
import sys
import time
from fractions import Fraction as F

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from walras import Market, make_piecewise, make_quasilinear  # noqa: E402

settings.register_profile(
    "suite",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "suite"))

ACCEPTANCE_LINES: dict[int, list[str]] = {}
SESSION_START = time.perf_counter()


def pytest_configure(config):
    config.addinivalue_line("markers", "runs_last: move the test to the end of the session")


def pytest_collection_modifyitems(items):
    items.sort(key=lambda item: item.get_closest_marker("runs_last") is not None)


def session_elapsed() -> float:
    return time.perf_counter() - SESSION_START


def record_criterion(number: int, name: str, passed: bool, detail: str = "") -> None:
    line = f"criterion {number} {name}: {'PASS' if passed else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.setdefault(number, []).append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        for line in ACCEPTANCE_LINES[number]:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    return record_criterion


# ------------------------------------------------------------- strategies


@st.composite
def breakpoint_lists(draw, max_points: int = 3):
    """Valid breakpoint lists: increasing in both coordinates and above the diagonal."""
    k = draw(st.integers(1, max_points))
    x = F(draw(st.integers(-6, 6)), draw(st.sampled_from([1, 2])))
    y = x + F(draw(st.integers(1, 12)), draw(st.sampled_from([1, 2, 3])))
    pts = [(x, y)]
    for _ in range(k - 1):
        x = x + F(draw(st.integers(1, 6)), draw(st.sampled_from([1, 2])))
        y = max(y + F(draw(st.integers(1, 12)), draw(st.sampled_from([1, 2]))), x + 1)
        pts.append((x, y))
    return pts


@st.composite
def piecewise_prefs(draw, m: int = 2):
    return make_piecewise([draw(breakpoint_lists()) for _ in range(m)])


@st.composite
def quasilinear_prefs(draw, m: int = 2, vmax: int = 12):
    return make_quasilinear([draw(st.integers(1, vmax)) for _ in range(m)])


@st.composite
def markets(draw, max_n: int = 4, max_m: int = 3, family: str = "mixed"):
    m = draw(st.integers(2, max_m))
    n = draw(st.integers(m + 1, max(m + 1, max_n)))
    prefs = []
    for _ in range(n):
        kind = family if family != "mixed" else draw(st.sampled_from(["quasilinear", "piecewise"]))
        prefs.append(draw(quasilinear_prefs(m) if kind == "quasilinear" else piecewise_prefs(m)))
    return Market(tuple(prefs))
