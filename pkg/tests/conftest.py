from __future__ import annotations

from pathlib import Path

import pytest

from stringzinc import flatten_int, parse_model
from stringzinc.corpus import MODELS
from stringzinc.solver import Solver

PALINDROME = MODELS / "palindrome.szn"


def lowered(src: str, ell: int) -> str:
    return flatten_int(parse_model(src), ell).emit()


def solve_all(src: str, ell: int) -> set:
    """Decoded solution set of ``src`` after integer lowering, as frozensets of items."""
    res = Solver(lowered(src, ell)).solve(all_solutions=True)
    assert res.complete
    return {frozenset(s.decoded().items()) for s in res.solutions}


def xs(sols: set, name: str = "x") -> set:
    return {dict(s)[name] for s in sols}


@pytest.fixture
def palindrome_src() -> str:
    return Path(PALINDROME).read_text()


# -- acceptance reporting ------------------------------------------------------------

_ACCEPTANCE: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    number, title = mark.args
    prev = _ACCEPTANCE.get(number, (title, True))
    _ACCEPTANCE[number] = (title, prev[1] and rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
