import pathlib
import sys

import pytest

from dtnet.graph import load_graph

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))


@pytest.fixture(scope="session")
def g0():
    return load_graph(str(FIXTURES / "g0.tsv"), ew_max=1000)


@pytest.fixture
def ids(g0):
    return {s: g0.resolve(s) for s in "abcdef"}


ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
