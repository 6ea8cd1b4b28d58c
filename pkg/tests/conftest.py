import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
ROOT = TESTS.parent
FIXTURES = ROOT / "fixtures"
sys.path.insert(0, str(TESTS))

from mlcert.core import load_registry, parse_classification, resolve_weight_profile  # noqa: E402
from mlcert.evidence import load_evidence_bundle  # noqa: E402

FIXED_CLOCK = "2025-01-15T12:00:00Z"


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    monkeypatch.delenv("MLCERT_FIXED_CLOCK", raising=False)
    monkeypatch.delenv("MLCERT_CONFIG", raising=False)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def full_bundle():
    return load_evidence_bundle(FIXTURES / "airsight_bundle.json")


@pytest.fixture(scope="session")
def worked_example_bundle():
    return load_evidence_bundle(FIXTURES / "worked_example_bundle.json")


@pytest.fixture(scope="session")
def registry():
    return load_registry()


@pytest.fixture(scope="session")
def d2a3():
    return parse_classification("D/2A/3")


@pytest.fixture(scope="session")
def d_profile(d2a3, registry):
    return resolve_weight_profile(d2a3, registry)


# --- acceptance summary: one PASS/FAIL line per criterion ------------------------


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): numbered acceptance criterion")


def pytest_itemcollected(item):
    m = item.get_closest_marker("acceptance")
    if m is not None:
        item.user_properties.append(("acceptance", tuple(m.args)))


def pytest_terminal_summary(terminalreporter):
    rows: dict[int, list] = {}
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if not hasattr(rep, "outcome"):
                continue
            for name, value in getattr(rep, "user_properties", ()):
                if name == "acceptance":
                    number, title = value
                    row = rows.setdefault(number, [title, True])
                    row[1] = row[1] and rep.outcome == "passed"
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(rows):
        title, ok = rows[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
