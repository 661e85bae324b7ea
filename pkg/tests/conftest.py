from __future__ import annotations

from pathlib import Path

import pytest

from stratagraph import build_attack_graph, build_base_graph, load_scenario

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def pytest_addoption(parser):
    parser.addoption(
        "--update-golden",
        action="store_true",
        default=False,
        help="rewrite golden files from current output instead of comparing",
    )


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def golden_check(request):
    """Compare text against a golden file byte-for-byte (or regenerate it)."""
    update = request.config.getoption("--update-golden")

    def check(name: str, data: str):
        path = GOLDEN / name
        if update:
            path.write_text(data, encoding="utf-8")
            return
        assert path.exists(), f"golden file {name} missing; run pytest --update-golden"
        expected = path.read_text(encoding="utf-8")
        assert data == expected, f"output differs from golden {name}"

    return check


def scenario_bundle(name: str):
    doc = load_scenario(FIXTURES / f"{name}.scenario")
    base = build_base_graph(doc)
    graph = build_attack_graph(doc, base)
    return doc, base, graph


@pytest.fixture
def toy5g():
    return scenario_bundle("toy5g")


@pytest.fixture
def minichain():
    return scenario_bundle("minichain")


@pytest.fixture
def multiedge():
    return scenario_bundle("multiedge")


@pytest.fixture
def strictmode():
    return scenario_bundle("strictmode")


@pytest.fixture
def hitting_trio():
    return scenario_bundle("hitting_trio")


@pytest.fixture
def undefendable():
    return scenario_bundle("undefendable_feasible")


@pytest.fixture
def potential_gap():
    return scenario_bundle("potential_gap")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion at the end of the run."""
    lines = []
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid:
                name = nodeid.split("::")[-1]
                lines.append((name, "PASS" if status == "passed" else "FAIL"))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in sorted(lines):
        terminalreporter.write_line(f"{verdict}  {name}")
