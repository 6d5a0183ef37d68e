from __future__ import annotations

import json

import pytest

from odq.standard import load_standard

TOY_STANDARD = {
    "standard_iri": "https://ofn.gov.cz/turistické-cíle/2020-07-01/",
    "features": [
        {"path": "@context", "obligation": "mandatory"},
        {"path": "název", "obligation": "mandatory"},
        {"path": "umístění", "obligation": "mandatory"},
        {"path": "vstupné", "obligation": "optional"},
    ],
}


@pytest.fixture
def toy_spec():
    return load_standard(json.dumps(TOY_STANDARD, ensure_ascii=False))


@pytest.fixture
def toy_standard_file(tmp_path):
    path = tmp_path / "ofs.json"
    path.write_text(json.dumps(TOY_STANDARD, ensure_ascii=False), "utf-8")
    return path


_acceptance: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _acceptance.append((report.outcome.upper(), report.nodeid.split("::")[-1]))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, name in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'PASSED' else 'FAIL'}  {name}")
