from pathlib import Path

import pytest

from sdpn.ingest import load_model, parse_config_pattern

EXAMPLES = Path(__file__).resolve().parents[1] / "src" / "sdpn" / "examples"

DRIVER_INIT = "p0 1 0 p1 FSF p2 FSE p3 s0 p5 g0"
DRIVER_TARGET = "ANY* p3 R ANY* p4 A .* ANY*"

_criteria: dict = {}


def record_criterion(number: int, ok: bool, detail: str = ""):
    _criteria[number] = (ok, detail)


@pytest.fixture
def criterion():
    return record_criterion


def model(name: str):
    return load_model(EXAMPLES / name)[0]


def pattern(m, text: str):
    return parse_config_pattern(text, m)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, detail = _criteria[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip())
