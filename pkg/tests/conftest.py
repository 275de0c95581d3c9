import pytest

from affine2f.model import validate_params


@pytest.fixture
def cir_params():
    return validate_params(1.0, 1.0, 0.0, 1.0, 2.0)


@pytest.fixture
def stable_params():
    return validate_params(1.0, 1.0, 0.0, 1.0, 1.5)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for res in sorted(results, key=lambda r: r.number):
        terminalreporter.write_line(res.line())
