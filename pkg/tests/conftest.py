import pytest

from smoothci import QuadratureSpec, ScenarioConfig

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def base_cfg():
    """n = 25, m = 1, nominal 0.95, preliminary test size 0.1."""
    return ScenarioConfig(n=25, m=1, alpha=0.05, alpha_tilde=0.1)


@pytest.fixture
def quad():
    return QuadratureSpec()


@pytest.fixture
def acceptance_report():
    def record(label: str, passed: bool, detail: str) -> None:
        _ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  {label}: {detail}")
        print(_ACCEPTANCE_LINES[-1])

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
