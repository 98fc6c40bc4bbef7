import shutil

import pytest

from cegio.backend import EnumBackend, default_solver_configs


@pytest.fixture
def enum():
    return EnumBackend()


@pytest.fixture(scope="session")
def z3_config():
    cfg = default_solver_configs().get("z3")
    if cfg is None:
        pytest.skip("z3 not on PATH")
    return cfg


def have_solver() -> bool:
    return shutil.which("z3") is not None


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for n in sorted(REPORT):
            terminalreporter.write_line(REPORT[n])
