import numpy as np
import pytest

from nsreg import FlowParams, Grid3, generate_field, pressure_field, random_solenoidal


@pytest.fixture(scope="session")
def grid16():
    return Grid3(16)


@pytest.fixture(scope="session")
def grid32():
    return Grid3(32)


@pytest.fixture(scope="session")
def short_params():
    return FlowParams(nu=1.0, end_time=0.25, dt=1.0 / 16)


@pytest.fixture(scope="session")
def tg32(grid32, short_params):
    U = generate_field("taylor_green_2d", short_params, grid32)
    return U, pressure_field(U)


@pytest.fixture(scope="session")
def abc32(grid32, short_params):
    U = generate_field("abc", short_params, grid32)
    return U, pressure_field(U)


@pytest.fixture(scope="session")
def random32(grid32):
    return random_solenoidal(grid32, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number: int, title: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
