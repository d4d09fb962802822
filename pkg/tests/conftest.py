import numpy as np
import pytest

import shared_runs


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def table1_result():
    """The bundled Table-1 plan (500 replications, declared seed), run once per session."""
    return shared_runs.table1_result()


@pytest.fixture(scope="session")
def density_bundle():
    """The bundled clean/contaminated density plan, run once per session."""
    return shared_runs.density_bundle()


def pytest_terminal_summary(terminalreporter):
    if shared_runs.ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(shared_runs.ACCEPTANCE):
            terminalreporter.write_line(shared_runs.ACCEPTANCE[number])
