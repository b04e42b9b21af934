"""Shared, session-scoped constructions on the reference Mexican-hat model."""

import numpy as np
import pytest

from wcbump import (
    DirectConfig,
    GaussianDifference,
    Logoid,
    WidthConfig,
    extend_bump,
    iterate_direct,
    iterate_width,
    select_width_pair,
    solve_half_widths,
)

H = 0.1
TAU = 0.05

# Independent oracle values (scipy quad + brentq on the raw kernel; a
# trapezoidal Nystrom solve on 4001 nodes for the fixed-point crossings).
ORACLE_DELTA_ZERO = 0.6633259406151583
ORACLE_DELTA_TAU = (0.17694477710893, 0.5011877550290075)
ORACLE_SMALL_WIDTH_H = 0.10617224630592004
ORACLE_CROSS_TAU = 0.5392277594551784
ORACLE_CROSS_ZERO = 0.6152190043376301
ORACLE_A4_LHS = 0.08715576671846126


@pytest.fixture(scope="session")
def kernel():
    return GaussianDifference(K=1.5, k=2.0, M=1.0, m=1.0)


@pytest.fixture(scope="session")
def rate():
    return Logoid(tau=TAU, p=3.0)


@pytest.fixture(scope="session")
def widths(kernel):
    return solve_half_widths(kernel, H), solve_half_widths(kernel, H + TAU)


@pytest.fixture(scope="session")
def pair(widths):
    return select_width_pair(*widths, "smallest-unstable")


@pytest.fixture(scope="session")
def direct(kernel, rate, pair):
    return iterate_direct(kernel, rate, H, pair, DirectConfig(grid_n=401, tol=1e-10), keep_history=True)


@pytest.fixture(scope="session")
def bump(kernel, rate, pair, direct):
    return extend_bump(kernel, rate, H, pair, direct.fixed_point, X=3.0, out_n=1201)


@pytest.fixture(scope="session")
def width_result(kernel, rate, pair):
    return iterate_width(kernel, rate, H, TAU, pair, WidthConfig(), keep_history=True)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
