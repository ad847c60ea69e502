import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from sunitkit.numfield import equation_order, make_field  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

POLYS = {
    "gauss": [1, 0, 1],
    "zsqrt2": [1, 0, -2],
    "zsqrtm5": [1, 0, 5],
    "zm23": [1, -1, 6],
    "cubic": [1, 0, 0, -2],
}

_orders = {}


def order_of(name):
    if name not in _orders:
        _orders[name] = equation_order(make_field(POLYS[name]))
    return _orders[name]


@pytest.fixture(scope="session")
def gauss():
    return order_of("gauss")


@pytest.fixture(scope="session")
def zsqrt2():
    return order_of("zsqrt2")


@pytest.fixture(scope="session")
def zsqrtm5():
    return order_of("zsqrtm5")


@pytest.fixture(scope="session")
def zm23():
    return order_of("zm23")


@pytest.fixture(scope="session")
def cubic():
    return order_of("cubic")


# acceptance criteria report: test_acceptance fills this with (number, passed, detail)
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
