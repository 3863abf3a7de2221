import math

import numpy as np
import pytest

from precs import (
    QubitBoson,
    QubitSpinJ,
    build_plane_grid,
    build_sphere_grid,
    make_branch_pair,
    manifold_of,
)

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): marks a test as one acceptance criterion"
    )


def pytest_runtest_makereport(item, call):
    if call.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    name = marker.args[0] if marker.args else item.name
    outcome = "PASS" if call.excinfo is None else "FAIL"
    _ACCEPTANCE_RESULTS.append((name, outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{outcome}] {name}")


@pytest.fixture(scope="session")
def boson():
    return QubitBoson(1.0, 2.0)


@pytest.fixture(scope="session")
def spin():
    return QubitSpinJ(1.0, 1.0, 10)


@pytest.fixture(scope="session")
def equal_pair():
    return make_branch_pair(math.sqrt(0.5), math.sqrt(0.5))


@pytest.fixture(scope="session")
def born_pair():
    return make_branch_pair(math.sqrt(0.7), math.sqrt(0.3))


@pytest.fixture(scope="session")
def boson_grid(boson):
    # 128^2 keeps module tests quick; acceptance uses the full 256^2
    return build_plane_grid(manifold_of(boson).half_width, 128)


@pytest.fixture(scope="session")
def spin_grid(spin):
    return build_sphere_grid(96, 96, spin.spin)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
