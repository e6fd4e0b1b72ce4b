import os

import numpy as np
import pytest

from infodesign import builtin, parallel_scenario

os.environ.setdefault("INFODESIGN_THREADS", "1")

CRITERIA = {}


def record_criterion(number, passed, detail):
    CRITERIA[number] = (bool(passed), detail)
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def affine():
    return builtin("two_link_affine")


@pytest.fixture(scope="session")
def bpr():
    return builtin("two_link_bpr")


@pytest.fixture(scope="session")
def wheat_affine():
    return builtin("wheatstone_affine")


@pytest.fixture(scope="session")
def wheat_quad():
    return builtin("wheatstone_quadratic")


def random_affine(rng, demand=5.0):
    """Two-state, two-link affine instance with coefficients in the span of the affine test case."""
    a0 = rng.uniform(5.0, 25.0, (2, 2))
    a1 = rng.uniform(1.0, 4.0, (2, 2))
    p = rng.uniform(0.2, 0.8)
    return parallel_scenario(np.stack([a0, a1]), [p, 1.0 - p], demand)
