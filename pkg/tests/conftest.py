import numpy as np
import pytest

from pctsp.instance import gen_euclidean, validate


def unit3():
    return validate(3, 0, [[0, 1, 1], [1, 0, 1], [1, 1, 0]], [0, 10, 10])


def path3():
    return validate(3, 0, [[0, 1, 2], [1, 0, 1], [2, 1, 0]], [0, 0.5, 10])


def skip3():
    return validate(3, 0, [[0, 1, 5], [1, 0, 5], [5, 5, 0]], [0, 10, 0.1])


@pytest.fixture
def fix_unit3():
    return unit3()


@pytest.fixture
def fix_path():
    return path3()


@pytest.fixture
def fix_skip():
    return skip3()


def random_instances(count, lo=4, hi=12, seed=0, scales=(0.1, 1.0, 10.0)):
    """Deterministic corpus: n uniform in [lo, hi], penalty scale cycling."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(lo, hi + 1))
        out.append(gen_euclidean(n, [seed, k], scales[k % len(scales)]))
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
