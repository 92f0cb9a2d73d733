import numpy as np
import pytest

from qdot_control.dots import LambdaDot, Region, TwoLevelDot, lambda_ensemble, region_controls, two_level_ensemble

# closely spaced transition energies in eV, equal unit dipoles
SELECTIVE_EPS = [1.32, 1.35, 1.375, 1.38, 1.397]

# Five distinct two-level dots except that dot 4 repeats dot 1
REPEATED_DOTS = [
    TwoLevelDot(1.0, 1.0),
    TwoLevelDot(1.3, 0.8),
    TwoLevelDot(1.7, 1.2),
    TwoLevelDot(1.0, 1.0),
    TwoLevelDot(2.2, 0.6),
]

LAMBDA_EPS = [1.0, 1.1, 1.25, 1.45, 1.7]


def random_hermitian(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a + a.conj().T) / 2


def random_unitary(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def five_dot_global():
    return two_level_ensemble(REPEATED_DOTS)


@pytest.fixture
def five_dot_regions():
    base = two_level_ensemble(REPEATED_DOTS)
    return region_controls(base, [Region("A", [0, 1, 2]), Region("B", [2, 3, 4])])


@pytest.fixture
def selective_system():
    return two_level_ensemble([TwoLevelDot(e, 1.0) for e in SELECTIVE_EPS])


@pytest.fixture
def lambda_distinct():
    return lambda_ensemble([LambdaDot(e, 1.0, -1.0) for e in LAMBDA_EPS])


@pytest.fixture
def lambda_repeated():
    eps = list(LAMBDA_EPS)
    eps[3] = eps[0]
    return lambda_ensemble([LambdaDot(e, 1.0, -1.0) for e in eps])


# one (number, name, passed, detail) entry per acceptance criterion, filled by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}: {detail}")
