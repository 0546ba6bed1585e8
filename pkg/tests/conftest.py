import numpy as np
import pytest

from dppfock.generators import case_rng

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return case_rng(20240601, 0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def subsets(n):
    """All subsets of range(n) as tuples, via bit enumeration (test-side oracle)."""
    return [tuple(j for j in range(n) if m >> j & 1) for m in range(1 << n)]


def brute_det(m):
    """Leibniz-formula determinant; independent of LAPACK, fine for tiny matrices."""
    import itertools

    m = np.asarray(m)
    n = m.shape[0]
    total = 0j
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = 1 + 0j
        for i in range(n):
            prod *= m[i, perm[i]]
        total += (-1) ** inv * prod
    return total
