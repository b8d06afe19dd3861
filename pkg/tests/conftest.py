import itertools

import numpy as np
import pytest

from pmrc.secure import build_code


def span_rank(rows, q):
    """Rank over GF(q) by counting the row space (q**rank vectors). Tiny inputs only."""
    rows = [tuple(int(x) % q for x in r) for r in rows]
    if not rows:
        return 0
    space = {tuple([0] * len(rows[0]))}
    for r in rows:
        space = {tuple((v[i] + c * r[i]) % q for i in range(len(r))) for v in space for c in range(q)}
    size, rank = len(space), 0
    while size > 1:
        size //= q
        rank += 1
    return rank


@pytest.fixture(scope="session")
def mbr634():
    return build_code("mbr", 6, 3, 4, q=7)


@pytest.fixture(scope="session")
def secure_mbr634():
    return build_code("mbr", 6, 3, 4, ell=1, q=7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def subsets(n, size):
    return list(itertools.combinations(range(1, n + 1), size))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
