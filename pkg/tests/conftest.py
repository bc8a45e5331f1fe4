import numpy as np
import pytest

from costgen.tablespace import TableSpace, enumerate_space

# acceptance lines collected by test_acceptance.py, echoed in the summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def small_space():
    """The 2x3 space with margins (3,3) / (2,2,2); seven members."""
    return TableSpace((3, 3), (2, 2, 2))


@pytest.fixture
def central():
    return np.ones((2, 3), dtype=np.int64)


def random_bounded_space(rng, max_dim=3, max_total=12, slack=2):
    """A random space around a random table, with nontrivial cell bounds.

    Returns ``(space, X)`` where ``X`` is a member, so the space is never
    empty.
    """
    while True:
        n = int(rng.integers(2, max_dim + 1))
        m = int(rng.integers(2, max_dim + 1))
        N = int(rng.integers(n, max_total + 1))
        X = rng.multinomial(N, np.ones(n * m) / (n * m)).reshape(n, m)
        lower = np.maximum(X - rng.integers(0, slack + 1, X.shape), 0)
        upper = np.minimum(X + rng.integers(0, slack + 1, X.shape), N)
        if (lower > 0).any() or (upper < N).any():
            space = TableSpace(X.sum(axis=1), X.sum(axis=0), lower, upper)
            return space, X.astype(np.int64)


def random_pair(rng, **kw):
    """Two distinct members of a random bounded space."""
    while True:
        space, _ = random_bounded_space(rng, **kw)
        states = enumerate_space(space)
        if len(states) >= 2:
            a, b = rng.choice(len(states), 2, replace=False)
            return space, states[a], states[b]
