"""Starting matrices with extreme characteristics.

Chains started from a low-CV, a high-CV and a near-proportional matrix
drift towards the same stationary behaviour; watching them meet is how
convergence is assessed.  Ties in argmax/argmin go to the lowest index.
"""

from __future__ import annotations

import math

import numpy as np

from costgen.margins import EmptySpaceError
from costgen.tablespace import TableSpace


class RepairBudgetExceeded(RuntimeError):
    """The random repair loop did not balance the margins within its budget."""


def _margins(mu, nu):
    mu = [int(v) for v in mu]
    nu = [int(v) for v in nu]
    if sum(mu) != sum(nu):
        raise ValueError(f"margin sums differ: {sum(mu)} != {sum(nu)}")
    if min(mu + nu, default=0) < 0:
        raise ValueError("margins must be nonnegative")
    return mu, nu


def _spread_row(M, i, row_rem, col_rem, m):
    # fill row i over columns by increasing remaining sum, giving each the
    # ceiling of the average still owed (remainder spread left to right)
    order = sorted(range(m), key=lambda j: (col_rem[j], j))
    for k, j in enumerate(order):
        left = m - k
        d = min(col_rem[j], -(-row_rem[i] // left))
        M[i][j] += d
        row_rem[i] -= d
        col_rem[j] -= d


def seed_homogeneous(mu, nu) -> np.ndarray:
    """Low cost-CV matrix with margins ``mu``/``nu``.

    Repeatedly takes the row (or column, whichever has the larger average
    remainder) with the largest remaining sum and spreads it as evenly as
    the opposite margins allow.
    """
    mu, nu = _margins(mu, nu)
    n, m = len(mu), len(nu)
    M = [[0] * m for _ in range(n)]
    row_rem, col_rem = list(mu), list(nu)
    while any(row_rem):
        if max(row_rem) * n >= max(col_rem) * m:
            i = row_rem.index(max(row_rem))
            _spread_row(M, i, row_rem, col_rem, m)
        else:
            T = [list(r) for r in zip(*M)]
            j = col_rem.index(max(col_rem))
            _spread_row(T, j, col_rem, row_rem, n)
            M = [list(r) for r in zip(*T)]
    return np.array(M, dtype=np.int64)


def seed_heterogeneous(mu, nu) -> np.ndarray:
    """High cost-CV matrix: greedily put the largest feasible value in one cell."""
    mu, nu = _margins(mu, nu)
    n, m = len(mu), len(nu)
    M = np.zeros((n, m), dtype=np.int64)
    row_rem = np.array(mu, dtype=np.int64)
    col_rem = np.array(nu, dtype=np.int64)
    while row_rem.any():
        D = np.minimum(row_rem[:, None], col_rem[None, :])
        i, j = np.unravel_index(np.argmax(D), D.shape)
        d = D[i, j]
        M[i, j] += d
        row_rem[i] -= d
        col_rem[j] -= d
    return M


def proportional_matrix(mu, nu) -> np.ndarray:
    """The rational matrix ``mu(i) * nu(j) / N`` as floats."""
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    total = mu.sum()
    if total == 0:
        return np.zeros((mu.size, nu.size))
    return np.outer(mu, nu) / total


def seed_proportional(mu, nu, lower=None, upper=None, rng=None,
                      budget: int | None = None) -> np.ndarray:
    """Near-proportional member of the bounded space (small chi-square intent).

    Rounds ``mu(i) nu(j) / N`` to the nearest integer, clamps it into the
    bounds, then makes random +-1 single-cell repairs until every row and
    column sum matches.  Raises :class:`RepairBudgetExceeded` after
    ``budget`` repairs, which usually means the space is empty.
    """
    space = TableSpace(mu, nu, lower, upper)
    n, m = space.shape
    N = space.total
    L = space.lower
    U = space.upper
    if (L > U).any():
        raise EmptySpaceError("lower bound exceeds upper bound")
    if rng is None:
        rng = np.random.default_rng(0)
    if budget is None:
        budget = int(100 * n * m * max(1.0, math.log(max(N, 1))))
    mu_a = np.asarray(space.mu, dtype=np.int64)
    nu_a = np.asarray(space.nu, dtype=np.int64)
    if N:
        rounded = (2 * np.outer(mu_a, nu_a) + N) // (2 * N)
    else:
        rounded = np.zeros((n, m), dtype=np.int64)
    M = np.maximum(L, np.minimum(rounded, U))
    row_res = (mu_a - M.sum(axis=1)).tolist()
    col_res = (nu_a - M.sum(axis=0)).tolist()
    Ml = M.tolist()
    Ll = L.tolist()
    Ul = U.tolist()
    unbalanced = sum(map(abs, row_res)) + sum(map(abs, col_res))
    used = 0
    while unbalanced:
        if used >= budget:
            raise RepairBudgetExceeded(
                f"margins still off by {unbalanced} after {budget} repairs; "
                "the bounded space is probably empty")
        size = min(4096, budget - used)
        I = rng.integers(0, n, size).tolist()
        J = rng.integers(0, m, size).tolist()
        for i, j in zip(I, J):
            used += 1
            d = 0
            if Ml[i][j] < Ul[i][j] and (row_res[i] > 0 or col_res[j] > 0):
                d = 1
            if Ml[i][j] > Ll[i][j] and (row_res[i] < 0 or col_res[j] < 0):
                d = -1
            if d:
                unbalanced -= abs(row_res[i]) + abs(col_res[j])
                Ml[i][j] += d
                row_res[i] -= d
                col_res[j] -= d
                unbalanced += abs(row_res[i]) + abs(col_res[j])
                if not unbalanced:
                    break
    return np.array(Ml, dtype=np.int64)


SEEDS = {
    "homogeneous": lambda space, rng=None: seed_homogeneous(space.mu, space.nu),
    "heterogeneous": lambda space, rng=None: seed_heterogeneous(space.mu, space.nu),
    "proportional": lambda space, rng=None: seed_proportional(
        space.mu, space.nu, space.lower, space.upper, rng=rng),
}


def make_seed(kind: str, space: TableSpace, rng=None) -> np.ndarray:
    try:
        return SEEDS[kind](space, rng)
    except KeyError:
        raise ValueError(f"unknown seed kind {kind!r}; "
                         f"expected one of {sorted(SEEDS)}") from None
