"""State space of margin-fixed, bound-constrained integer matrices.

Rows are tasks and columns are machines throughout: ``mu`` holds the row
sums and ``nu`` the column sums.  Every constraint layer (none, global
min/max, per-row and per-column min/max) is normalized to elementwise
``lower``/``upper`` matrices.
"""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_TOTAL = 2**40


class SpaceTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class Global:
    """Same ``[alpha, beta]`` bound on every cell."""
    alpha: int
    beta: int


@dataclass(frozen=True)
class RowCol:
    """Per-column bounds (length m) and per-row bounds (length n)."""
    col_lo: Sequence[int]
    col_hi: Sequence[int]
    row_lo: Sequence[int]
    row_hi: Sequence[int]


@dataclass(frozen=True)
class Elementwise:
    lower: np.ndarray
    upper: np.ndarray


class TableSpace:
    """Integer n x m matrices with row sums ``mu``, column sums ``nu`` and
    ``lower <= M <= upper`` cellwise.

    Construction never decides emptiness; seeding and sampling report it.
    """

    def __init__(self, mu, nu, lower=None, upper=None):
        self.mu = tuple(int(v) for v in mu)
        self.nu = tuple(int(v) for v in nu)
        if not self.mu or not self.nu:
            raise ValueError("margins must be nonempty")
        if min(self.mu + self.nu) < 0:
            raise ValueError("margins must be nonnegative")
        if sum(self.mu) != sum(self.nu):
            raise ValueError(f"row sums {sum(self.mu)} != column sums {sum(self.nu)}")
        if self.total > MAX_TOTAL:
            raise ValueError(f"total {self.total} exceeds 2**40")
        shape = (self.n, self.m)
        self.lower = _full(lower, shape, 0)
        self.upper = _full(upper, shape, self.total)
        self.lower.setflags(write=False)
        self.upper.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def m(self) -> int:
        return len(self.nu)

    @property
    def total(self) -> int:
        return sum(self.mu)

    @property
    def shape(self):
        return (self.n, self.m)

    def __repr__(self):
        return (f"TableSpace(mu={self.mu}, nu={self.nu}, "
                f"lower={self.lower.tolist()}, upper={self.upper.tolist()})")

    def __eq__(self, other):
        return (isinstance(other, TableSpace) and self.mu == other.mu
                and self.nu == other.nu
                and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    def __hash__(self):
        return hash((self.mu, self.nu, self.lower.tobytes(), self.upper.tobytes()))

    def to_dict(self, entries=None) -> dict:
        d = {"n": self.n, "m": self.m, "mu": list(self.mu), "nu": list(self.nu),
             "lower": _compact(self.lower), "upper": _compact(self.upper)}
        if entries is not None:
            d["entries"] = np.asarray(entries).tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TableSpace":
        space = cls(d["mu"], d["nu"], d.get("lower"), d.get("upper"))
        if (d.get("n", space.n), d.get("m", space.m)) != space.shape:
            raise ValueError("n/m disagree with margin lengths")
        return space


def _full(value, shape, default) -> np.ndarray:
    if value is None:
        return np.full(shape, default, dtype=np.int64)
    arr = np.asarray(value, dtype=np.int64)
    if arr.ndim == 0:
        return np.full(shape, int(arr), dtype=np.int64)
    if arr.shape != shape:
        raise ValueError(f"bound matrix has shape {arr.shape}, expected {shape}")
    return arr.copy()


def _compact(a: np.ndarray):
    flat = a.ravel()
    if flat.size and (flat == flat[0]).all():
        return int(flat[0])
    return a.tolist()


def reduce_constraints(mu, nu, constraint=None) -> TableSpace:
    """Build the space for ``constraint`` in elementwise form.

    ``constraint`` is None (cells in [0, N]), a :class:`Global`, a
    :class:`RowCol` or an :class:`Elementwise`.
    """
    n, m = len(mu), len(nu)
    if constraint is None:
        return TableSpace(mu, nu)
    if isinstance(constraint, Global):
        return TableSpace(mu, nu, constraint.alpha, constraint.beta)
    if isinstance(constraint, RowCol):
        col_lo = np.asarray(constraint.col_lo, dtype=np.int64)
        col_hi = np.asarray(constraint.col_hi, dtype=np.int64)
        row_lo = np.asarray(constraint.row_lo, dtype=np.int64)
        row_hi = np.asarray(constraint.row_hi, dtype=np.int64)
        if col_lo.shape != (m,) or col_hi.shape != (m,):
            raise ValueError(f"column bounds must have length {m}")
        if row_lo.shape != (n,) or row_hi.shape != (n,):
            raise ValueError(f"row bounds must have length {n}")
        lower = np.maximum(col_lo[None, :], row_lo[:, None])
        upper = np.minimum(col_hi[None, :], row_hi[:, None])
        return TableSpace(mu, nu, lower, upper)
    if isinstance(constraint, Elementwise):
        return TableSpace(mu, nu, constraint.lower, constraint.upper)
    raise TypeError(f"unknown constraint {constraint!r}")


def contains(space: TableSpace, M) -> bool:
    M = np.asarray(M)
    if M.shape != space.shape:
        return False
    if not np.issubdtype(M.dtype, np.integer):
        if not np.array_equal(M, np.round(M)):
            return False
        M = M.astype(np.int64)
    if (M < space.lower).any() or (M > space.upper).any():
        return False
    return (tuple(M.sum(axis=1).tolist()) == space.mu
            and tuple(M.sum(axis=0).tolist()) == space.nu)


def enumerate_space(space: TableSpace, cap: int = 100_000) -> list[np.ndarray]:
    """Every member of ``space`` in row-major lexicographic order.

    Backtracks over cells, pruning with the bound sums of the cells left in
    the current row and column.  Raises :class:`SpaceTooLarge` beyond ``cap``.
    """
    n, m = space.shape
    lo = space.lower.tolist()
    hi = space.upper.tolist()
    # sums over the cells to the right in the row / below in the column
    row_lo_after = [[sum(lo[i][j + 1:]) for j in range(m)] for i in range(n)]
    row_hi_after = [[sum(hi[i][j + 1:]) for j in range(m)] for i in range(n)]
    col_lo_after = [[sum(lo[k][j] for k in range(i + 1, n)) for j in range(m)]
                    for i in range(n)]
    col_hi_after = [[sum(hi[k][j] for k in range(i + 1, n)) for j in range(m)]
                    for i in range(n)]
    row_rem = list(space.mu)
    col_rem = list(space.nu)
    cur = [[0] * m for _ in range(n)]
    out = []

    def rec(cell):
        if cell == n * m:
            out.append(np.array(cur, dtype=np.int64))
            if len(out) > cap:
                raise SpaceTooLarge(f"space has more than {cap} states")
            return
        i, j = divmod(cell, m)
        r, c = row_rem[i], col_rem[j]
        a = max(lo[i][j], r - row_hi_after[i][j], c - col_hi_after[i][j])
        b = min(hi[i][j], r - row_lo_after[i][j], c - col_lo_after[i][j])
        for x in range(a, b + 1):
            cur[i][j] = x
            row_rem[i] = r - x
            col_rem[j] = c - x
            rec(cell + 1)
        row_rem[i] = r
        col_rem[j] = c
        cur[i][j] = 0

    rec(0)
    return out


def matrix_to_csv(M) -> str:
    """CSV text of ``M`` with a header row of machine (column) indices."""
    M = np.asarray(M)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(range(M.shape[1]))
    w.writerows(M.tolist())
    return buf.getvalue()


def feasible_point(space: TableSpace) -> np.ndarray | None:
    """Some member of ``space``, or None when the space is empty.

    Decided exactly as a bipartite max-flow over the slack ``upper - lower``.
    """
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_flow

    n, m = space.shape
    lower, upper = space.lower, space.upper
    if (lower > upper).any() or (lower < 0).any():
        return None
    row_need = np.asarray(space.mu) - lower.sum(axis=1)
    col_need = np.asarray(space.nu) - lower.sum(axis=0)
    if (row_need < 0).any() or (col_need < 0).any():
        return None
    if space.total >= 2**31:
        raise ValueError("feasibility check limited to totals below 2**31")
    need = int(row_need.sum())
    if need == 0:
        return lower.copy()
    src, sink = 0, n + m + 1
    rows, cols, caps = [], [], []
    for i in range(n):
        if row_need[i]:
            rows.append(src); cols.append(1 + i); caps.append(row_need[i])
        for j in range(m):
            slack = upper[i, j] - lower[i, j]
            if slack:
                rows.append(1 + i); cols.append(1 + n + j); caps.append(slack)
    for j in range(m):
        if col_need[j]:
            rows.append(1 + n + j); cols.append(sink); caps.append(col_need[j])
    graph = csr_matrix((np.asarray(caps, dtype=np.int32), (rows, cols)),
                       shape=(n + m + 2, n + m + 2))
    res = maximum_flow(graph, src, sink)
    if res.flow_value != need:
        return None
    flow = res.flow.toarray()[1:1 + n, 1 + n:1 + n + m]
    return lower + np.maximum(flow, 0).astype(np.int64)


def is_empty(space: TableSpace) -> bool:
    return feasible_point(space) is None
