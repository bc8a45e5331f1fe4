"""Markov chains on bounded contingency tables.

A move picks an ordered tuple ``(i0, j0, i1, j1)`` with ``i0 != i1`` and
``j0 != j1`` and adds ``+1`` at ``(i0, j0)`` and ``(i1, j1)``, ``-1`` at
``(i0, j1)`` and ``(i1, j0)``.  Row and column sums are preserved; a move
that would leave the bounds is replaced by staying put.

Two kernels are provided:

``unit``
    the move above, drawn uniformly over all ordered tuples.
``amplitude``
    after drawing the tuple, jump to a uniformly chosen matrix on the
    feasible segment ``{M + a*Delta : -down <= a <= up}``.  Every matrix on
    the segment sees the same segment, so the kernel is symmetric; ``a = 0``
    gives a self-loop.

Both kernels are symmetric, so their stationary law is uniform on every
communicating class.  The constructive pieces (:func:`stair_sequence`,
:func:`path_step`) follow the irreducibility argument: they build explicit
move sequences that strictly shrink the L1 distance between two tables.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from costgen.measures import measure_record
from costgen.tablespace import TableSpace, enumerate_space

MODES = ("unit", "amplitude")
_CHUNK = 8192


class MoveTuple(NamedTuple):
    i0: int
    j0: int
    i1: int
    j1: int

    def reversed(self) -> "MoveTuple":
        """Tuple whose move undoes this one (columns swapped)."""
        return MoveTuple(self.i0, self.j1, self.i1, self.j0)


class NoPathError(RuntimeError):
    """No distance-decreasing move sequence was found between two tables."""


@dataclass(frozen=True)
class ChainConfig:
    steps: int
    mode: str = "amplitude"
    seed: int | None = None
    thin: int = 1

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


def _check_tuple(n, m, t):
    i0, j0, i1, j1 = t
    if not (0 <= i0 < n and 0 <= i1 < n and 0 <= j0 < m and 0 <= j1 < m):
        raise IndexError(f"{t} out of range for a {n}x{m} matrix")
    if i0 == i1 or j0 == j1:
        raise ValueError(f"{t} needs distinct rows and distinct columns")


def delta(n: int, m: int, t) -> np.ndarray:
    t = MoveTuple(*t)
    _check_tuple(n, m, t)
    D = np.zeros((n, m), dtype=np.int64)
    D[t.i0, t.j0] = D[t.i1, t.j1] = 1
    D[t.i0, t.j1] = D[t.i1, t.j0] = -1
    return D


def move_range(space: TableSpace, M, t) -> tuple[int, int]:
    """``(down, up)`` such that ``M + a*delta(t)`` stays in bounds iff
    ``-down <= a <= up``."""
    i0, j0, i1, j1 = t
    L, U = space.lower, space.upper
    up = min(U[i0, j0] - M[i0, j0], U[i1, j1] - M[i1, j1],
             M[i0, j1] - L[i0, j1], M[i1, j0] - L[i1, j0])
    down = min(M[i0, j0] - L[i0, j0], M[i1, j1] - L[i1, j1],
               U[i0, j1] - M[i0, j1], U[i1, j0] - M[i1, j0])
    return int(down), int(up)


def apply_move(space: TableSpace, M, t) -> np.ndarray:
    """``M + delta(t)`` if that stays within the bounds, else a copy of ``M``."""
    M = np.array(M, dtype=np.int64)
    t = MoveTuple(*t)
    _check_tuple(*space.shape, t)
    if move_range(space, M, t)[1] >= 1:
        M[t.i0, t.j0] += 1
        M[t.i1, t.j1] += 1
        M[t.i0, t.j1] -= 1
        M[t.i1, t.j0] -= 1
    return M


def draw_tuple(n: int, m: int, rng: np.random.Generator) -> MoveTuple:
    """Uniform ordered tuple: uniform first index, uniform distinct second."""
    i0 = int(rng.integers(n))
    i1 = (i0 + int(rng.integers(1, n))) % n
    j0 = int(rng.integers(m))
    j1 = (j0 + int(rng.integers(1, m))) % m
    return MoveTuple(i0, j0, i1, j1)


def step(space: TableSpace, M, rng: np.random.Generator) -> np.ndarray:
    n, m = space.shape
    if n < 2 or m < 2:
        return np.array(M, dtype=np.int64)
    return apply_move(space, M, draw_tuple(n, m, rng))


def step_amplitude(space: TableSpace, M, rng: np.random.Generator) -> np.ndarray:
    n, m = space.shape
    M = np.array(M, dtype=np.int64)
    if n < 2 or m < 2:
        return M
    t = draw_tuple(n, m, rng)
    down, up = move_range(space, M, t)
    a = int(rng.integers(-down, up + 1))
    if a:
        M += a * delta(n, m, t)
    return M


def walk(space: TableSpace, M0, cfg: ChainConfig, *, trace: bool = False,
         rng: np.random.Generator | None = None):
    """Run ``cfg.steps`` kernel steps from ``M0``.

    With ``trace=True`` returns ``(M, records)`` where ``records`` holds a
    :class:`MeasureRecord` every ``cfg.thin`` steps, step 0 included.
    The result depends only on the inputs and ``cfg.seed`` (or ``rng``).
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    n, m = space.shape
    M = np.array(M0, dtype=np.int64).tolist()
    L = space.lower.tolist()
    U = space.upper.tolist()
    records = [measure_record(M, 0)] if trace else None
    amplitude = cfg.mode == "amplitude"
    done = 0
    if n < 2 or m < 2:
        if trace:
            records.extend(measure_record(M, s)
                           for s in range(cfg.thin, cfg.steps + 1, cfg.thin))
        return (np.array(M, dtype=np.int64), records) if trace else np.array(M)
    while done < cfg.steps:
        size = min(_CHUNK, cfg.steps - done)
        I0 = rng.integers(0, n, size)
        I1 = ((I0 + rng.integers(1, n, size)) % n).tolist()
        J0 = rng.integers(0, m, size)
        J1 = ((J0 + rng.integers(1, m, size)) % m).tolist()
        I0 = I0.tolist()
        J0 = J0.tolist()
        V = rng.random(size).tolist() if amplitude else None
        for s in range(size):
            a, b, c, d = I0[s], I1[s], J0[s], J1[s]
            ra, rb = M[a], M[b]
            up = min(U[a][c] - ra[c], U[b][d] - rb[d],
                     ra[d] - L[a][d], rb[c] - L[b][c])
            if amplitude:
                down = min(ra[c] - L[a][c], rb[d] - L[b][d],
                           U[a][d] - ra[d], U[b][c] - rb[c])
                k = int(V[s] * (up + down + 1)) - down
            else:
                k = 1 if up > 0 else 0
            if k:
                ra[c] += k
                rb[d] += k
                ra[d] -= k
                rb[c] -= k
            if trace and (done + s + 1) % cfg.thin == 0:
                records.append(measure_record(M, done + s + 1))
        done += size
    out = np.array(M, dtype=np.int64)
    return (out, records) if trace else out


def walk_batch(space: TableSpace, starts, steps: int, mode: str = "unit",
               rng: np.random.Generator | None = None) -> np.ndarray:
    """Advance many independent chains at once; ``starts`` has shape (B, n, m)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rng = np.random.default_rng() if rng is None else rng
    X = np.array(starts, dtype=np.int64)
    B = X.shape[0]
    n, m = space.shape
    if n < 2 or m < 2:
        return X
    L, U = space.lower, space.upper
    rows = np.arange(B)
    for _ in range(steps):
        i0 = rng.integers(0, n, B)
        i1 = (i0 + rng.integers(1, n, B)) % n
        j0 = rng.integers(0, m, B)
        j1 = (j0 + rng.integers(1, m, B)) % m
        x00 = X[rows, i0, j0]
        x11 = X[rows, i1, j1]
        x01 = X[rows, i0, j1]
        x10 = X[rows, i1, j0]
        up = np.minimum.reduce([U[i0, j0] - x00, U[i1, j1] - x11,
                                x01 - L[i0, j1], x10 - L[i1, j0]])
        if mode == "unit":
            k = (up > 0).astype(np.int64)
        else:
            down = np.minimum.reduce([x00 - L[i0, j0], x11 - L[i1, j1],
                                      U[i0, j1] - x01, U[i1, j0] - x10])
            k = np.floor(rng.random(B) * (up + down + 1)).astype(np.int64) - down
        X[rows, i0, j0] = x00 + k
        X[rows, i1, j1] = x11 + k
        X[rows, i0, j1] = x01 - k
        X[rows, i1, j0] = x10 - k
    return X


def all_tuples(n: int, m: int):
    for i0, i1 in itertools.permutations(range(n), 2):
        for j0, j1 in itertools.permutations(range(m), 2):
            yield MoveTuple(i0, j0, i1, j1)


def transition_matrix(space: TableSpace, mode: str = "unit", *,
                      exact: bool = False, cap: int = 20_000):
    """Exact kernel over the enumerated states.

    Returns ``(states, P)`` with ``P[x, y]`` the probability of one step from
    ``states[x]`` to ``states[y]``.  ``exact=True`` gives an object array of
    :class:`fractions.Fraction`.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    states = enumerate_space(space, cap=cap)
    index = {s.tobytes(): k for k, s in enumerate(states)}
    n, m = space.shape
    size = len(states)
    tuples = list(all_tuples(n, m))
    P = [dict() for _ in range(size)]
    if not tuples:
        for x in range(size):
            P[x][x] = Fraction(1)
    w = Fraction(1, len(tuples)) if tuples else None
    for x, s in enumerate(states):
        row = P[x]
        for t in tuples:
            down, up = move_range(space, s, t)
            if mode == "unit":
                y = index[apply_move(space, s, t).tobytes()]
                row[y] = row.get(y, 0) + w
            else:
                D = delta(n, m, t)
                share = w / (down + up + 1)
                for a in range(-down, up + 1):
                    y = index[(s + a * D).tobytes()]
                    row[y] = row.get(y, 0) + share
    if exact:
        out = np.full((size, size), Fraction(0), dtype=object)
    else:
        out = np.zeros((size, size))
    for x, row in enumerate(P):
        for y, p in row.items():
            out[x, y] = p if exact else float(p)
    return states, out


def stationary_distribution(P) -> np.ndarray:
    """Solve ``pi P = pi``, ``sum(pi) = 1`` by least squares."""
    P = np.asarray(P, dtype=float)
    k = P.shape[0]
    A = np.vstack([P.T - np.eye(k), np.ones((1, k))])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    return pi


def reachable(space: TableSpace, start) -> list[np.ndarray]:
    """All tables reachable from ``start`` by unit moves (breadth-first)."""
    start = np.array(start, dtype=np.int64)
    n, m = space.shape
    tuples = list(all_tuples(n, m))
    seen = {start.tobytes(): start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for t in tuples:
            y = apply_move(space, s, t)
            key = y.tobytes()
            if key not in seen:
                seen[key] = y
                queue.append(y)
    return list(seen.values())


def distance(A, B) -> int:
    """L1 distance between two matrices."""
    return int(np.abs(np.asarray(A, dtype=np.int64) - np.asarray(B, dtype=np.int64)).sum())


def is_stair_sequence(A, B, seq) -> bool:
    """Check the stair conditions for ``seq`` (0-based (row, col) pairs).

    Cells alternate between ``A > B`` (odd positions, counting from 1) and
    ``A < B`` (even positions, the last one included); an odd cell shares its
    row with the next one, an even cell shares its column with the next one,
    and the last cell closes on the column of the first.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    r = len(seq)
    if r < 4 or r % 2 or len(set(map(tuple, seq))) != r:
        return False
    for k, (i, j) in enumerate(seq, start=1):
        if k % 2 and not A[i, j] > B[i, j]:
            return False
        if not k % 2 and not A[i, j] < B[i, j]:
            return False
        if k < r:
            ni, nj = seq[k]
            if k % 2 and ni != i:
                return False
            if not k % 2 and nj != j:
                return False
    return seq[-1][1] == seq[0][1]


def stair_sequence(A, B, start=None) -> list[tuple[int, int]]:
    """Build a stair sequence for distinct tables ``A`` and ``B`` with equal margins.

    Starting at a cell where ``A > B`` (``start``, or the first such cell in
    row-major order), alternately step along the row to a cell where
    ``A < B`` and along the column to a cell where ``A > B``, always taking
    the lowest index, until a row or column repeats; the closed cycle is
    returned.
    """
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape != B.shape:
        raise ValueError("shape mismatch")
    D = A - B
    if not D.any():
        raise ValueError("A and B are equal")
    if (D.sum(axis=0) != 0).any() or (D.sum(axis=1) != 0).any():
        raise ValueError("A and B have different margins")
    if start is None:
        start = tuple(int(v) for v in np.argwhere(D > 0)[0])
    elif D[start] <= 0:
        raise ValueError(f"start cell {start} must have A > B")
    seq = [tuple(start)]
    rows_seen = {start[0]: 0}
    cols_seen = {start[1]: 0}
    while True:
        i, j = seq[-1]
        if len(seq) % 2:
            # along row i to a cell with A < B
            nj = int(np.flatnonzero(D[i] < 0)[0])
            seq.append((i, nj))
            if nj in cols_seen:
                s = cols_seen[nj]
                return seq if s == 0 else seq[s + 1:]
            cols_seen[nj] = len(seq) - 1
        else:
            ni = int(np.flatnonzero(D[:, j] > 0)[0])
            seq.append((ni, j))
            if ni in rows_seen:
                s = rows_seen[ni]
                return [seq[-1]] + seq[s + 1:-1]
            rows_seen[ni] = len(seq) - 1


def _feasible(space, M, t) -> bool:
    return move_range(space, M, t)[1] >= 1


def _ladder(space, A, seq):
    """Moves from the case analysis on one stair, or None if no case applies."""
    p = len(seq) // 2
    R = [seq[2 * k][0] for k in range(p)]
    C = [seq[2 * k][1] for k in range(p)]
    if len(set(R)) != p or len(set(C)) != p:
        return None
    L, U = space.lower, space.upper

    def cell(a, b):  # 1-based local coordinates
        return R[a - 1], C[b - 1]

    def tup(i0, j0, i1, j1):
        return MoveTuple(R[i0 - 1], C[j0 - 1], R[i1 - 1], C[j1 - 1])

    if p == 2:
        return [tup(1, 2, 2, 1)]
    for l in range(3, p + 1):
        x = cell(l - 2, l)
        if A[x] > L[x]:
            return [tup(l - 2, l - 1, l - 1, l)]
    for l in range(1, p):
        x = cell(l + 1, l)
        if A[x] < U[x]:
            return [tup(l, l + 1, l + 1, l)]
    x = cell(1, p)
    if A[x] < U[x]:
        return [tup(1, p, p, 1)]
    candidates = [i for i in range(1, p - 2) if A[cell(i, p)] > L[cell(i, p)]]
    if not candidates:
        return None
    i0 = max(candidates)
    return [tup(i, i + 1, i + 1, p) for i in range(i0, p - 1)]


def path_step(space: TableSpace, A, B, *, search: bool = True,
              search_cap: int = 100_000):
    """One round of the constructive path from ``A`` towards ``B``.

    Returns ``(C, moves)``: every prefix of ``moves`` applied to ``A`` stays
    in ``space`` (each move is feasible, never a hold) and
    ``distance(C, B) < distance(A, B)``.

    The moves come from the case analysis on a stair sequence, trying other
    starting cells when the first stair offers no feasible case.  Bounds that
    pin every cell around a stair (structural zeros, saturated cells) defeat
    the case analysis; with ``search=True`` a breadth-first search over unit
    moves then finds the nearest table closer to ``B``.  Raises
    :class:`NoPathError` when nothing closer is reachable, which happens when
    the bounds split the space into several classes.
    """
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if np.array_equal(A, B):
        raise ValueError("A and B are equal")
    d0 = distance(A, B)
    starts = [tuple(int(v) for v in c) for c in np.argwhere(A > B)]
    tried = set()
    for start in starts:
        seq = stair_sequence(A, B, start)
        key = frozenset(seq)
        if key in tried:
            continue
        tried.add(key)
        moves = _ladder(space, A, seq)
        if moves is None:
            continue
        C = A.copy()
        for t in moves:
            if not _feasible(space, C, t):
                break
            C = apply_move(space, C, t)
        else:
            if distance(C, B) < d0:
                return C, moves
    if search:
        found = _search_closer(space, A, B, d0, search_cap)
        if found is not None:
            return found
    raise NoPathError("no distance-decreasing move sequence from A towards B; "
                      "the bounds may disconnect them")


def _search_closer(space, A, B, d0, cap):
    n, m = space.shape
    tuples = list(all_tuples(n, m))
    parent = {A.tobytes(): None}
    queue = deque([A])
    while queue and len(parent) <= cap:
        s = queue.popleft()
        for t in tuples:
            if not _feasible(space, s, t):
                continue
            y = apply_move(space, s, t)
            key = y.tobytes()
            if key in parent:
                continue
            parent[key] = (s, t)
            if distance(y, B) < d0:
                moves = []
                cur = key
                while parent[cur] is not None:
                    prev, mv = parent[cur]
                    moves.append(mv)
                    cur = prev.tobytes()
                return y, moves[::-1]
            queue.append(y)
    return None


def path(space: TableSpace, A, B, max_rounds: int | None = None):
    """Iterate :func:`path_step` until ``B`` is reached.

    Returns the list of visited tables (``A`` first, ``B`` last) and the
    concatenated moves.
    """
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    visited = [A]
    moves = []
    limit = distance(A, B) if max_rounds is None else max_rounds
    while not np.array_equal(visited[-1], B):
        if len(visited) > limit:
            raise NoPathError("distance failed to reach zero")
        C, ms = path_step(space, visited[-1], B)
        visited.append(C)
        moves.extend(ms)
    return visited, moves
