"""Heuristics for scheduling independent tasks on unrelated machines (R||Cmax).

``M[i, j]`` is the cost of task ``i`` on machine ``j``; a machine's
completion time is the sum of the costs of its tasks and the makespan is
the largest completion time.  Ties always go to the lowest task index, then
the lowest machine index, so every heuristic is a pure function of ``M``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Schedule:
    assignment: tuple[int, ...]
    completion: tuple[int, ...]
    makespan: int

    @classmethod
    def from_assignment(cls, M, assignment) -> "Schedule":
        M = np.asarray(M)
        assignment = tuple(int(j) for j in assignment)
        completion = _completion(M, assignment)
        return cls(assignment, tuple(completion), max(completion))


def _completion(M, assignment):
    n, m = M.shape
    if len(assignment) != n:
        raise ValueError(f"{len(assignment)} tasks assigned, expected {n}")
    completion = [0] * m
    for i, j in enumerate(assignment):
        if j is None or not 0 <= j < m:
            raise ValueError(f"task {i} has no valid machine ({j})")
        completion[j] += int(M[i, j])
    return completion


def makespan(M, assignment) -> int:
    return max(_completion(np.asarray(M), list(assignment)))


def eft(M) -> Schedule:
    """Earliest finish time (MinMin): repeatedly schedule the (task, machine)
    pair that finishes first."""
    M = np.asarray(M, dtype=np.int64)
    n, m = M.shape
    completion = np.zeros(m, dtype=np.int64)
    assignment = [-1] * n
    todo = list(range(n))
    while todo:
        finish = completion[None, :] + M[todo]
        k, j = np.unravel_index(np.argmin(finish), finish.shape)
        i = todo.pop(k)
        assignment[i] = int(j)
        completion[j] += M[i, j]
    return Schedule.from_assignment(M, assignment)


def hlpt(M) -> Schedule:
    """Longest task first, by minimal cost, onto the machine where it finishes first."""
    M = np.asarray(M, dtype=np.int64)
    n, m = M.shape
    order = sorted(range(n), key=lambda i: (-M[i].min(), i))
    completion = np.zeros(m, dtype=np.int64)
    assignment = [-1] * n
    for i in order:
        j = int(np.argmin(completion + M[i]))
        assignment[i] = j
        completion[j] += M[i, j]
    return Schedule.from_assignment(M, assignment)


def _balance_key(completion):
    top = max(completion)
    rest = [c for c in completion if c != top]
    return top, completion.count(top), max(rest, default=0)


def balsuff(M, max_moves: int | None = None) -> Schedule:
    """Balance local search.

    Every task starts on its cheapest machine.  Each round looks at the most
    loaded machine and tries moving each of its tasks to every other
    machine.  Moves are ranked by resulting makespan, then by how many
    machines reach it, then by the highest completion below it.  The best
    move is applied if it lowers the makespan or, at equal makespan, the
    number of machines reaching it; otherwise the search stops.  Capped at
    ``n * m * 1000`` moves.
    """
    M = np.asarray(M, dtype=np.int64)
    n, m = M.shape
    if max_moves is None:
        max_moves = n * m * 1000
    assignment = [int(j) for j in np.argmin(M, axis=1)]
    completion = _completion(M, assignment)
    for _ in range(max_moves):
        current = _balance_key(completion)
        src = completion.index(current[0])
        best = None
        for i in range(n):
            if assignment[i] != src:
                continue
            for dst in range(m):
                if dst == src:
                    continue
                trial = list(completion)
                trial[src] -= int(M[i, src])
                trial[dst] += int(M[i, dst])
                key = (_balance_key(trial), i, dst)
                if best is None or key < best:
                    best = key
        if best is None or best[0][:2] >= current[:2]:
            break
        _, i, dst = best
        completion[src] -= int(M[i, src])
        completion[dst] += int(M[i, dst])
        assignment[i] = dst
    else:
        log.warning("balsuff stopped at its cap of %d moves", max_moves)
    return Schedule.from_assignment(M, assignment)


def brute_force_optimal(M, limit: int = 10**6) -> Schedule:
    """Exhaustive search over all ``m**n`` assignments."""
    M = np.asarray(M, dtype=np.int64)
    n, m = M.shape
    if m ** n > limit:
        raise ValueError(f"{m}**{n} assignments exceed the limit {limit}")
    best = None
    for assignment in itertools.product(range(m), repeat=n):
        span = max(_completion(M, assignment))
        if best is None or span < best[0]:
            best = (span, assignment)
    return Schedule.from_assignment(M, best[1])


HEURISTICS = {"EFT": eft, "HLPT": hlpt, "BalSuff": balsuff}
