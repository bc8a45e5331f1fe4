"""Exact counting and uniform sampling of bounded integer vectors with a fixed sum.

These vectors are the row sums (task costs) and column sums (machine loads)
of a cost matrix.  Counting uses arbitrary-precision integers, so sampling is
exactly uniform whatever the size of the set.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np


class EmptySpaceError(ValueError):
    """Raised when a set of vectors or matrices to sample from is empty."""


@dataclass(frozen=True)
class VectorSpec:
    """Vectors of ``length`` integers in ``[lo, hi]`` summing to ``total``."""

    total: int
    length: int
    lo: int = 0
    hi: int | None = None

    def __post_init__(self):
        if self.hi is None:
            object.__setattr__(self, "hi", self.total)
        if min(self.total, self.length, self.lo, self.hi) < 0:
            raise ValueError(f"negative field in {self}")

    @property
    def feasible(self) -> bool:
        return (self.lo <= self.hi and self.length * self.lo <= self.total
                <= self.length * self.hi)

    def to_dict(self) -> dict:
        return {"total": self.total, "length": self.length,
                "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class MarginVector:
    entries: tuple[int, ...]
    spec: VectorSpec

    def __post_init__(self):
        entries = tuple(int(v) for v in self.entries)
        object.__setattr__(self, "entries", entries)
        if len(entries) != self.spec.length or sum(entries) != self.spec.total:
            raise ValueError(f"{entries} does not match {self.spec}")
        if any(v < self.spec.lo or v > self.spec.hi for v in entries):
            raise ValueError(f"{entries} violates bounds of {self.spec}")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def to_json(self) -> str:
        return json.dumps({"spec": self.spec.to_dict(),
                           "entries": list(self.entries)})

    def to_csv_line(self) -> str:
        return ",".join(str(v) for v in self.entries)


class CountTable:
    """Table of ``h[k][s]``: number of k-vectors with entries in [lo, hi] summing to s.

    Rows are stored for ``0 <= k <= length`` and ``0 <= s <= total``, with
    prefix sums kept alongside so that both the recursion and the sequential
    sampler cost O(1) (resp. O(log total)) big-integer operations per lookup.
    The table is never mutated after construction.
    """

    def __init__(self, lo: int, hi: int, total: int, length: int):
        self.lo, self.hi, self.total, self.length = lo, hi, total, length
        width = total + 1
        row = [0] * width
        row[0] = 1
        rows = [row]
        prefixes = [_prefix(row)]
        for _ in range(length):
            prev = prefixes[-1]
            row = [0] * width
            if lo <= hi:
                for s in range(lo, width):
                    # h_k(s) = sum_{v=lo..hi} h_{k-1}(s - v)
                    top = s - lo
                    bottom = s - hi - 1
                    row[s] = prev[top] - (prev[bottom] if bottom >= 0 else 0)
            rows.append(row)
            prefixes.append(_prefix(row))
        self.values = rows
        self._prefix = prefixes

    def count(self, total: int, length: int) -> int:
        if total < 0 or total > self.total or length > self.length:
            return 0
        return self.values[length][total]

    def cumulative(self, length: int, upto: int) -> int:
        """Sum of ``h[length][s]`` for ``0 <= s <= upto``."""
        if upto < 0:
            return 0
        return self._prefix[length][min(upto, self.total)]


def _prefix(row):
    out = []
    acc = 0
    for v in row:
        acc += v
        out.append(acc)
    return out


@lru_cache(maxsize=64)
def count_table(lo: int, hi: int, total: int, length: int) -> CountTable:
    return CountTable(lo, hi, total, length)


def count_vectors(spec: VectorSpec) -> int:
    """Exact number of vectors matching ``spec``; 0 when infeasible."""
    if not spec.feasible:
        return 0
    hi = min(spec.hi, spec.total)
    return count_table(spec.lo, hi, spec.total, spec.length).count(
        spec.total, spec.length)


def uniform_bigint(bound: int, rng: np.random.Generator) -> int:
    """Uniform integer in ``[0, bound)`` for arbitrarily large ``bound``."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound <= 2**62:
        return int(rng.integers(0, bound))
    nbits = (bound - 1).bit_length()
    nbytes = (nbits + 7) // 8
    mask = (1 << nbits) - 1
    while True:
        r = int.from_bytes(rng.bytes(nbytes), "little") & mask
        if r < bound:
            return r


def sample_vector(spec: VectorSpec, rng: np.random.Generator) -> MarginVector:
    """Draw one vector uniformly from those matching ``spec``.

    Entries are drawn left to right; with ``R`` left to distribute over ``L``
    positions the next entry is ``v`` with probability ``h[L-1](R-v) / h[L](R)``.
    """
    if not spec.feasible:
        raise EmptySpaceError(f"no vector matches {spec}")
    lo = spec.lo
    hi = min(spec.hi, spec.total)
    table = count_table(lo, hi, spec.total, spec.length)
    entries = []
    remaining = spec.total
    for left in range(spec.length, 0, -1):
        r = uniform_bigint(table.count(remaining, left), rng)
        # the mass of values lo..x is C(remaining-lo) - C(remaining-x-1),
        # with C the prefix sums of row left-1; find the smallest x whose
        # mass exceeds r
        cum = table._prefix[left - 1]
        top = table.cumulative(left - 1, remaining - lo)
        target = top - r
        # C is nondecreasing; we need the largest index t = remaining-x-1
        # with C(t) < target
        t_max = remaining - lo - 1
        t_min = max(remaining - hi - 1, -1)
        t = bisect_left(cum, target, 0, t_max + 1) - 1 if t_max >= 0 else -1
        t = max(t, t_min)
        value = remaining - t - 1
        entries.append(value)
        remaining -= value
    return MarginVector(tuple(entries), spec)


def enumerate_vectors(spec: VectorSpec) -> list[tuple[int, ...]]:
    """All vectors matching ``spec``, in lexicographic order (small specs only)."""
    out = []

    def rec(prefix, remaining, left):
        if left == 0:
            if remaining == 0:
                out.append(tuple(prefix))
            return
        for v in range(spec.lo, min(spec.hi, remaining) + 1):
            prefix.append(v)
            rec(prefix, remaining - v, left - 1)
            prefix.pop()

    if spec.lo <= spec.hi:
        rec([], spec.total, spec.length)
    return out


def _as_fraction(lam) -> Fraction:
    if isinstance(lam, Fraction):
        return lam
    if isinstance(lam, float):
        return Fraction(lam).limit_denominator(10**6)
    return Fraction(lam)


def lambda_bounds(total: int, length: int, lam) -> VectorSpec:
    """Bounds ``lo = floor(lam*total/length)``, ``hi = ceil(total/(lam*length))``.

    ``lam = 0`` leaves the vector unconstrained (``hi`` is capped at ``total``).
    """
    lam = _as_fraction(lam)
    if not 0 <= lam <= 1:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    lo = math.floor(lam * total / length)
    if lam == 0:
        hi = total
    else:
        hi = min(math.ceil(Fraction(total) / (lam * length)), total)
    return VectorSpec(total=total, length=length, lo=lo, hi=hi)


def vector_cv(v) -> float:
    """Coefficient of variation (population standard deviation over mean)."""
    v = np.asarray(v, dtype=float)
    mean = v.mean()
    if mean == 0:
        return math.nan
    return float(v.std() / mean)
