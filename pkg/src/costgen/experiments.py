"""Experiment runners: instance generation, convergence traces, constraint
sweeps, mixing-time estimation and the heuristic benchmark.

Every replicate draws from its own stream, derived from the master seed and
the replicate index, so outputs do not depend on how many replicates run or
in which order.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from costgen.chain import ChainConfig, walk
from costgen.margins import (EmptySpaceError, VectorSpec, _as_fraction,
                             lambda_bounds, sample_vector, vector_cv)
from costgen.measures import MEASURES, measure_record
from costgen.sched import HEURISTICS
from costgen.seeds import make_seed
from costgen.tablespace import TableSpace, contains, feasible_point

log = logging.getLogger(__name__)

# mixing times estimated visually in the reference study, keyed by (n, m)
TABLE1 = {
    (5, 5): 200, (5, 10): 600, (5, 15): 1000, (10, 10): 2500,
    (10, 15): 3500, (10, 20): 6000, (25, 10): 7500, (15, 20): 8000,
    (15, 25): 13000, (20, 25): 30000, (20, 30): 50000, (40, 20): 65000,
    (40, 40): 210000,
}
SEED_KINDS = ("homogeneous", "heterogeneous", "proportional")
BENCH_SCENARIOS = ((0, 0), (0, 1), (1, 0), (0.75, 1))
SWEEP_GRID = (0, 0.2, 0.4, 0.6, 0.8, 1)


def nm_log3(n: int, m: int) -> float:
    nm = n * m
    return nm * math.log(nm) ** 3


def default_steps(n: int, m: int) -> int:
    """Chain length used when a plan does not set one.

    50 000 for 20x10; the tabulated mixing time for other tabulated sizes;
    otherwise the largest tabulated ratio to ``nm log^3(nm)`` scaled up.
    """
    if {n, m} == {20, 10}:
        return 50_000
    for key in ((n, m), (m, n)):
        if key in TABLE1:
            return TABLE1[key]
    c = max(t / nm_log3(*k) for k, t in TABLE1.items())
    return int(math.ceil(c * nm_log3(n, m)))


@dataclass
class ExperimentPlan:
    kind: str = "generate"
    rows: int = 20
    cols: int = 10
    total: int | None = None
    lambda_r: float = 0.0
    lambda_c: float = 0.0
    alpha: int | None = None
    beta: int | None = None
    seed_matrix: str = "proportional"
    steps: int | None = None
    mode: str = "amplitude"
    replicates: int = 1
    seed: int = 0
    thin: int = 100
    nonzero: bool = False
    matrix_bounds: bool = True
    out: str | None = None

    def __post_init__(self):
        if self.total is None:
            self.total = 20 * self.rows * self.cols
        if self.steps is None:
            self.steps = default_steps(self.rows, self.cols)
        for lam in (self.lambda_r, self.lambda_c):
            if not 0 <= lam <= 1:
                raise ValueError(f"lambda must lie in [0, 1], got {lam}")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")


def replicate_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def margin_specs(plan: ExperimentPlan) -> tuple[VectorSpec, VectorSpec]:
    """Bounds on the row and column sums implied by ``plan``."""
    n, m, N = plan.rows, plan.cols, plan.total
    row = lambda_bounds(N, n, plan.lambda_r)
    col = lambda_bounds(N, m, plan.lambda_c)
    if plan.alpha is not None or plan.beta is not None:
        lo = plan.alpha if plan.alpha is not None else 0
        hi = plan.beta if plan.beta is not None else N
        row = VectorSpec(N, n, lo, hi)
        col = VectorSpec(N, m, lo, hi)
    if plan.nonzero:
        # every row must hold m ones, every column n ones
        row = VectorSpec(N, n, max(row.lo, m), row.hi)
        col = VectorSpec(N, m, max(col.lo, n), col.hi)
    return row, col


def matrix_bounds(mu, nu, lam, nonzero: bool = False):
    """``lower = floor(lam * P)``, ``upper = ceil(P / lam)`` around the
    proportional matrix ``P = mu nu^T / N``; ``lam = 0`` means [0, N]."""
    mu = np.asarray(mu, dtype=np.int64)
    nu = np.asarray(nu, dtype=np.int64)
    N = int(mu.sum())
    lam = _as_fraction(lam)
    P = np.outer(mu, nu)
    if lam == 0 or N == 0:
        lower = np.zeros_like(P)
        upper = np.full_like(P, N)
    else:
        p, q = lam.numerator, lam.denominator
        lower = (p * P) // (q * N)
        upper = np.minimum(-((-q * P) // (p * N)), N)
    if nonzero:
        lower = np.maximum(lower, 1)
    return lower, upper


def build_space(plan: ExperimentPlan, rng) -> TableSpace:
    """Sample margins for ``plan`` and attach the matrix bounds.

    Margins admitting no matrix are redrawn, up to 100 times.
    """
    row_spec, col_spec = margin_specs(plan)
    lam = max(plan.lambda_r, plan.lambda_c) if plan.matrix_bounds else 0
    for _ in range(100):
        mu = sample_vector(row_spec, rng).entries
        nu = sample_vector(col_spec, rng).entries
        lower, upper = matrix_bounds(mu, nu, lam, plan.nonzero)
        space = TableSpace(mu, nu, lower, upper)
        if feasible_point(space) is not None:
            return space
    raise EmptySpaceError("100 margin draws all gave an empty matrix space")


@dataclass
class Instance:
    space: TableSpace
    entries: np.ndarray
    replicate: int = 0
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = self.space.to_dict(self.entries)
        d["replicate"] = self.replicate
        d.update(self.meta)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        space = TableSpace.from_dict(d)
        entries = np.asarray(d["entries"], dtype=np.int64)
        if not contains(space, entries):
            raise ValueError("entries are not a member of the declared space")
        skip = {"n", "m", "mu", "nu", "lower", "upper", "entries", "replicate"}
        meta = {k: v for k, v in d.items() if k not in skip}
        return cls(space, entries, d.get("replicate", 0), meta)


def generate_instance(plan: ExperimentPlan, replicate: int = 0) -> Instance:
    rng = replicate_rng(plan.seed, replicate)
    space = build_space(plan, rng)
    M0 = make_seed(plan.seed_matrix, space, rng)
    if not contains(space, M0):
        raise EmptySpaceError(
            f"{plan.seed_matrix} seed ignores the bounds of this space")
    M = walk(space, M0, ChainConfig(plan.steps, plan.mode), rng=rng)
    meta = {"seed": plan.seed, "mode": plan.mode, "steps": plan.steps,
            "seed_matrix": plan.seed_matrix, "lambda_r": plan.lambda_r,
            "lambda_c": plan.lambda_c, "nonzero": plan.nonzero}
    return Instance(space, M, replicate, meta)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


class _Generate:
    def __init__(self, plan):
        self.plan = plan

    def __call__(self, r):
        return generate_instance(self.plan, r)


def cmd_generate(plan: ExperimentPlan, workers: int = 1) -> list[Instance]:
    instances = _map(_Generate(plan), range(plan.replicates), workers)
    if plan.out:
        docs = [inst.to_dict() for inst in instances]
        payload = docs[0] if len(docs) == 1 else docs
        Path(plan.out).write_text(json.dumps(payload) + "\n")
    return instances


def read_instances(path) -> list[Instance]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = [data]
    return [Instance.from_dict(d) for d in data]


TRACE_COLUMNS = ("replicate", "seed_matrix", "step") + MEASURES


def _fmt(v):
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return v


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def trace_replicate(plan: ExperimentPlan, replicate: int, kinds=SEED_KINDS):
    """Chains from each seed kind over one shared space; ``{kind: records}``."""
    rng = replicate_rng(plan.seed, replicate)
    space = build_space(plan, rng)
    out = {}
    for k, kind in enumerate(kinds):
        chain_rng = replicate_rng(plan.seed, replicate, k + 1)
        M0 = make_seed(kind, space, chain_rng)
        if not contains(space, M0):
            raise EmptySpaceError(f"{kind} seed ignores the bounds of this space")
        _, records = walk(space, M0, ChainConfig(plan.steps, plan.mode,
                                                 thin=plan.thin),
                          trace=True, rng=chain_rng)
        out[kind] = records
    return out


class _Trace:
    def __init__(self, plan):
        self.plan = plan

    def __call__(self, r):
        return trace_replicate(self.plan, r)


def cmd_trace(plan: ExperimentPlan, workers: int = 1) -> list[tuple]:
    traces = _map(_Trace(plan), range(plan.replicates), workers)
    rows = []
    for r, by_kind in enumerate(traces):
        for kind, records in by_kind.items():
            for rec in records:
                rows.append((r, kind, rec.step) + rec.values())
    if plan.out:
        write_csv(plan.out, TRACE_COLUMNS, rows)
    return rows


def mixing_estimate(traces, tol: float = 0.10, window: int = 10,
                    z: float = 3.3):
    """First step from which the seed groups agree on every measure.

    ``traces`` is a list (one per replicate) of ``{kind: [MeasureRecord]}``
    sharing the same thinned steps.  At each step the per-kind means over
    replicates are compared.  Their spread (max - min) must stay within
    ``tol`` times the pooled mean for CVs and chi-square (``tol`` itself for
    correlations, whose scale is fixed), or within ``z`` standard errors
    when sampling noise alone is larger than that.  Agreement must hold for
    ``window`` consecutive samples.  Returns None if it never does.
    """
    kinds = list(traces[0])
    steps = [rec.step for rec in traces[0][kinds[0]]]
    # values[kind, replicate, t, measure]
    values = np.array([[[rec.values() for rec in tr[kind]] for tr in traces]
                       for kind in kinds], dtype=float)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        means = np.nanmean(values, axis=1)
        count = np.maximum((~np.isnan(values)).sum(axis=1), 1)
        se = np.nanstd(values, axis=1) / np.sqrt(count)
        ok = np.ones(len(steps), dtype=bool)
        for q, name in enumerate(MEASURES):
            g = means[:, :, q]
            defined = ~np.isnan(g).any(axis=0)
            spread = np.nan_to_num(g.max(axis=0) - g.min(axis=0))
            if name.endswith("corr"):
                scale = np.ones(len(steps))
            else:
                scale = np.abs(g.mean(axis=0))
            noise = z * np.sqrt(np.mean(se[:, :, q] ** 2, axis=0))
            limit = np.nan_to_num(np.maximum(tol * scale, noise))
            ok &= ~defined | (spread <= limit)
    run = 0
    for t, good in enumerate(ok):
        run = run + 1 if good else 0
        if run >= window:
            return steps[t - window + 1]
    return None


@dataclass
class MixingResult:
    n: int
    m: int
    estimate: int | None
    reference: int | None
    budget: int
    thin: int


def cmd_mixing(plan: ExperimentPlan, sizes=None, tol: float = 0.10,
               window: int = 10, z: float = 3.3,
               workers: int = 1) -> list[MixingResult]:
    """Automated stand-in for reading convergence off trace plots.

    For each size, ``plan.replicates`` margin pairs are drawn without
    constraints (``N = 20 n m``) and chains run from the three seed kinds.
    The chain budget is ``plan.steps`` when the size matches the plan,
    otherwise ``2 nm log^3(nm)``; traces are thinned to about 400 samples.
    """
    sizes = sizes or [(plan.rows, plan.cols)]
    results = []
    for n, m in sizes:
        if (n, m) == (plan.rows, plan.cols) and plan.steps != default_steps(n, m):
            budget = plan.steps
        else:
            budget = int(math.ceil(2 * nm_log3(n, m)))
        thin = max(1, budget // 400)
        sub = replace(plan, rows=n, cols=m, total=20 * n * m, steps=budget,
                      thin=thin)
        traces = _map(_Trace(sub), range(plan.replicates), workers)
        est = mixing_estimate(traces, tol, window, z)
        ref = TABLE1.get((n, m), TABLE1.get((m, n)))
        results.append(MixingResult(n, m, est, ref, budget, thin))
    if plan.out:
        write_csv(plan.out, ("n", "m", "estimate", "reference", "budget", "thin"),
                  [(r.n, r.m, "" if r.estimate is None else r.estimate,
                    "" if r.reference is None else r.reference, r.budget, r.thin)
                   for r in results])
    return results


SWEEP_COLUMNS = ("lambda_r", "lambda_c", "replicate", "measure", "value")


def sweep_cell(plan: ExperimentPlan, lr, lc, replicate: int) -> dict:
    inst = generate_instance(replace(plan, lambda_r=lr, lambda_c=lc), replicate)
    rec = measure_record(inst.entries)
    out = dict(zip(MEASURES, rec.values()))
    out["mu_cv"] = vector_cv(inst.space.mu)
    out["nu_cv"] = vector_cv(inst.space.nu)
    return out


def cmd_sweep(plan: ExperimentPlan, grid=SWEEP_GRID, cells=None) -> list[tuple]:
    """Measures of stationary matrices over a grid of (lambda_r, lambda_c).

    ``cells`` overrides the full cartesian product of ``grid``.
    """
    cells = cells or [(lr, lc) for lr in grid for lc in grid]
    rows = []
    for lr, lc in cells:
        for r in range(plan.replicates):
            for name, value in sweep_cell(plan, lr, lc, r).items():
                rows.append((lr, lc, r, name, value))
    if plan.out:
        write_csv(plan.out, SWEEP_COLUMNS, rows)
    return rows


BENCH_COLUMNS = ("instance_id", "lambda_r", "lambda_c", "heuristic",
                 "makespan", "ratio_to_best")


def ratio_to_best(span: int, best: int) -> float:
    # an all-zero optimum happens on tiny instances without a cell floor
    if best == 0:
        return 1.0 if span == 0 else math.inf
    return span / best


def bench_instance(M) -> dict[str, int]:
    return {name: fn(M).makespan for name, fn in HEURISTICS.items()}


def cmd_bench(plan: ExperimentPlan, scenarios=BENCH_SCENARIOS,
              workers: int = 1) -> list[tuple]:
    rows = []
    for lr, lc in scenarios:
        sub = replace(plan, lambda_r=lr, lambda_c=lc)
        instances = _map(_Generate(sub), range(plan.replicates), workers)
        for inst in instances:
            spans = bench_instance(inst.entries)
            best = min(spans.values())
            for name, span in spans.items():
                rows.append((inst.replicate, lr, lc, name, span,
                             ratio_to_best(span, best)))
    if plan.out:
        write_csv(plan.out, BENCH_COLUMNS, rows)
    return rows
