"""Watching three very different starting matrices forget where they began.

Chains start from a homogeneous matrix (flat costs), a heterogeneous one
(costs piled on a staircase) and the proportional one.  After enough moves
their measures overlap, which is how the chain length is chosen.

    python demos/convergence_trace.py [--rows 10 --cols 10 --replicates 10]
"""

import argparse
import math
import warnings

import numpy as np

from costgen import experiments as ex

parser = argparse.ArgumentParser()
parser.add_argument("--rows", type=int, default=10)
parser.add_argument("--cols", type=int, default=10)
parser.add_argument("--replicates", type=int, default=10)
args = parser.parse_args()

n, m = args.rows, args.cols
steps = int(math.ceil(2 * ex.nm_log3(n, m)))
plan = ex.ExperimentPlan(rows=n, cols=m, steps=steps, thin=max(1, steps // 20),
                         replicates=args.replicates, seed=4)
rows = ex.cmd_trace(plan)

# Long format: (replicate, seed kind, step, measures...).  Average the cost CV
# over replicates for each seed kind and step.
col = ex.TRACE_COLUMNS.index("cost_cv")
table = {}
for r in rows:
    table.setdefault((r[2], r[1]), []).append(r[col])

print(f"{n}x{m}, N={20 * n * m}, mean cost CV over {args.replicates} replicates")
print(f"{'step':>7}" + "".join(f"{k:>15}" for k in ex.SEED_KINDS))
for s in sorted({k[0] for k in table}):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        vals = [np.nanmean(table[(s, k)]) for k in ex.SEED_KINDS]
    print(f"{s:7d}" + "".join(f"{v:15.3f}" for v in vals))

# The automated reading of the same kind of traces.
res = ex.cmd_mixing(ex.ExperimentPlan(rows=n, cols=m, replicates=args.replicates * 2,
                                      seed=4))[0]
ref = "" if res.reference is None else f" (tabulated: {res.reference})"
print(f"\nestimated mixing time: {res.estimate}{ref}")
