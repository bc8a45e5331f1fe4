"""How the lambda constraints shape the generated matrices.

lambda_r pulls the task totals towards each other, lambda_c does the same for
machine totals; the cell bounds follow the larger of the two.  At (1, 1)
every cost is identical.

    python demos/constraint_sweep.py [--replicates 5 --steps 20000]
"""

import argparse
import warnings
from collections import defaultdict

import numpy as np

from costgen import experiments as ex

parser = argparse.ArgumentParser()
parser.add_argument("--replicates", type=int, default=5)
parser.add_argument("--steps", type=int, default=20_000)
args = parser.parse_args()

plan = ex.ExperimentPlan(rows=20, cols=10, steps=args.steps, nonzero=True,
                         replicates=args.replicates, seed=6)
cells = [(0, 0), (0.5, 0), (1, 0), (0, 0.5), (0, 1), (0.75, 1), (1, 1)]
rows = ex.cmd_sweep(plan, cells=cells)

values = defaultdict(list)
for lr, lc, _, name, v in rows:
    values[(lr, lc, name)].append(v)

names = ("mu_cv", "nu_cv", "cost_cv", "row_cv", "col_cv", "row_corr", "col_corr")
print(f"{'(lr, lc)':>11}" + "".join(f"{k:>10}" for k in names))
with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    for lr, lc in cells:
        means = [np.nanmean(values[(lr, lc, k)]) for k in names]
        print(f"{str((lr, lc)):>11}" + "".join(f"{v:10.3f}" for v in means))
print("(nan: correlation undefined because rows or columns are constant)")
