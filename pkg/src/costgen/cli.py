"""Command-line entry point: ``costgen {generate,trace,sweep,mixing,bench}``.

Exit codes: 0 on success, 2 when the requested space is infeasible, 3 when a
chain fails to converge or a repair budget runs out.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from costgen import experiments as ex
from costgen.margins import EmptySpaceError
from costgen.seeds import RepairBudgetExceeded

EXIT_INFEASIBLE = 2
EXIT_NONCONVERGENCE = 3

# replicate counts used when --replicates is not given
DEFAULT_REPLICATES = {"generate": 1, "trace": 30, "sweep": 30, "mixing": 40,
                      "bench": 100}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _sizes(text: str) -> list[tuple[int, int]]:
    out = []
    for item in text.split(","):
        n, m = item.lower().split("x")
        out.append((int(n), int(m)))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rows", type=int, default=20, help="tasks (n)")
    common.add_argument("--cols", type=int, default=10, help="machines (m)")
    common.add_argument("--total", type=int, help="sum of all costs (default 20nm)")
    common.add_argument("--lambda-r", type=float, default=0.0)
    common.add_argument("--lambda-c", type=float, default=0.0)
    common.add_argument("--alpha", type=int, help="explicit lower bound on every margin")
    common.add_argument("--beta", type=int, help="explicit upper bound on every margin")
    common.add_argument("--steps", type=int, help="chain length (default by size)")
    common.add_argument("--mode", choices=("unit", "amplitude"), default="amplitude")
    common.add_argument("--seed", type=int, help="master seed (falls back to $COSTGEN_SEED, then 0)")
    common.add_argument("--replicates", type=int)
    common.add_argument("--thin", type=int, default=100, help="record every THIN steps")
    common.add_argument("--nonzero", action="store_true", help="force every cost >= 1")
    common.add_argument("--seed-matrix", default="proportional",
                        choices=("homogeneous", "heterogeneous", "proportional"))
    common.add_argument("--out", help="output file (JSON for generate, CSV otherwise)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="costgen", description="Uniform random cost matrices for scheduling experiments.")
    sub = parser.add_subparsers(dest="kind", required=True)
    sub.add_parser("generate", parents=[common], help="write random instances as JSON")
    sub.add_parser("trace", parents=[common], help="measure traces from the three seeds")
    sweep = sub.add_parser("sweep", parents=[common], help="measures over a lambda grid")
    sweep.add_argument("--grid", type=_floats, default=ex.SWEEP_GRID,
                       help="comma-separated lambda values (default 0,0.2,...,1)")
    sweep.add_argument("--margins-only", action="store_true",
                       help="bound the margins but not the cells")
    mixing = sub.add_parser("mixing", parents=[common], help="estimate mixing times")
    mixing.add_argument("--sizes", type=_sizes,
                        help="comma-separated NxM sizes (default --rows x --cols)")
    mixing.add_argument("--tol", type=float, default=0.10)
    mixing.add_argument("--window", type=int, default=10)
    sub.add_parser("bench", parents=[common], help="EFT/HLPT/BalSuff makespan ratios")
    return parser


def plan_from_args(args) -> ex.ExperimentPlan:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("COSTGEN_SEED", 0))
    replicates = args.replicates or DEFAULT_REPLICATES[args.kind]
    return ex.ExperimentPlan(
        kind=args.kind, rows=args.rows, cols=args.cols, total=args.total,
        lambda_r=args.lambda_r, lambda_c=args.lambda_c, alpha=args.alpha,
        beta=args.beta, seed_matrix=args.seed_matrix, steps=args.steps,
        mode=args.mode, replicates=replicates, seed=seed, thin=args.thin,
        nonzero=args.nonzero,
        matrix_bounds=not getattr(args, "margins_only", False), out=args.out)


def _print_rows(header, rows):
    print(",".join(header))
    for row in rows:
        print(",".join(str(ex._fmt(v)) for v in row))


def run(args) -> int:
    plan = plan_from_args(args)
    if args.kind == "generate":
        instances = ex.cmd_generate(plan, workers=args.workers)
        if not plan.out:
            import json
            docs = [inst.to_dict() for inst in instances]
            print(json.dumps(docs[0] if len(docs) == 1 else docs))
    elif args.kind == "trace":
        rows = ex.cmd_trace(plan, workers=args.workers)
        if not plan.out:
            _print_rows(ex.TRACE_COLUMNS, rows)
    elif args.kind == "sweep":
        rows = ex.cmd_sweep(plan, grid=args.grid)
        if not plan.out:
            _print_rows(ex.SWEEP_COLUMNS, rows)
    elif args.kind == "mixing":
        results = ex.cmd_mixing(plan, sizes=args.sizes, tol=args.tol,
                                window=args.window, workers=args.workers)
        for r in results:
            est = "none" if r.estimate is None else r.estimate
            print(f"{r.n}x{r.m}: estimate={est} reference={r.reference} "
                  f"budget={r.budget}")
        if any(r.estimate is None for r in results):
            print("no agreement within the step budget", file=sys.stderr)
            return EXIT_NONCONVERGENCE
    elif args.kind == "bench":
        rows = ex.cmd_bench(plan, workers=args.workers)
        if not plan.out:
            _print_rows(ex.BENCH_COLUMNS, rows)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except (EmptySpaceError, ValueError) as exc:
        print(f"costgen: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except RepairBudgetExceeded as exc:
        print(f"costgen: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
