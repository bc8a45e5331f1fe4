"""Uniform random generation of cost matrices for scheduling experiments.

Row sums (task costs) and column sums (machine loads) are drawn uniformly
among bounded integer vectors; a symmetric ergodic Markov chain then walks
over the integer matrices with those margins and elementwise bounds.
"""

from costgen.margins import (
    EmptySpaceError,
    MarginVector,
    VectorSpec,
    count_vectors,
    lambda_bounds,
    sample_vector,
)
from costgen.tablespace import TableSpace, contains, enumerate_space, reduce_constraints
from costgen.chain import (
    ChainConfig,
    MoveTuple,
    apply_move,
    delta,
    path_step,
    stair_sequence,
    step,
    step_amplitude,
    transition_matrix,
    walk,
)
from costgen.seeds import seed_heterogeneous, seed_homogeneous, seed_proportional
from costgen.measures import MeasureRecord, measure_record
from costgen.sched import Schedule, balsuff, brute_force_optimal, eft, hlpt, makespan

__all__ = [
    "EmptySpaceError", "MarginVector", "VectorSpec", "count_vectors",
    "lambda_bounds", "sample_vector",
    "TableSpace", "contains", "enumerate_space", "reduce_constraints",
    "ChainConfig", "MoveTuple", "apply_move", "delta", "path_step",
    "stair_sequence", "step", "step_amplitude", "transition_matrix", "walk",
    "seed_heterogeneous", "seed_homogeneous", "seed_proportional",
    "MeasureRecord", "measure_record",
    "Schedule", "balsuff", "brute_force_optimal", "eft", "hlpt", "makespan",
]

__version__ = "0.1.0"
