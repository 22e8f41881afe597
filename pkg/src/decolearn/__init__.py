"""Decentralized linear learning over column-partitioned voltage data.

A multi-node simulator for training linear regression models where each
node holds one block of feature columns, exchanges running estimates
with its topology neighbors through a doubly-stochastic mixing matrix,
and solves small local subproblems; plus the column normalization step,
update-magnitude stopping, communication-cost accounting, a centralized
baseline, and a synthetic smart-inverter data generator.
"""

from .dataio import (
    OvervoltageScenario,
    SyntheticParams,
    apply_overvoltage,
    generate_day,
    read_csv,
    split_contiguous,
    split_random,
    write_csv,
)
from .engine import NodeState, RunResult, cola_round, mix_step, run, stopping_check
from .estimators import CoLARegressor, CollocatedRegressor
from .evaluate import (
    RegressionMetrics,
    RunTrace,
    break_even_iterations,
    collocated_solve,
    comm_cost,
    detect_overvoltage,
    gamma_sum_check,
    predict,
    regression_metrics,
)
from .exceptions import DecolearnError, SolverError, ValidationError
from .model import (
    ColumnDataset,
    ExperimentConfig,
    Partition,
    StoppingRule,
    partition_columns,
    validate_dataset,
)
from .objectives import (
    ElasticNetRegularizer,
    LeastSquaresLoss,
    global_objective,
    soft_threshold,
)
from .preprocess import (
    ColumnNormalizer,
    ColumnStats,
    apply_stats,
    column_stats,
    preprocess_matrix,
)
from .subproblem import LocalProblem, gamma_value, solve_block, solve_single_coordinate
from .topology import (
    MixingTopology,
    complete_topology,
    load_topology,
    ring_topology,
    validate_topology,
)

__version__ = "0.1.0"

__all__ = [
    "CoLARegressor",
    "CollocatedRegressor",
    "ColumnDataset",
    "ColumnNormalizer",
    "ColumnStats",
    "DecolearnError",
    "ElasticNetRegularizer",
    "ExperimentConfig",
    "LeastSquaresLoss",
    "LocalProblem",
    "MixingTopology",
    "NodeState",
    "OvervoltageScenario",
    "Partition",
    "RegressionMetrics",
    "RunResult",
    "RunTrace",
    "SolverError",
    "StoppingRule",
    "SyntheticParams",
    "ValidationError",
    "apply_overvoltage",
    "apply_stats",
    "break_even_iterations",
    "cola_round",
    "collocated_solve",
    "column_stats",
    "comm_cost",
    "complete_topology",
    "detect_overvoltage",
    "gamma_sum_check",
    "gamma_value",
    "generate_day",
    "global_objective",
    "load_topology",
    "mix_step",
    "partition_columns",
    "predict",
    "preprocess_matrix",
    "read_csv",
    "regression_metrics",
    "ring_topology",
    "run",
    "soft_threshold",
    "solve_block",
    "solve_single_coordinate",
    "split_contiguous",
    "split_random",
    "stopping_check",
    "validate_dataset",
    "validate_topology",
    "write_csv",
]
