"""Core data model: datasets, column partitions, experiment configuration.

These types are immutable after construction and safe to share across
concurrently executing node solves.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    ConfigError,
    DimensionMismatch,
    EmptyDataset,
    InvalidPartition,
    NonFiniteEntry,
)
from .validation import as_matrix, as_vector

__all__ = [
    "ColumnDataset",
    "Partition",
    "ExperimentConfig",
    "StoppingRule",
    "partition_columns",
    "validate_dataset",
]


@dataclass(frozen=True)
class ColumnDataset:
    """A day of per-inverter voltage series plus the meter target.

    ``features`` has one column per inverter (volts, one row per time
    sample); ``target`` is the series being predicted, in volts, with one
    entry per row of ``features``.
    """

    features: np.ndarray
    target: np.ndarray
    sample_period_minutes: int = 15
    column_labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "features", as_matrix(self.features, "features"))
        object.__setattr__(self, "target", as_vector(self.target, "target"))
        if not self.column_labels:
            labels = tuple(f"inv{j + 1}" for j in range(self.features.shape[1]))
            object.__setattr__(self, "column_labels", labels)
        else:
            object.__setattr__(self, "column_labels", tuple(self.column_labels))

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_columns(self):
        return self.features.shape[1]


def validate_dataset(dataset):
    """Check every :class:`ColumnDataset` invariant.

    Returns a list of exception instances describing all violations
    (empty when the dataset is valid). Each non-finite entry is reported
    with its row/column location; target locations use column -1.
    """
    issues = []
    m, n = dataset.features.shape
    if m < 1 or n < 1:
        issues.append(EmptyDataset(f"features shape {m}x{n}"))
    if len(dataset.target) != m:
        issues.append(
            DimensionMismatch(
                f"target length {len(dataset.target)} vs {m} feature rows"
            )
        )
    for row, col in np.argwhere(~np.isfinite(dataset.features)):
        issues.append(NonFiniteEntry(int(row), int(col)))
    for (row,) in np.argwhere(~np.isfinite(dataset.target)):
        issues.append(NonFiniteEntry(int(row), -1))
    if len(dataset.column_labels) != n:
        issues.append(
            DimensionMismatch(f"{len(dataset.column_labels)} labels for {n} columns")
        )
    if dataset.sample_period_minutes < 1:
        issues.append(ConfigError("sample_period_minutes must be positive"))
    return issues


def ensure_valid(dataset):
    """Raise the first validation issue, if any."""
    issues = validate_dataset(dataset)
    if issues:
        raise issues[0]
    return dataset


@dataclass(frozen=True)
class Partition:
    """Disjoint assignment of the column indices 0..n-1 to nodes."""

    sets: tuple  # tuple of int64 index arrays, one per node

    def __post_init__(self):
        sets = tuple(np.asarray(s, dtype=np.int64) for s in self.sets)
        object.__setattr__(self, "sets", sets)

    @property
    def n_nodes(self):
        return len(self.sets)

    @property
    def n_columns(self):
        return sum(len(s) for s in self.sets)

    def check(self):
        """Verify disjointness and coverage of 0..n-1; raise otherwise."""
        if self.n_nodes < 1:
            raise InvalidPartition("a partition needs at least one node")
        if any(len(s) == 0 for s in self.sets):
            raise InvalidPartition("empty node set")
        merged = np.concatenate(self.sets)
        n = self.n_columns
        if len(np.unique(merged)) != n or merged.min() != 0 or merged.max() != n - 1:
            raise InvalidPartition("sets must disjointly cover all column indices")
        return self


def partition_columns(n_columns, n_nodes, strategy="per-column"):
    """Assign columns to nodes.

    ``per-column`` puts column k on node k and requires
    ``n_nodes == n_columns``. ``blocks`` builds contiguous nearly-equal
    blocks whose sizes differ by at most one, larger blocks first.
    """
    if n_nodes < 1 or n_nodes > n_columns:
        raise InvalidPartition(
            f"cannot split {n_columns} columns across {n_nodes} nodes"
        )
    if strategy == "per-column":
        if n_nodes != n_columns:
            raise InvalidPartition(
                "per-column partitioning requires one node per column "
                f"({n_nodes} nodes for {n_columns} columns)"
            )
        sets = [np.array([k], dtype=np.int64) for k in range(n_columns)]
    elif strategy == "blocks":
        base, extra = divmod(n_columns, n_nodes)
        sets = []
        start = 0
        for k in range(n_nodes):
            size = base + (1 if k < extra else 0)
            sets.append(np.arange(start, start + size, dtype=np.int64))
            start += size
    else:
        raise InvalidPartition(f"unknown partition strategy {strategy!r}")
    return Partition(tuple(sets)).check()


@dataclass(frozen=True)
class StoppingRule:
    """When to stop the round loop.

    ``fixed`` stops after ``n_rounds`` rounds. ``update-magnitude``
    stops once every node has kept its update norm below ``epsilon``
    for ``patience`` consecutive rounds, with ``n_rounds`` acting as a
    hard cap.
    """

    kind: str = "fixed"
    n_rounds: int = 500
    epsilon: float = 1e-6
    patience: int = 5

    @classmethod
    def fixed(cls, n_rounds):
        return cls(kind="fixed", n_rounds=int(n_rounds))

    @classmethod
    def update_magnitude(cls, epsilon=1e-6, patience=5, cap=10000):
        return cls(
            kind="update-magnitude",
            n_rounds=int(cap),
            epsilon=float(epsilon),
            patience=int(patience),
        )

    def check(self):
        if self.kind not in ("fixed", "update-magnitude"):
            raise ConfigError(f"unknown stopping rule {self.kind!r}")
        if self.n_rounds < 1:
            raise ConfigError("round count must be >= 1")
        if self.kind == "update-magnitude":
            if self.epsilon <= 0:
                raise ConfigError("epsilon must be > 0")
            if self.patience < 1:
                raise ConfigError("patience must be >= 1")
        return self


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one training run depends on, besides the dataset."""

    lam: float = 0.0
    eta: float = 0.0
    partition: str = "per-column"  # or "blocks"
    n_nodes: int | None = None  # required for "blocks"
    topology: str = "ring"  # "ring", "complete", or "file:PATH"
    preprocess: bool = False
    scheduler: str = "synchronous"  # or "random-order"
    stopping: StoppingRule = field(default_factory=StoppingRule)
    seed: int = 0
    trace_path: str | None = None

    def check(self):
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"eta must lie in [0, 1], got {self.eta}")
        if self.partition not in ("per-column", "blocks"):
            raise ConfigError(f"unknown partition strategy {self.partition!r}")
        if self.partition == "blocks" and (self.n_nodes is None or self.n_nodes < 1):
            raise ConfigError("block partitioning requires a positive node count")
        kind = self.topology.split(":", 1)[0]
        if kind not in ("ring", "complete", "file"):
            raise ConfigError(f"unknown topology {self.topology!r}")
        if self.scheduler not in ("synchronous", "random-order"):
            raise ConfigError(f"unknown scheduler {self.scheduler!r}")
        self.stopping.check()
        return self
