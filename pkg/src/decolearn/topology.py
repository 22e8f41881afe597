"""Doubly-stochastic mixing matrices and their neighbor structure."""

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    InvalidTopology,
    IoFailure,
    NegativeWeight,
    NotDoublyStochastic,
    TopologyTooSmall,
)
from .validation import as_matrix

__all__ = [
    "MixingTopology",
    "ring_topology",
    "complete_topology",
    "validate_topology",
    "load_topology",
    "save_topology",
]

STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True)
class MixingTopology:
    """K x K doubly-stochastic weights plus per-node neighbor lists.

    ``neighbors[k]`` holds the nodes whose estimates node k consumes,
    i.e. the nonzero off-diagonal entries of row k.
    """

    weights: np.ndarray
    neighbors: tuple
    kind: str = "custom"

    @property
    def n_nodes(self):
        return self.weights.shape[0]

    @property
    def messages_per_round(self):
        """Directed point-to-point transfers one mixing round needs."""
        return sum(len(nbrs) for nbrs in self.neighbors)


def _neighbor_lists(weights):
    k = weights.shape[0]
    lists = []
    for i in range(k):
        nbrs = [int(j) for j in np.flatnonzero(weights[i]) if j != i]
        lists.append(tuple(nbrs))
    return tuple(lists)


def ring_topology(n_nodes):
    """Ring of ``n_nodes``: each row has three entries of 1/3 (self plus
    the two adjacent nodes, indices wrapping)."""
    if n_nodes < 3:
        raise TopologyTooSmall(
            f"a ring needs at least 3 nodes, got {n_nodes}; "
            "use complete_topology for 1 or 2"
        )
    weights = np.zeros((n_nodes, n_nodes))
    third = 1.0 / 3.0
    for k in range(n_nodes):
        weights[k, k] = third
        weights[k, (k - 1) % n_nodes] = third
        weights[k, (k + 1) % n_nodes] = third
    return MixingTopology(weights, _neighbor_lists(weights), kind="ring")


def complete_topology(n_nodes):
    """Uniform averaging: every entry 1/K."""
    if n_nodes < 1:
        raise InvalidTopology(f"node count must be >= 1, got {n_nodes}")
    weights = np.full((n_nodes, n_nodes), 1.0 / n_nodes)
    return MixingTopology(weights, _neighbor_lists(weights), kind="complete")


def validate_topology(weights, kind="custom"):
    """Accept a matrix iff it is square, nonnegative, and doubly
    stochastic within 1e-9; build neighbor lists from its pattern."""
    weights = as_matrix(weights, "mixing matrix")
    rows, cols = weights.shape
    if rows != cols:
        raise InvalidTopology(f"mixing matrix must be square, got {rows}x{cols}")
    if rows < 1:
        raise InvalidTopology("mixing matrix is empty")
    if (weights < 0).any():
        i, j = (int(v) for v in np.argwhere(weights < 0)[0])
        raise NegativeWeight(f"negative weight at ({i}, {j})")
    row_dev = float(np.max(np.abs(weights.sum(axis=1) - 1.0)))
    col_dev = float(np.max(np.abs(weights.sum(axis=0) - 1.0)))
    if row_dev > STOCHASTIC_TOL or col_dev > STOCHASTIC_TOL:
        raise NotDoublyStochastic(row_dev, col_dev)
    return MixingTopology(weights.copy(), _neighbor_lists(weights), kind=kind)


def load_topology(path):
    """Read a mixing matrix from a plain-text file.

    Format: first line the integer node count K, then K lines of K
    whitespace-separated weights. Validated like
    :func:`validate_topology`.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.strip() for line in fh if line.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read topology file {path}: {exc}") from exc
    if not lines:
        raise InvalidTopology(f"topology file {path} is empty")
    try:
        k = int(lines[0])
    except ValueError:
        raise InvalidTopology(
            f"first line of {path} must be the node count, got {lines[0]!r}"
        ) from None
    if len(lines) != k + 1:
        raise InvalidTopology(
            f"expected {k} weight rows in {path}, found {len(lines) - 1}"
        )
    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != k:
            raise InvalidTopology(
                f"line {line_no} of {path} has {len(parts)} entries, expected {k}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise InvalidTopology(
                f"non-numeric weight on line {line_no} of {path}"
            ) from None
    return validate_topology(np.array(rows), kind="file")


def save_topology(topology, path):
    """Write a topology in the format :func:`load_topology` reads."""
    k = topology.n_nodes
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{k}\n")
            for row in topology.weights:
                fh.write(" ".join(format(w, ".17g") for w in row) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write topology file {path}: {exc}") from exc
