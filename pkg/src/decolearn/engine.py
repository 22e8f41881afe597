"""The decentralized round loop: mixing, local solves, state updates, stopping.

Every round, each node averages its local estimate with its topology
neighbors (doubly-stochastic weights), solves its local surrogate
problem from the loss gradient at the mixed estimate, and pushes the
K-scaled change back into its estimate. Under the synchronous scheduler
all nodes read the round-start estimates, which preserves the
conservation identity mean_k(v_k) = A x exactly (up to roundoff).
"""

from dataclasses import dataclass, field

import numpy as np

from .evaluate import RunTrace, write_trace_csv
from .exceptions import InvalidTopology, ProtocolViolation, SolverError
from .model import StoppingRule, ensure_valid, partition_columns
from .objectives import ElasticNetRegularizer, LeastSquaresLoss
from .subproblem import LocalProblem, gamma_value, solve_block
from .topology import complete_topology, load_topology, ring_topology

__all__ = [
    "NodeState",
    "StoppingRule",
    "StopDecision",
    "RoundRecord",
    "RunResult",
    "init_nodes",
    "mix_step",
    "cola_round",
    "stopping_check",
    "run",
]

SOLVER_TOL = 1e-10
SOLVER_MAX_SWEEPS = 100


@dataclass
class NodeState:
    """One node's mutable state across rounds.

    ``x`` holds the coefficients of the node's own columns, ``v`` its
    length-m local estimate. Both start at zero.
    """

    node_id: int
    x: np.ndarray
    v: np.ndarray
    last_dx_norm: float = 0.0
    stop_streak: int = 0


@dataclass(frozen=True)
class StopDecision:
    stop: bool
    reason: str | None = None


@dataclass(frozen=True)
class RoundRecord:
    """Per-node update norms and summed surrogate values of one round."""

    dx_norms: np.ndarray
    gamma_sum: float


@dataclass(frozen=True)
class RunResult:
    """Final coefficients plus everything recorded along the way."""

    x: np.ndarray
    trace: RunTrace
    stop_reason: str
    n_rounds: int
    nodes: list = field(repr=False, default_factory=list)


def init_nodes(partition, n_samples):
    """Fresh all-zero node states for a partition."""
    return [
        NodeState(
            node_id=k,
            x=np.zeros(len(cols)),
            v=np.zeros(n_samples),
        )
        for k, cols in enumerate(partition.sets)
    ]


def mix_step(node_id, own_v, neighbor_vs, topology):
    """Weighted average of a node's estimate with its neighbors'.

    ``neighbor_vs`` maps neighbor id to that neighbor's estimate; only
    nodes with nonzero weight in row ``node_id`` are consulted, so the
    result cannot depend on non-neighbors. A missing neighbor message
    raises :class:`ProtocolViolation`.
    """
    row = topology.weights[node_id]
    mixed = row[node_id] * own_v
    for neighbor in topology.neighbors[node_id]:
        if neighbor not in neighbor_vs:
            raise ProtocolViolation(
                f"node {node_id} is missing the message from neighbor {neighbor}"
            )
        msg = neighbor_vs[neighbor]
        if len(msg) != len(own_v):
            raise ProtocolViolation(
                f"message from {neighbor} has length {len(msg)}, expected {len(own_v)}"
            )
        mixed = mixed + row[neighbor] * msg
    return mixed


def _node_update(node, dataset, partition, topology, loss, reg, snapshot_v):
    """Mix, solve the local surrogate, and apply the update to ``node``."""
    k = node.node_id
    neighbor_vs = {nb: snapshot_v[nb] for nb in topology.neighbors[k]}
    v_half = mix_step(k, snapshot_v[k], neighbor_vs, topology)
    block = dataset.features[:, partition.sets[k]]
    problem = LocalProblem(
        a_block=block,
        grad_at_v=loss.gradient(v_half),
        f_at_v=loss.value(v_half),
        x_block=node.x,
        n_nodes=topology.n_nodes,
        tau=loss.tau,
        lam=reg.lam,
        eta=reg.eta,
    )
    dx = solve_block(problem, tol=SOLVER_TOL, max_sweeps=SOLVER_MAX_SWEEPS)
    gamma_k = gamma_value(problem, dx)
    node.x = node.x + dx
    node.v = v_half + topology.n_nodes * (block @ dx)
    node.last_dx_norm = float(np.linalg.norm(dx))
    return gamma_k


def cola_round(nodes, dataset, partition, topology, loss, reg, round_index):
    """One synchronous round over all nodes.

    Every node mixes against the round-start snapshot of the estimates
    (parallel semantics), so node updates are order-independent.
    ``round_index`` is carried for symmetry with the schedulers; the
    update itself does not depend on it.
    """
    del round_index
    snapshot_v = [node.v for node in nodes]
    dx_norms = np.zeros(len(nodes))
    gamma_sum = 0.0
    for node in nodes:
        gamma_sum += _node_update(
            node, dataset, partition, topology, loss, reg, snapshot_v
        )
        dx_norms[node.node_id] = node.last_dx_norm
    return RoundRecord(dx_norms=dx_norms, gamma_sum=gamma_sum)


def _random_order_round(nodes, dataset, partition, topology, loss, reg, rng):
    """Sequential stale-read round: nodes update one at a time in a
    seed-determined order, each reading its neighbors' newest estimates."""
    dx_norms = np.zeros(len(nodes))
    gamma_sum = 0.0
    for k in rng.permutation(len(nodes)):
        current_v = [node.v for node in nodes]
        node = nodes[int(k)]
        gamma_sum += _node_update(
            node, dataset, partition, topology, loss, reg, current_v
        )
        dx_norms[node.node_id] = node.last_dx_norm
    return RoundRecord(dx_norms=dx_norms, gamma_sum=gamma_sum)


def stopping_check(rule, nodes, round_index):
    """Decide whether the loop stops after the completed round.

    The update-magnitude rule tracks, per node, how many consecutive
    rounds the update norm stayed below epsilon; all nodes must hold the
    streak for ``patience`` rounds. The hard cap reports ``cap_reached``.
    """
    if rule.kind == "fixed":
        if round_index >= rule.n_rounds:
            return StopDecision(True, "fixed")
        return StopDecision(False)
    for node in nodes:
        if node.last_dx_norm < rule.epsilon:
            node.stop_streak += 1
        else:
            node.stop_streak = 0
    if all(node.stop_streak >= rule.patience for node in nodes):
        return StopDecision(True, "update_magnitude")
    if round_index >= rule.n_rounds:
        return StopDecision(True, "cap_reached")
    return StopDecision(False)


def _build_topology(config, n_nodes):
    kind, _, arg = config.topology.partition(":")
    if kind == "ring":
        return ring_topology(n_nodes)
    if kind == "complete":
        return complete_topology(n_nodes)
    topology = load_topology(arg)
    if topology.n_nodes != n_nodes:
        raise InvalidTopology(
            f"topology file has {topology.n_nodes} nodes, run needs {n_nodes}"
        )
    return topology


def assemble_global(nodes, partition):
    """Concatenate the node coefficient blocks into the global vector."""
    x = np.zeros(partition.n_columns)
    for node, cols in zip(nodes, partition.sets):
        x[cols] = node.x
    return x


def run(config, dataset):
    """Execute rounds until the stopping rule fires.

    The dataset must already be preprocessed when the configuration says
    so; this function trains on it as given. Traces are deterministic
    for a fixed (config, dataset): the synchronous scheduler has no
    randomness and the random-order scheduler derives its permutations
    from ``config.seed``. When ``config.trace_path`` is set the trace is
    written there, including the partial trace if a solver error aborts
    the run.
    """
    config.check()
    ensure_valid(dataset)
    n_cols = dataset.n_columns
    n_nodes = n_cols if config.partition == "per-column" else config.n_nodes
    partition = partition_columns(n_cols, n_nodes, config.partition)
    topology = _build_topology(config, partition.n_nodes)
    loss = LeastSquaresLoss(dataset.target)
    reg = ElasticNetRegularizer(config.lam, config.eta)
    rule = config.stopping
    nodes = init_nodes(partition, dataset.n_samples)
    rng = np.random.default_rng(config.seed)
    msgs_per_round = topology.messages_per_round

    rows = {key: [] for key in ("round", "obj", "loss", "gamma", "dx", "comm")}

    def build_trace():
        k = partition.n_nodes
        return RunTrace(
            rounds=np.array(rows["round"], dtype=np.int64),
            objective=np.array(rows["obj"]),
            loss=np.array(rows["loss"]),
            gamma_sum=np.array(rows["gamma"]),
            dx_norms=(
                np.array(rows["dx"]) if rows["dx"] else np.zeros((0, k))
            ),
            comm_cumulative=np.array(rows["comm"], dtype=np.int64),
        )

    stop_reason = "cap_reached"
    round_index = 0
    comm_total = 0
    try:
        while True:
            round_index += 1
            if config.scheduler == "synchronous":
                record = cola_round(
                    nodes, dataset, partition, topology, loss, reg, round_index
                )
            else:
                record = _random_order_round(
                    nodes, dataset, partition, topology, loss, reg, rng
                )
            comm_total += msgs_per_round
            x = assemble_global(nodes, partition)
            f_val = loss.value(dataset.features @ x)
            rows["round"].append(round_index)
            rows["obj"].append(f_val + reg.value(x))
            rows["loss"].append(f_val)
            rows["gamma"].append(record.gamma_sum)
            rows["dx"].append(record.dx_norms)
            rows["comm"].append(comm_total)
            decision = stopping_check(rule, nodes, round_index)
            if decision.stop:
                stop_reason = decision.reason
                break
    except SolverError:
        if config.trace_path:
            write_trace_csv(build_trace(), config.trace_path)
        raise

    trace = build_trace()
    if config.trace_path:
        write_trace_csv(trace, config.trace_path)
    return RunResult(
        x=assemble_global(nodes, partition),
        trace=trace,
        stop_reason=stop_reason,
        n_rounds=round_index,
        nodes=nodes,
    )
