import numpy as np
import pytest

from decolearn.exceptions import (
    ConfigError,
    DimensionMismatch,
    EmptyDataset,
    InvalidPartition,
    NonFiniteEntry,
)
from decolearn.model import (
    ColumnDataset,
    ExperimentConfig,
    StoppingRule,
    partition_columns,
    validate_dataset,
)


def test_per_column_partition_is_identity():
    part = partition_columns(15, 15, "per-column")
    assert part.n_nodes == 15
    for k, cols in enumerate(part.sets):
        assert list(cols) == [k]


def test_single_node_block_holds_everything():
    part = partition_columns(4, 1, "blocks")
    assert list(part.sets[0]) == [0, 1, 2, 3]


def test_blocks_nearly_equal_larger_first():
    # 5 columns over 2 nodes is forced to sizes (3, 2)
    part = partition_columns(5, 2, "blocks")
    assert list(part.sets[0]) == [0, 1, 2]
    assert list(part.sets[1]) == [3, 4]


def test_partition_errors():
    with pytest.raises(InvalidPartition):
        partition_columns(3, 4, "blocks")
    with pytest.raises(InvalidPartition):
        partition_columns(3, 0, "blocks")
    with pytest.raises(InvalidPartition):
        partition_columns(5, 3, "per-column")
    with pytest.raises(InvalidPartition):
        partition_columns(5, 2, "stripes")


def test_partition_invariants_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 40))
        k = int(rng.integers(1, n + 1))
        part = partition_columns(n, k, "blocks")
        merged = np.concatenate(part.sets)
        assert len(merged) == n
        assert set(merged.tolist()) == set(range(n))
        sizes = [len(s) for s in part.sets]
        assert max(sizes) - min(sizes) <= 1
        assert sizes == sorted(sizes, reverse=True)
        # contiguity
        for cols in part.sets:
            assert list(cols) == list(range(cols[0], cols[-1] + 1))


def test_partition_deterministic():
    a = partition_columns(17, 5, "blocks")
    b = partition_columns(17, 5, "blocks")
    assert all((x == y).all() for x, y in zip(a.sets, b.sets))


def test_validate_dataset_ok():
    rng = np.random.default_rng(1)
    d = ColumnDataset(features=rng.normal(size=(96, 16)), target=rng.normal(size=96))
    assert validate_dataset(d) == []


def test_validate_dataset_reports_nan_location():
    features = np.ones((5, 4))
    features[3, 2] = np.nan
    d = ColumnDataset(features=features, target=np.ones(5))
    issues = validate_dataset(d)
    assert len(issues) == 1
    assert isinstance(issues[0], NonFiniteEntry)
    assert (issues[0].row, issues[0].col) == (3, 2)


def test_validate_dataset_dimension_mismatch():
    d = ColumnDataset(features=np.ones((96, 3)), target=np.ones(95))
    issues = validate_dataset(d)
    assert any(isinstance(i, DimensionMismatch) for i in issues)


def test_validate_dataset_empty():
    d = ColumnDataset(features=np.ones((0, 3)), target=np.ones(0))
    issues = validate_dataset(d)
    assert any(isinstance(i, EmptyDataset) for i in issues)


def test_validate_dataset_multiple_issues_all_reported():
    features = np.ones((4, 2))
    features[0, 0] = np.inf
    features[2, 1] = np.nan
    d = ColumnDataset(features=features, target=np.ones(3))
    issues = validate_dataset(d)
    assert len(issues) == 3


def test_config_validation():
    ExperimentConfig(lam=0.0, eta=0.0).check()
    ExperimentConfig(lam=1e-3, eta=1.0).check()
    with pytest.raises(ConfigError):
        ExperimentConfig(lam=-1.0).check()
    with pytest.raises(ConfigError):
        ExperimentConfig(eta=1.5).check()
    with pytest.raises(ConfigError):
        ExperimentConfig(partition="blocks").check()  # missing node count
    with pytest.raises(ConfigError):
        ExperimentConfig(scheduler="chaotic").check()
    with pytest.raises(ConfigError):
        ExperimentConfig(topology="torus").check()


def test_stopping_rule_validation():
    StoppingRule.fixed(10).check()
    StoppingRule.update_magnitude(1e-6, 5, cap=100).check()
    with pytest.raises(ConfigError):
        StoppingRule.fixed(0).check()
    with pytest.raises(ConfigError):
        StoppingRule.update_magnitude(0.0, 5).check()
    with pytest.raises(ConfigError):
        StoppingRule.update_magnitude(1e-6, 0).check()


def test_dataset_labels_default_and_custom():
    d = ColumnDataset(features=np.ones((2, 3)), target=np.ones(2))
    assert d.column_labels == ("inv1", "inv2", "inv3")
    d2 = ColumnDataset(
        features=np.ones((2, 2)), target=np.ones(2), column_labels=["a", "b"]
    )
    assert d2.column_labels == ("a", "b")
