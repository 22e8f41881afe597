"""Synthetic inverter-voltage data, overvoltage injection, CSV I/O, splits.

The generator stands in for a power-flow simulation: each inverter's
voltage follows the nominal level modulated by a shared solar bell curve
and a shared double-hump load curve (with per-inverter coupling
strengths), plus independent Gaussian noise. The target column is a known
linear combination of the feature columns plus its own noise, so solvers
can be checked against recoverable ground truth.

The default coupling strengths are small and the feature noise generous;
that keeps the normalized training problem well conditioned, which the
round-based solver needs to reach tight coefficient accuracy within a
few thousand rounds. Presets that want a visually solar-dominated day
pass larger couplings explicitly.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import (
    ConfigError,
    EmptyDataset,
    InvalidSplit,
    IoFailure,
    MalformedCsv,
)
from .model import ColumnDataset

__all__ = [
    "SyntheticParams",
    "OvervoltageScenario",
    "generate_day",
    "apply_overvoltage",
    "split_random",
    "split_contiguous",
    "read_csv",
    "write_csv",
]


@dataclass(frozen=True)
class SyntheticParams:
    """Knobs of the synthetic day generator.

    ``inverter_count`` counts the meter too: the generated dataset has
    ``inverter_count - 1`` feature columns plus the target as the final
    column. ``solar_coupling`` / ``load_coupling`` give per-inverter
    amplitudes; left as ``None`` they are drawn from the seeded RNG
    within the ``*_range`` bounds. ``collinear_columns`` replaces that
    many trailing feature columns with near-duplicates of earlier ones
    (plus ``collinear_jitter_volts`` of noise) to force a low numerical
    rank.
    """

    nominal_volts: float = 7200.0
    samples_per_day: int = 96
    sample_period_minutes: int = 15
    inverter_count: int = 16
    solar_coupling: tuple | None = None
    load_coupling: tuple | None = None
    solar_range: tuple = (0.004, 0.012)
    load_range: tuple = (0.002, 0.008)
    noise_std: float = 120.0
    target_noise_std: float = 4.0
    target_weights: tuple | None = None
    collinear_columns: int = 0
    collinear_jitter_volts: float = 5.0
    seed: int = 12

    def check(self):
        if self.nominal_volts <= 0:
            raise ConfigError(f"nominal_volts must be > 0, got {self.nominal_volts}")
        if self.samples_per_day < 2:
            raise ConfigError("samples_per_day must be >= 2")
        if self.inverter_count < 2:
            raise ConfigError("inverter_count must be >= 2")
        if self.noise_std < 0 or self.target_noise_std < 0:
            raise ConfigError("noise levels must be >= 0")
        n_features = self.inverter_count - 1
        if not 0 <= self.collinear_columns <= max(n_features - 1, 0):
            raise ConfigError(
                f"collinear_columns must lie in [0, {n_features - 1}]"
            )
        return self


@dataclass(frozen=True)
class OvervoltageScenario:
    """Multiplicative voltage boost over the half-open sample window
    [onset, end)."""

    onset: int
    end: int
    boost_fraction: float

    def check(self, n_samples):
        if not 0 <= self.onset <= self.end <= n_samples:
            raise ConfigError(
                f"window [{self.onset}, {self.end}) out of range for "
                f"{n_samples} samples"
            )
        if self.boost_fraction < 0:
            raise ConfigError("boost_fraction must be >= 0")
        return self


def solar_curve(hours):
    """Smooth bell: zero outside 06:00-18:00, peak 1 at noon."""
    hours = np.asarray(hours, dtype=np.float64)
    day = np.abs(hours - 12.0) < 6.0
    return np.where(day, np.cos(np.pi * (hours - 12.0) / 12.0) ** 2, 0.0)


def load_curve(hours):
    """Double-hump demand: morning shoulder plus a taller evening peak."""
    hours = np.asarray(hours, dtype=np.float64)
    morning = 0.7 * np.exp(-((hours - 8.0) ** 2) / 8.0)
    evening = np.exp(-((hours - 19.5) ** 2) / 12.5)
    return morning + evening


def generate_day(params):
    """Generate one synthetic day as a :class:`ColumnDataset`.

    Deterministic for a fixed parameter set: the same seed reproduces the
    dataset bit for bit.
    """
    params.check()
    rng = np.random.default_rng(params.seed)
    m = params.samples_per_day
    n_features = params.inverter_count - 1
    hours = np.arange(m) * (params.sample_period_minutes / 60.0)
    sun = solar_curve(hours % 24.0)
    demand = load_curve(hours % 24.0)

    if params.solar_coupling is not None:
        alpha = np.asarray(params.solar_coupling, dtype=np.float64)
    else:
        alpha = rng.uniform(*params.solar_range, n_features)
    if params.load_coupling is not None:
        beta = np.asarray(params.load_coupling, dtype=np.float64)
    else:
        beta = -rng.uniform(*params.load_range, n_features)
    if len(alpha) != n_features or len(beta) != n_features:
        raise ConfigError(
            f"coupling vectors must have {n_features} entries"
        )

    features = params.nominal_volts * (
        1.0 + np.outer(sun, alpha) + np.outer(demand, beta)
    )
    features = features + rng.normal(0.0, params.noise_std, features.shape)

    if params.collinear_columns:
        n_base = n_features - params.collinear_columns
        for i in range(params.collinear_columns):
            src = i % n_base
            features[:, n_base + i] = features[:, src] + rng.normal(
                0.0, params.collinear_jitter_volts, m
            )

    if params.target_weights is not None:
        weights = np.asarray(params.target_weights, dtype=np.float64)
        if len(weights) != n_features:
            raise ConfigError(f"target_weights must have {n_features} entries")
    else:
        weights = np.full(n_features, 1.0 / n_features)
    target = features @ weights + rng.normal(0.0, params.target_noise_std, m)

    return ColumnDataset(
        features=features,
        target=target,
        sample_period_minutes=params.sample_period_minutes,
    )


def apply_overvoltage(dataset, scenario):
    """Scale every feature and target entry in the scenario window by
    (1 + boost_fraction); other samples are untouched."""
    scenario.check(dataset.n_samples)
    factor = 1.0 + scenario.boost_fraction
    features = dataset.features.copy()
    target = dataset.target.copy()
    features[scenario.onset : scenario.end] *= factor
    target[scenario.onset : scenario.end] *= factor
    return ColumnDataset(
        features=features,
        target=target,
        sample_period_minutes=dataset.sample_period_minutes,
        column_labels=dataset.column_labels,
    )


def _subset(dataset, rows):
    return ColumnDataset(
        features=dataset.features[rows],
        target=dataset.target[rows],
        sample_period_minutes=dataset.sample_period_minutes,
        column_labels=dataset.column_labels,
    )


def split_random(dataset, fraction, seed=0):
    """Sample ceil(fraction * m) training rows without replacement;
    row order is preserved within both parts. Both parts must be
    nonempty."""
    m = dataset.n_samples
    n_train = int(np.ceil(fraction * m))
    if n_train < 1 or n_train >= m:
        raise InvalidSplit(
            f"fraction {fraction} leaves train={n_train}, test={m - n_train}"
        )
    rng = np.random.default_rng(seed)
    train_rows = np.sort(rng.choice(m, size=n_train, replace=False))
    mask = np.zeros(m, dtype=bool)
    mask[train_rows] = True
    return _subset(dataset, np.flatnonzero(mask)), _subset(
        dataset, np.flatnonzero(~mask)
    )


def split_contiguous(dataset, hours):
    """First ``hours`` of samples for training, the rest for testing."""
    per_hour = 60.0 / dataset.sample_period_minutes
    n_train_f = hours * per_hour
    n_train = int(round(n_train_f))
    if abs(n_train_f - n_train) > 1e-9:
        raise InvalidSplit(
            f"{hours} h is not a whole number of {dataset.sample_period_minutes}"
            "-minute samples"
        )
    m = dataset.n_samples
    if n_train < 1 or n_train >= m:
        raise InvalidSplit(
            f"{hours} h leaves train={n_train}, test={m - n_train}"
        )
    rows = np.arange(m)
    return _subset(dataset, rows[:n_train]), _subset(dataset, rows[n_train:])


def write_csv(dataset, path):
    """Write ``t,<labels...>,target`` with 17 significant digits so the
    round trip through text is exact."""
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", *dataset.column_labels, "target"])
            for i in range(dataset.n_samples):
                row = [str(i)]
                row += [format(v, ".17g") for v in dataset.features[i]]
                row.append(format(dataset.target[i], ".17g"))
                writer.writerow(row)
    except OSError as exc:
        raise IoFailure(f"cannot write dataset to {path}: {exc}") from exc


def read_csv(path, sample_period_minutes=15):
    """Read a dataset written by :func:`write_csv`.

    Raises :class:`MalformedCsv` with the 1-based offending line number,
    or :class:`EmptyDataset` for a header-only (or empty) file.
    """
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise EmptyDataset(f"{path} is empty") from None
            if len(header) < 3 or header[0] != "t" or header[-1] != "target":
                raise MalformedCsv(1, f"unexpected header in {path}: {header!r}")
            labels = tuple(header[1:-1])
            width = len(header)
            features = []
            target = []
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != width:
                    raise MalformedCsv(
                        line_no, f"line {line_no}: expected {width} cells, got {len(row)}"
                    )
                try:
                    values = [float(cell) for cell in row[1:]]
                except ValueError:
                    raise MalformedCsv(
                        line_no, f"line {line_no}: non-numeric cell"
                    ) from None
                features.append(values[:-1])
                target.append(values[-1])
    except OSError as exc:
        raise IoFailure(f"cannot read dataset from {path}: {exc}") from exc
    if not features:
        raise EmptyDataset(f"{path} has a header but no data rows")
    return ColumnDataset(
        features=np.array(features),
        target=np.array(target),
        sample_period_minutes=sample_period_minutes,
        column_labels=labels,
    )


def stagnation_params(seed=11):
    """Low-numerical-rank day used by the stagnation experiments: three
    near-duplicate columns and a zero-sum target so the unnormalizable
    mean level does not dominate the raw-data runs."""
    weights = [0.6 if i % 2 == 0 else -0.6 for i in range(12)] + [0.0, 0.0, 0.0]
    return SyntheticParams(
        noise_std=50.0,
        target_noise_std=50.0,
        solar_range=(0.015, 0.04),
        load_range=(0.0075, 0.02),
        collinear_columns=3,
        collinear_jitter_volts=5.0,
        target_weights=tuple(weights),
        seed=seed,
    )


def voltage_day_params(seed=3, noise_std=15.0):
    """Signal-rich day with a voltage-scale target, used by the
    prediction and overvoltage experiments."""
    return SyntheticParams(
        noise_std=noise_std,
        target_noise_std=4.0,
        solar_range=(0.01, 0.03),
        load_range=(0.005, 0.015),
        seed=seed,
    )


def with_seed(params, seed):
    """Same generator settings, different random draw."""
    return replace(params, seed=seed)
