"""Command-line experiment runner.

Subcommands: ``generate`` (synthetic day to CSV), ``train`` (decentralized
run with trace export), ``baseline`` (collocated solve), ``evaluate``
(metrics and overvoltage detection for a saved model), and ``experiment``
(canned presets that write plot-ready CSVs).

Exit codes: 0 success, 1 validation/configuration error, 2 runtime or
solver error. All randomness flows from ``--seed``, so identical flags
produce identical outputs.
"""

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from .dataio import (
    OvervoltageScenario,
    SyntheticParams,
    apply_overvoltage,
    generate_day,
    read_csv,
    split_contiguous,
    split_random,
    stagnation_params,
    voltage_day_params,
    write_csv,
)
from .engine import run
from .evaluate import (
    break_even_iterations,
    collocated_solve,
    comm_cost,
    detect_overvoltage,
    gamma_sum_check,
    predict,
    regression_metrics,
    write_trace_csv,
)
from .exceptions import ConfigError, IoFailure, ValidationError
from .model import ColumnDataset, ExperimentConfig, StoppingRule
from .preprocess import ColumnStats, preprocess_matrix

__all__ = ["main", "entry"]

PRESETS = ("bound-check", "regression", "stagnation", "overvoltage")


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors map to exit code 1."""

    def error(self, message):
        raise ConfigError(message)


def _print_summary(pairs):
    for key, value in pairs:
        if isinstance(value, float):
            value = format(value, ".12g")
        print(f"{key}={value}")


def _run_id(args_namespace):
    payload = repr(sorted(vars(args_namespace).items())).encode()
    return hashlib.sha1(payload).hexdigest()[:12]


def _ranges_str(ranges):
    return ";".join(f"{s}:{e}" for s, e in ranges) if ranges else "-"


def _load_dataset(args):
    if args.data:
        return read_csv(args.data, sample_period_minutes=args.sample_period)
    params = SyntheticParams(seed=args.seed)
    return generate_day(params)


def _save_model(path, coef, lam, eta, stats, labels, source):
    payload = {
        "coef": [float(v) for v in coef],
        "lam": lam,
        "eta": eta,
        "normalized": stats is not None,
        "mu": [float(v) for v in stats.mu] if stats is not None else None,
        "nu": [float(v) for v in stats.nu] if stats is not None else None,
        "labels": list(labels),
        "source": source,
    }
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write model to {path}: {exc}") from exc


def _load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read model from {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model file {path} is not valid JSON: {exc}") from exc
    coef = np.asarray(payload["coef"], dtype=np.float64)
    stats = None
    if payload.get("normalized"):
        stats = ColumnStats(
            mu=np.asarray(payload["mu"], dtype=np.float64),
            nu=np.asarray(payload["nu"], dtype=np.float64),
        )
    return coef, stats


def _split_for(args, dataset):
    if args.train_hours is not None:
        return split_contiguous(dataset, args.train_hours)
    if args.train_fraction is not None:
        return split_random(dataset, args.train_fraction, seed=args.split_seed)
    return None


def _add_split_flags(parser):
    parser.add_argument(
        "--train-hours",
        type=float,
        default=None,
        help="train on the first H hours, test on the rest",
    )
    parser.add_argument(
        "--train-fraction",
        type=float,
        default=None,
        help="train on a random fraction of the rows",
    )
    parser.add_argument("--split-seed", type=int, default=0)


def _add_data_flags(parser):
    parser.add_argument(
        "--data", default=None, help="dataset CSV; omitted: default synthetic day"
    )
    parser.add_argument("--sample-period", type=int, default=15)


# ---------------------------------------------------------------- generate


def cmd_generate(args):
    params = SyntheticParams(
        nominal_volts=args.nominal,
        samples_per_day=args.samples,
        sample_period_minutes=args.sample_period,
        inverter_count=args.inverters,
        noise_std=args.noise_std,
        target_noise_std=args.target_noise_std,
        collinear_columns=args.collinear,
        collinear_jitter_volts=args.collinear_jitter,
        seed=args.seed,
    )
    dataset = generate_day(params)
    write_csv(dataset, args.out)
    _print_summary(
        [
            ("rows", dataset.n_samples),
            ("columns", dataset.n_columns + 1),
            ("feature_columns", dataset.n_columns),
            ("path", args.out),
        ]
    )
    return 0


# ------------------------------------------------------------------- train


def _stopping_from(args):
    if args.eps is not None:
        return StoppingRule.update_magnitude(
            epsilon=args.eps, patience=args.patience, cap=args.cap
        )
    return StoppingRule.fixed(args.iters)


def cmd_train(args):
    dataset = _load_dataset(args)
    stats = None
    train_set = dataset
    if args.preprocess:
        train_set, stats = preprocess_matrix(dataset)
    config = ExperimentConfig(
        lam=args.lam,
        eta=args.eta,
        partition=args.partition,
        n_nodes=args.nodes,
        topology=args.topology,
        preprocess=args.preprocess,
        scheduler=args.scheduler,
        stopping=_stopping_from(args),
        seed=args.seed,
        trace_path=args.trace,
    )
    result = run(config, train_set)
    if args.out_model:
        _save_model(
            args.out_model,
            result.x,
            args.lam,
            args.eta,
            stats,
            dataset.column_labels,
            "train",
        )
    n_nodes = result.trace.n_nodes
    comm_total = int(result.trace.comm_cumulative[-1])
    broadcast = comm_cost("broadcast", n_nodes)
    pairs = [
        ("run_id", _run_id(args)),
        ("rows", dataset.n_samples),
        ("feature_columns", dataset.n_columns),
        ("nodes", n_nodes),
        ("topology", args.topology),
        ("lambda", args.lam),
        ("eta", args.eta),
        ("preprocess", args.preprocess),
        ("scheduler", args.scheduler),
        ("seed", args.seed),
        ("rounds", result.n_rounds),
        ("stop_reason", result.stop_reason),
        ("final_objective", float(result.trace.objective[-1])),
        ("final_loss", float(result.trace.loss[-1])),
        ("final_max_dx_norm", float(result.trace.max_dx_norm()[-1])),
        ("comm_vectors", comm_total),
        ("broadcast_vectors", broadcast),
        ("comm_vs_broadcast", "ring_cheaper" if comm_total < broadcast else "broadcast_cheaper"),
    ]
    if n_nodes >= 3:
        pairs.append(("break_even_iterations", break_even_iterations(n_nodes)))
    if args.trace:
        pairs.append(("trace", args.trace))
    if args.out_model:
        pairs.append(("model", args.out_model))
    _print_summary(pairs)
    return 0


# ---------------------------------------------------------------- baseline


def cmd_baseline(args):
    dataset = _load_dataset(args)
    parts = _split_for(args, dataset)
    train_set, test_set = parts if parts else (dataset, None)
    fit = collocated_solve(
        train_set.features,
        train_set.target,
        args.lam,
        args.eta,
        tol=args.tol,
        max_sweeps=args.max_sweeps,
    )
    if args.out_model:
        _save_model(
            args.out_model,
            fit.x,
            args.lam,
            args.eta,
            None,
            dataset.column_labels,
            "baseline",
        )
    pairs = [
        ("run_id", _run_id(args)),
        ("lambda", args.lam),
        ("eta", args.eta),
        ("sweeps", fit.n_sweeps),
        ("converged", fit.converged),
        ("nonzero_coefficients", int(np.count_nonzero(fit.x))),
    ]
    train_metrics = regression_metrics(
        predict(fit.x, train_set.features), train_set.target
    )
    pairs += sorted(train_metrics.as_dict("train_").items())
    if test_set is not None:
        test_metrics = regression_metrics(
            predict(fit.x, test_set.features), test_set.target
        )
        pairs += sorted(test_metrics.as_dict("test_").items())
    if args.out_model:
        pairs.append(("model", args.out_model))
    _print_summary(pairs)
    return 0


# ---------------------------------------------------------------- evaluate


def cmd_evaluate(args):
    dataset = read_csv(args.data, sample_period_minutes=args.sample_period)
    coef, stats = _load_model(args.model)
    parts = _split_for(args, dataset)
    pairs = [("run_id", _run_id(args)), ("model", args.model), ("data", args.data)]
    if parts:
        train_set, test_set = parts
        for name, part in (("train_", train_set), ("test_", test_set)):
            metrics = regression_metrics(
                predict(coef, part.features, stats), part.target
            )
            pairs += sorted(metrics.as_dict(name).items())
    else:
        metrics = regression_metrics(
            predict(coef, dataset.features, stats), dataset.target
        )
        pairs += sorted(metrics.as_dict("all_").items())
    if args.detect_overvoltage:
        predicted = predict(coef, dataset.features, stats)
        actual_ranges = detect_overvoltage(
            dataset.target, args.nominal, args.threshold
        )
        predicted_ranges = detect_overvoltage(predicted, args.nominal, args.threshold)
        pairs += [
            ("overvoltage_cutoff_volts", args.nominal * (1 + args.threshold)),
            ("overvoltage_actual", _ranges_str(actual_ranges)),
            ("overvoltage_predicted", _ranges_str(predicted_ranges)),
        ]
    _print_summary(pairs)
    return 0


# -------------------------------------------------------------- experiment


def _write_rows(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _fmt(value):
    return format(float(value), ".17g")


def _preset_config(lam=1e-3, eta=0.5, rounds=500, seed=0):
    return ExperimentConfig(
        lam=lam,
        eta=eta,
        topology="ring",
        stopping=StoppingRule.fixed(rounds),
        seed=seed,
    )


def _experiment_bound_check(outdir):
    day = generate_day(SyntheticParams())
    outputs = []
    all_bounded = True
    for variant, train_set in (
        ("raw", day),
        ("preprocessed", preprocess_matrix(day)[0]),
    ):
        result = run(_preset_config(), train_set)
        flags = gamma_sum_check(result.trace)
        all_bounded &= bool(flags.all())
        path = os.path.join(outdir, f"bound_check_{variant}.csv")
        _write_rows(
            path,
            ["round", "objective", "gamma_sum", "bound_holds"],
            [
                [int(r), _fmt(o), _fmt(g), int(f)]
                for r, o, g, f in zip(
                    result.trace.rounds,
                    result.trace.objective,
                    result.trace.gamma_sum,
                    flags,
                )
            ],
        )
        outputs.append(path)
    return [("all_rounds_bounded", all_bounded), ("files", ";".join(outputs))]


def _experiment_regression(outdir):
    day = generate_day(stagnation_params())
    rng = np.random.default_rng(5)
    n_train = int(np.ceil(0.75 * day.n_samples))
    train_rows = np.sort(rng.choice(day.n_samples, size=n_train, replace=False))
    train_set = ColumnDataset(
        features=day.features[train_rows],
        target=day.target[train_rows],
        sample_period_minutes=day.sample_period_minutes,
        column_labels=day.column_labels,
    )
    preds = {}
    for variant in ("raw", "preprocessed"):
        stats = None
        fit_set = train_set
        if variant == "preprocessed":
            fit_set, stats = preprocess_matrix(train_set)
        result = run(_preset_config(), fit_set)
        preds[variant] = predict(result.x, day.features, stats)
    in_train = set(int(r) for r in train_rows)
    path = os.path.join(outdir, "regression_predictions.csv")
    _write_rows(
        path,
        ["t", "actual", "predicted_raw", "predicted_preprocessed", "part"],
        [
            [
                i,
                _fmt(day.target[i]),
                _fmt(preds["raw"][i]),
                _fmt(preds["preprocessed"][i]),
                "train" if i in in_train else "test",
            ]
            for i in range(day.n_samples)
        ],
    )
    pairs = [("files", path)]
    for variant in ("raw", "preprocessed"):
        metrics = regression_metrics(preds[variant], day.target)
        pairs.append((f"{variant}_rmse", metrics.rmse))
    return pairs


def _experiment_stagnation(outdir):
    day = generate_day(stagnation_params())
    outputs = []
    pairs = []
    for variant, train_set in (
        ("raw", day),
        ("preprocessed", preprocess_matrix(day)[0]),
    ):
        result = run(_preset_config(), train_set)
        path = os.path.join(outdir, f"stagnation_{variant}.csv")
        write_trace_csv(result.trace, path)
        outputs.append(path)
        max_dx = result.trace.max_dx_norm()
        pairs += [
            (f"{variant}_final_loss", float(result.trace.loss[-1])),
            (f"{variant}_dx_round_50", float(max_dx[49])),
            (f"{variant}_dx_round_500", float(max_dx[499])),
        ]
    pairs.append(("files", ";".join(outputs)))
    return pairs


def _experiment_overvoltage(outdir):
    train_day = generate_day(voltage_day_params(seed=3))
    test_day = generate_day(voltage_day_params(seed=4))
    scenario = OvervoltageScenario(onset=40, end=60, boost_fraction=0.10)
    boosted = apply_overvoltage(test_day, scenario)
    train_set, _rest = split_contiguous(train_day, 5)

    config = ExperimentConfig(
        lam=1e-3, eta=0.0, topology="ring", stopping=StoppingRule.fixed(1), seed=0
    )
    decentralized = run(config, train_set)
    baseline = collocated_solve(
        train_set.features, train_set.target, 1e-3, 0.0, tol=1e-10, max_sweeps=10000
    )
    pred_dec = predict(decentralized.x, boosted.features)
    pred_col = predict(baseline.x, boosted.features)

    path = os.path.join(outdir, "overvoltage_predictions.csv")
    _write_rows(
        path,
        ["t", "actual", "predicted_decentralized", "predicted_collocated", "boosted"],
        [
            [
                i,
                _fmt(boosted.target[i]),
                _fmt(pred_dec[i]),
                _fmt(pred_col[i]),
                int(scenario.onset <= i < scenario.end),
            ]
            for i in range(boosted.n_samples)
        ],
    )
    nominal = 7200.0
    n_nodes = train_set.n_columns
    return [
        ("files", path),
        ("injected_window", f"{scenario.onset}:{scenario.end - 1}"),
        ("detected_actual", _ranges_str(detect_overvoltage(boosted.target, nominal))),
        ("detected_decentralized", _ranges_str(detect_overvoltage(pred_dec, nominal))),
        ("detected_collocated", _ranges_str(detect_overvoltage(pred_col, nominal))),
        ("decentralized_rounds", decentralized.n_rounds),
        ("comm_vectors", int(decentralized.trace.comm_cumulative[-1])),
        ("broadcast_vectors", comm_cost("broadcast", n_nodes)),
    ]


def cmd_experiment(args):
    runners = {
        "bound-check": _experiment_bound_check,
        "regression": _experiment_regression,
        "stagnation": _experiment_stagnation,
        "overvoltage": _experiment_overvoltage,
    }
    if args.preset not in runners:
        raise ConfigError(
            f"unknown preset {args.preset!r}; available: {', '.join(PRESETS)}"
        )
    outdir = args.outdir or os.path.join("experiments", args.preset)
    os.makedirs(outdir, exist_ok=True)
    pairs = [("preset", args.preset), ("outdir", outdir)]
    pairs += runners[args.preset](outdir)
    _print_summary(pairs)
    return 0


# ------------------------------------------------------------------ parser


def build_parser():
    parser = _Parser(
        prog="decolearn",
        description="Decentralized linear learning simulator and experiment runner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="write a synthetic day as CSV")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--seed", type=int, default=12)
    p_gen.add_argument("--inverters", type=int, default=16)
    p_gen.add_argument("--samples", type=int, default=96)
    p_gen.add_argument("--sample-period", type=int, default=15)
    p_gen.add_argument("--nominal", type=float, default=7200.0)
    p_gen.add_argument("--noise-std", type=float, default=120.0)
    p_gen.add_argument("--target-noise-std", type=float, default=4.0)
    p_gen.add_argument("--collinear", type=int, default=0)
    p_gen.add_argument("--collinear-jitter", type=float, default=5.0)
    p_gen.set_defaults(func=cmd_generate)

    p_train = sub.add_parser("train", help="run the decentralized trainer")
    _add_data_flags(p_train)
    p_train.add_argument("--topology", default="ring")
    p_train.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p_train.add_argument("--eta", type=float, default=0.0)
    p_train.add_argument("--preprocess", action="store_true")
    p_train.add_argument(
        "--partition", choices=("per-column", "blocks"), default="per-column"
    )
    p_train.add_argument("--nodes", type=int, default=None)
    p_train.add_argument(
        "--scheduler", choices=("synchronous", "random-order"), default="synchronous"
    )
    p_train.add_argument("--iters", type=int, default=500)
    p_train.add_argument("--eps", type=float, default=None)
    p_train.add_argument("--patience", type=int, default=5)
    p_train.add_argument("--cap", type=int, default=10000)
    p_train.add_argument("--seed", type=int, default=12)
    p_train.add_argument("--trace", default="trace.csv")
    p_train.add_argument("--out-model", default=None)
    p_train.set_defaults(func=cmd_train)

    p_base = sub.add_parser("baseline", help="collocated coordinate-descent solve")
    _add_data_flags(p_base)
    p_base.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p_base.add_argument("--eta", type=float, default=0.0)
    p_base.add_argument("--tol", type=float, default=1e-10)
    p_base.add_argument("--max-sweeps", type=int, default=10000)
    p_base.add_argument("--seed", type=int, default=12)
    _add_split_flags(p_base)
    p_base.add_argument("--out-model", default=None)
    p_base.set_defaults(func=cmd_baseline)

    p_eval = sub.add_parser("evaluate", help="metrics and overvoltage detection")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--sample-period", type=int, default=15)
    p_eval.add_argument("--model", required=True)
    _add_split_flags(p_eval)
    p_eval.add_argument("--detect-overvoltage", action="store_true")
    p_eval.add_argument("--nominal", type=float, default=7200.0)
    p_eval.add_argument("--threshold", type=float, default=0.05)
    p_eval.set_defaults(func=cmd_evaluate)

    p_exp = sub.add_parser("experiment", help="run a canned experiment preset")
    p_exp.add_argument("preset")
    p_exp.add_argument("--outdir", default=None)
    p_exp.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # solver or unexpected runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
