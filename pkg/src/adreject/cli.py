"""Command-line interface: fit, predict, verify, bench.

Exit codes: 0 success, 1 property or benchmark failure, 2 usage or
validation error.  Validation errors print a machine-readable JSON
object ``{"error": {"type", "message"}}`` to standard error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .bench import (
    COST_PRESETS,
    aggregate,
    load_csv,
    read_csv_table,
    run_benchmark,
    synthetic_suite,
    write_report_files,
)
from .core import AdrejectError, CostSpec, DomainError, ScoreSet, ToleranceSpec
from .detectors import DETECTOR_KINDS, DetectorSpec, fit_detector
from .rejector import fit, load_model, predict_batch, save_model, to_dict

__all__ = ["build_parser", "main", "console_entry"]

_PREDICT_COLUMNS = ("score", "psi_n", "p_anomaly", "confidence", "decision")


def _error_object(kind: str, message: str) -> int:
    print(
        json.dumps({"error": {"type": kind, "message": message}}),
        file=sys.stderr,
    )
    return 2


def _json_default(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    raise TypeError(f"not JSON serializable: {type(value)!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adreject",
        description=(
            "Stability-based learning to reject for unsupervised anomaly "
            "detection: wrap any real-valued scorer, abstain on unstable "
            "predictions, and report certified rejection-rate and cost bounds."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser(
        "fit", help="fit a rejector on a score column or on features + detector"
    )
    p_fit.add_argument("--train", required=True, help="training CSV (header row)")
    p_fit.add_argument(
        "--gamma", type=float, required=True, help="contamination factor in [0, 0.5)"
    )
    p_fit.add_argument(
        "--t-tolerance", type=float, default=32.0, metavar="T",
        help="tolerance exponent T >= 4; rejection threshold is 1 - 2 exp(-T)",
    )
    p_fit.add_argument("--delta", type=float, default=0.05,
                       help="failure probability for the rejection-rate bound")
    p_fit.add_argument(
        "--detector", choices=DETECTOR_KINDS, default=None,
        help="fit this detector on feature columns instead of reading scores",
    )
    p_fit.add_argument("--score-column", default=None,
                       help="name of the score column (scores mode)")
    p_fit.add_argument("--label-column", default="label",
                       help="column to ignore when reading scores or features")
    p_fit.add_argument("--seed", type=int, default=0, help="detector seed")
    p_fit.add_argument("--model-out", required=True, help="where to write the model")

    p_pred = sub.add_parser("predict", help="apply a fitted model to a test CSV")
    p_pred.add_argument("--model", required=True, help="model file from fit")
    p_pred.add_argument("--test", required=True, help="test CSV (header row)")
    p_pred.add_argument("--out", default=None,
                        help="output CSV path (default: standard output)")

    p_ver = sub.add_parser(
        "verify", help="run the stability/band/bound property checks"
    )
    p_ver.add_argument("--trials", type=int, default=200,
                       help="Monte-Carlo trials for the bound checks")
    p_ver.add_argument("--delta", type=float, default=0.05,
                       help="failure probability for the rate bound")
    p_ver.add_argument("--t-min", type=float, default=4.0,
                       help="smallest T in the verification grid (must be >= 4)")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--quick", action="store_true",
                       help="reduced grids and trial counts")

    p_bench = sub.add_parser("bench", help="cross-validated benchmark harness")
    src = p_bench.add_mutually_exclusive_group(required=True)
    src.add_argument("--synthetic", action="store_true",
                     help="use the built-in synthetic dataset suite")
    src.add_argument("--data-dir", default=None,
                     help="directory of labeled CSV datasets")
    p_bench.add_argument(
        "--detectors", default=",".join(DETECTOR_KINDS),
        help="comma-separated detector kinds (default: all)",
    )
    p_bench.add_argument(
        "--costs", default="q1",
        help="cost preset (q1, case1, case2, case3) or custom 'c_fp,c_fn,c_r'",
    )
    p_bench.add_argument("--t-tolerance", type=float, default=32.0, metavar="T")
    p_bench.add_argument("--delta", type=float, default=0.05)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--folds", type=int, default=5)
    p_bench.add_argument("--gamma", type=float, default=None,
                         help="contamination override for loaded datasets")
    p_bench.add_argument("--label-column", default="label")
    p_bench.add_argument(
        "--scores-only", action="store_true",
        help="treat each dataset's single feature column as precomputed scores",
    )
    p_bench.add_argument("--out-dir", default="bench-out",
                         help="directory for report.json and the CSV outputs")
    return parser


def _split_columns(header: list[str], data: np.ndarray, label_column: str):
    if label_column in header:
        li = header.index(label_column)
        keep = [j for j in range(len(header)) if j != li]
        return [header[j] for j in keep], data[:, keep]
    return list(header), data


def cmd_fit(args) -> int:
    header, data = read_csv_table(args.train)
    names, X = _split_columns(header, data, args.label_column)
    tol = ToleranceSpec(args.t_tolerance)
    detector_state = None
    score_column = None
    if args.detector is not None:
        spec = DetectorSpec(kind=args.detector, seed=args.seed)
        det = fit_detector(spec, X)
        scores = det.score(X)
        detector_state = {
            "kind": spec.kind,
            "k": spec.k,
            "n_trees": spec.n_trees,
            "subsample": spec.subsample,
            "n_bins": spec.n_bins,
            "seed": spec.seed,
            "feature_names": names,
            "train_matrix": [[float(v) for v in row] for row in X],
        }
    else:
        if args.score_column is not None:
            if args.score_column not in names:
                raise DomainError(
                    f"score column {args.score_column!r} not in {args.train}: "
                    f"columns are {names}"
                )
            score_column = args.score_column
        elif len(names) == 1:
            score_column = names[0]
        else:
            raise DomainError(
                f"{args.train} has {len(names)} non-label columns; pass "
                "--score-column to pick one or --detector to fit on features"
            )
        scores = X[:, names.index(score_column)]
    train = ScoreSet(scores, args.gamma)
    rejector = fit(train, tol, delta=args.delta)
    save_model(rejector, args.model_out, score_column=score_column,
               detector=detector_state)
    state = to_dict(rejector)
    summary = {
        "schema_version": state["schema_version"],
        "lambda": state["lambda"],
        "t1": rejector.band.t1,
        "t2": rejector.band.t2,
        "epsilon": tol.epsilon,
        "r_hat": rejector.estimate.r_hat,
        "h": rejector.band.h,
        "n": train.n,
        "gamma": train.gamma,
        "t_tolerance": tol.T,
        "delta": args.delta,
        "degenerate": rejector.degenerate,
        "model": str(args.model_out),
    }
    print(json.dumps(summary, indent=1, default=_json_default))
    return 0


def _scores_from_model(state: dict, header: list[str], data: np.ndarray, test_path):
    detector_state = state.get("detector")
    if detector_state is not None:
        missing = [c for c in detector_state["feature_names"] if c not in header]
        if missing:
            raise DomainError(
                f"{test_path} is missing model feature columns {missing}"
            )
        cols = [header.index(c) for c in detector_state["feature_names"]]
        spec = DetectorSpec(
            kind=detector_state["kind"],
            k=detector_state["k"],
            n_trees=detector_state["n_trees"],
            subsample=detector_state["subsample"],
            n_bins=detector_state["n_bins"],
            seed=detector_state["seed"],
        )
        det = fit_detector(spec, np.asarray(detector_state["train_matrix"], dtype=float))
        if data.shape[0] == 0:
            return np.empty(0)
        return det.score(data[:, cols])
    column = state.get("score_column")
    if column not in header:
        raise DomainError(
            f"{test_path} has no column {column!r} required by the model: "
            f"columns are {header}"
        )
    return data[:, header.index(column)]


def cmd_predict(args) -> int:
    rejector, state = load_model(args.model)
    header, data = read_csv_table(args.test)
    scores = _scores_from_model(state, header, data, args.test)
    rows = []
    if scores.size:
        batch = predict_batch(rejector, scores)
        for i, decision in enumerate(batch.decisions):
            rows.append(
                [
                    repr(float(scores[i])),
                    repr(float(batch.psi_n[i])),
                    repr(float(batch.p_anomaly[i])),
                    repr(float(batch.confidence[i])),
                    str(decision),
                ]
            )
    out_fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out_fh)
        writer.writerow(_PREDICT_COLUMNS)
        writer.writerows(rows)
    finally:
        if args.out:
            out_fh.close()
    return 0


def cmd_verify(args) -> int:
    from .verification import default_verification

    if args.t_min < 4.0:
        return _error_object(
            "DomainError",
            f"T must be >= 4 in the verification grid, got --t-min {args.t_min}",
        )
    checks = default_verification(
        trials=args.trials, delta=args.delta, quick=args.quick,
        seed=args.seed, t_min=args.t_min,
    )
    for check in checks:
        print(check.line())
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} properties passed")
    return 1 if failed else 0


def _parse_costs(text: str):
    if text in COST_PRESETS:
        return text, None
    parts = text.split(",")
    if len(parts) != 3:
        raise DomainError(
            f"--costs must be one of {COST_PRESETS} or 'c_fp,c_fn,c_r', got {text!r}"
        )
    try:
        c_fp, c_fn, c_r = (float(p) for p in parts)
    except ValueError:
        raise DomainError(f"could not parse --costs {text!r} as three floats") from None
    return None, CostSpec(c_fp, c_fn, c_r)


def cmd_bench(args) -> int:
    detector_kinds = tuple(k.strip() for k in args.detectors.split(",") if k.strip())
    for kind in detector_kinds:
        if kind not in DETECTOR_KINDS:
            raise DomainError(
                f"unknown detector {kind!r}, expected among {DETECTOR_KINDS}"
            )
    preset, custom = _parse_costs(args.costs)
    if args.synthetic:
        datasets = synthetic_suite(args.seed)
    else:
        paths = sorted(Path(args.data_dir).glob("*.csv"))
        if not paths:
            raise DomainError(f"no CSV datasets found in {args.data_dir}")
        datasets = []
        for path in paths:
            try:
                datasets.append(
                    load_csv(path, label_column=args.label_column,
                             gamma_override=args.gamma)
                )
            except AdrejectError as exc:
                print(f"skipping {path}: {exc}", file=sys.stderr)
    if not datasets:
        print("all datasets failed to load", file=sys.stderr)
        return 1
    results = []
    failures = 0
    for dataset in datasets:
        try:
            results.extend(
                run_benchmark(
                    [dataset],
                    detector_kinds=detector_kinds,
                    preset=preset or "q1",
                    T=args.t_tolerance,
                    delta=args.delta,
                    n_folds=args.folds,
                    seed=args.seed,
                    custom_costs=custom,
                    scores_only=args.scores_only,
                )
            )
        except AdrejectError as exc:
            failures += 1
            print(f"skipping {dataset.name}: {exc}", file=sys.stderr)
    if not results:
        print("all datasets failed", file=sys.stderr)
        return 1
    report = aggregate(results)
    report["cost_preset"] = preset or f"custom:{args.costs}"
    paths = write_report_files(results, report, args.out_dir)
    for method, stats in sorted(report["overall"].items()):
        print(
            f"{method:9s} mean cost {stats['cost_mean']:.4f} "
            f"mean rank {stats['mean_rank']:.2f} over {stats['trials']} trials"
        )
    viol = report["bound_violations"]
    print(
        f"bound violations: rate {viol['rejection_rate_over_h']}, "
        f"cost {viol['cost_over_bound']} of {viol['trials']} rejex trials"
    )
    for name, path in sorted(paths.items()):
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "fit": cmd_fit,
        "predict": cmd_predict,
        "verify": cmd_verify,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except AdrejectError as exc:
        return _error_object(type(exc).__name__, str(exc))
    except (ValueError, OSError) as exc:
        return _error_object(type(exc).__name__, str(exc))


def console_entry() -> None:
    try:
        code = main()
        sys.stdout.flush()
    except BrokenPipeError:
        # Downstream consumer (e.g. head) closed the pipe; not an error.
        import os

        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = 0
    sys.exit(code)
