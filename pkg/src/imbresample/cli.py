"""Command-line interface: ``imbresample {synth,resample,bench,evaluate}``.

Exit codes:
    0  success
    2  bad arguments (usage errors, unknown method or parameter)
    3  data errors (unreadable CSV, schema mismatch, too few minority rows)
    4  degenerate-method signals (no boundary, target already met, k too large)
    5  internal faults

Every subcommand accepts ``--config FILE``: a flat ``key = value`` text file
whose keys are the long flag names (dashes or underscores). Blank lines and
``#`` comments are ignored. Flags given on the command line win.
"""
from __future__ import annotations

import argparse
import ast
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from . import tractability
from .core import (
    AlreadySatisfied,
    CategoricalUnsupported,
    DataError,
    DegenerateSignal,
    KTooLarge,
    SeededRng,
    class_partition,
    parse_schema,
    read_csv_dataset,
    write_csv_dataset,
)
from .metrics import delta_report, format_delta_table, write_reports
from .pipeline import PipelineAborted, PipelineConfig, evaluate
from .registry import METHODS, UnknownMethod, resampler, run_method
from .synth import SynthConfig, make_dataset, synth_schema

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SIGNAL, EXIT_INTERNAL = 0, 2, 3, 4, 5
SIGNALS = (DegenerateSignal, AlreadySatisfied, KTooLarge, CategoricalUnsupported)


class UsageError(Exception):
    pass


def exit_code_for(err: BaseException) -> int:
    if isinstance(err, PipelineAborted) and err.__cause__ is not None:
        return exit_code_for(err.__cause__)
    if isinstance(err, (UsageError, UnknownMethod, TypeError)):
        return EXIT_USAGE
    if isinstance(err, SIGNALS):
        return EXIT_SIGNAL
    if isinstance(err, (DataError, OSError)):
        return EXIT_DATA
    return EXIT_INTERNAL


# --------------------------------------------------------------------------
# argument helpers


def read_config(path) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _int_list(text: str) -> list:
    """``0,1,2`` or a range ``0..9`` (inclusive)."""
    items = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            items.extend(range(int(lo), int(hi) + 1))
        elif part:
            items.append(int(float(part)))
    return items


def _name_list(text: str) -> list:
    return [p.strip() for p in str(text).split(",") if p.strip()]


def _value(text: str):
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _params(pairs) -> dict:
    """``key=value`` strings; values parsed as Python literals when possible."""
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"bad parameter {item!r}; expected key=value")
        out[key.strip()] = _value(value.strip())
    return out


def _method_params(pairs) -> dict:
    """``method.key=value`` strings grouped by method."""
    grouped = {}
    for key, value in _params(pairs).items():
        method, dot, name = key.partition(".")
        if not dot:
            raise UsageError(f"evaluate parameters need method.key=value, got {key!r}")
        grouped.setdefault(method, {})[name] = value
    return grouped


def _load(args):
    schema = args.schema
    if schema is None:
        sidecar = Path(str(args.data) + ".schema")
        if not sidecar.exists():
            raise UsageError("--schema is required (or a DATA.schema sidecar file)")
        schema = sidecar.read_text().strip()
    return read_csv_dataset(args.data, parse_schema(schema))


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _ratio_line(dataset) -> str:
    mino, majo = class_partition(dataset)
    return f"achieved ratio {len(mino) / len(majo):.6f} ({len(mino)} minority / {len(majo)} majority)"


# --------------------------------------------------------------------------
# commands


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        n_rows=args.rows,
        fraud_ratio=args.fraud_ratio,
        n_numeric=args.numeric,
        n_categorical=args.categorical,
        clusters=args.clusters,
        separation=args.separation,
        overlap=args.overlap,
        cardinality=args.cardinality,
        seed=args.seed,
    )
    dataset = make_dataset(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_csv_dataset(dataset, out)
    schema = ",".join(f"{k}:{v}" for k, v in synth_schema(cfg).items())
    Path(str(out) + ".schema").write_text(schema + "\n")
    print(f"wrote {dataset.n_rows} rows ({int(dataset.labels.sum())} minority) to {out}")
    return EXIT_OK


def cmd_resample(args) -> int:
    dataset = _load(args)
    out = run_method(args.method, dataset, SeededRng(args.seed), args.ratio, **_params(args.param))
    result = out.apply(dataset)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_csv_dataset(result, path)
    provenance = {
        "method": args.method,
        "ratio": args.ratio,
        "seed": args.seed,
        "parameters": _params(args.param),
        "input_rows": dataset.n_rows,
        "output_rows": result.n_rows,
        "kept_indices": out.kept_indices,
        "synthetic": {
            "count": out.n_synthetic,
            "base": out.provenance_base,
            "neighbor": out.provenance_neighbor,
            "lambda": [float.hex(float(v)) for v in out.provenance_lambda],
        },
        "info": out.info,
    }
    Path(str(path) + ".provenance.json").write_text(json.dumps(_jsonable(provenance), indent=1))
    print(_ratio_line(result))
    return EXIT_OK


def _bench_sizes(args, n_rows: int) -> list:
    if args.sizes:
        return _int_list(args.sizes)
    sizes = [s for s in tractability.DEFAULT_SIZES if s <= n_rows]
    if len(sizes) < 4:
        # a 3-point ladder would let the quadratic family interpolate exactly
        low = min(n_rows, max(200, n_rows // 100))
        sizes = sorted({int(round(v)) for v in np.geomspace(low, n_rows, 5)})
    return sizes


def cmd_bench(args) -> int:
    dataset = _load(args)
    sizes = _bench_sizes(args, dataset.n_rows)
    params = _method_params(args.param)
    decisions, records = [], []
    for name in _name_list(args.methods):
        run = resampler(name, args.ratio, **params.get(name, {}))
        samples = tractability.time_on_subsets(run, dataset, sizes, args.repetitions, SeededRng(args.seed))
        fit = tractability.fit_growth_models(samples, degree=args.degree)
        decision = tractability.gate(fit.best, args.target_size, args.budget, name, args.safety_factor)
        decisions.append(decision)
        records.append(
            {
                "method": name,
                "samples": [{"size": s.subset_size, "seconds": s.wall_seconds, "runs": list(s.runs)} for s in samples],
                "best": {"family": fit.best.family, "coefficients": list(fit.best.coefficients), "r2": fit.best.r2},
                "candidates": [{"family": c.family, "coefficients": list(c.coefficients), "r2": c.r2} for c in fit.candidates],
                "failures": fit.failures,
                "predicted_seconds": decision.predicted_seconds,
                "clamped": decision.clamped,
                "decision": decision.decision,
            }
        )
        print(f"{name}: {decision.family} fit, {tractability.humanize_seconds(decision.predicted_seconds)} -> {decision.decision}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = {
        "target_size": args.target_size,
        "budget_seconds": args.budget,
        "safety_factor": args.safety_factor,
        "sizes": sizes,
        "methods": records,
    }
    (out / "bench.json").write_text(json.dumps(_jsonable(doc), indent=1))
    table = tractability.format_gate_table(decisions)
    (out / "bench.txt").write_text(table + "\n")
    print(table)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    dataset = _load(args)
    model = {
        "m": args.stages,
        "learning_rate": args.learning_rate,
        "max_depth": args.max_depth,
        "min_samples_leaf": args.min_samples_leaf,
    }
    try:
        config = PipelineConfig(
            split=args.split,
            ratio=args.ratio,
            seeds=tuple(_int_list(args.seeds)),
            threshold=args.threshold,
            smoothing=args.smoothing,
            model=model,
            method_params=_method_params(args.param),
        )
    except ValueError as err:
        raise UsageError(str(err)) from None
    methods = _name_list(args.methods)
    for name in methods:
        if name not in METHODS:
            raise UnknownMethod(f"unknown method {name!r}")

    def progress(seed, name, record):
        if args.verbose:
            print(f"seed {seed} {name}: " + " ".join(f"{k}={v:.4f}" for k, v in record.items()), file=sys.stderr)

    try:
        baseline, treatments = evaluate(dataset, methods, config, progress=progress)
    except PipelineAborted as err:
        done = sorted(set(next(iter(err.completed.values())).seeds)) if err.completed else []
        print(f"{err}; completed seeds: {done}", file=sys.stderr)
        if done:
            reports = list(err.completed.values())
            write_reports(Path(args.out) / "partial", reports[0], reports[1:])
        raise
    write_reports(args.out, baseline, treatments)
    print(format_delta_table(delta_report(baseline, treatments)))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _common_data(p):
    p.add_argument("--data", help="input CSV with a header row")
    p.add_argument("--schema", help="name:role,... with roles numeric|categorical|label (default: DATA.schema)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imbresample", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic imbalanced CSV")
    p.add_argument("--config")
    p.add_argument("--rows", type=int, default=10_000)
    p.add_argument("--fraud-ratio", type=float, default=0.01)
    p.add_argument("--numeric", type=int, default=4)
    p.add_argument("--categorical", type=int, default=2)
    p.add_argument("--clusters", type=int, default=2)
    p.add_argument("--separation", type=float, default=3.0)
    p.add_argument("--overlap", type=float, default=0.3)
    p.add_argument("--cardinality", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="synth.csv")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("resample", help="resample a CSV with one method")
    p.add_argument("--config")
    _common_data(p)
    p.add_argument("--method", default="random_under", help=f"one of: {', '.join(METHODS)}")
    p.add_argument("--ratio", type=float, default=0.1, help="target minority/majority ratio")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", action="append", help="method parameter key=value (repeatable)")
    p.add_argument("--out", default="resampled.csv")
    p.set_defaults(func=cmd_resample)

    p = sub.add_parser("bench", help="time methods on nested subsets and gate on a budget")
    p.add_argument("--config")
    _common_data(p)
    p.add_argument("--methods", default="random_under,random_over")
    p.add_argument("--ratio", type=float, default=0.1)
    p.add_argument("--sizes", help="comma-separated subset sizes (default: 1e3..1e6 ladder within the data)")
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--target-size", type=int, default=tractability.DEFAULT_TARGET_SIZE)
    p.add_argument("--budget", type=float, default=tractability.DEFAULT_BUDGET, help="seconds")
    p.add_argument("--safety-factor", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--param", action="append", help="method.key=value (repeatable)")
    p.add_argument("--out", default="bench_out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("evaluate", help="seed-averaged pipeline with deltas against no resampling")
    p.add_argument("--config")
    _common_data(p)
    p.add_argument("--methods", default="random_under,random_over")
    p.add_argument("--ratio", type=float, default=0.1)
    p.add_argument("--seeds", default="0..9", help="e.g. 0..9 or 1,4,7")
    p.add_argument("--split", type=float, default=2 / 3, help="training fraction")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--stages", type=int, default=200)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--max-depth", type=int, default=6)
    p.add_argument("--min-samples-leaf", type=int, default=20)
    p.add_argument("--param", action="append", help="method.key=value (repeatable)")
    p.add_argument("--out", default="evaluate_out")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_evaluate)
    return parser


def _apply_config(parser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in subparser._actions}
    for key, value in values.items():
        if key in ("config", "help") or key not in known:
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        action = known[key]
        if isinstance(action, argparse._AppendAction):
            values[key] = [v.strip() for v in value.split(";") if v.strip()]
        elif isinstance(action, argparse._StoreTrueAction):
            values[key] = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            values[key] = action.type(value)
    subparser.set_defaults(**values)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if getattr(args, "data", "") is None:
            raise UsageError("--data is required")
        return args.func(args)
    except SystemExit as err:
        return int(err.code or 0) if isinstance(err.code, int) else EXIT_USAGE
    except Exception as err:  # noqa: BLE001 - mapped to exit codes
        code = exit_code_for(err)
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        if code == EXIT_INTERNAL:
            traceback.print_exc()
        return code


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
