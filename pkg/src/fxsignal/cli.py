"""Batch command-line front end: fx synth | features | label | train | grid
| simulate | report.

Exit codes: 0 success, 1 usage error, 2 data validation error, 3 runtime
failure.  Option precedence: flags > config file > defaults; the config file
is flat ``key = value`` lines.  All outputs carry provenance comment lines
(input hashes, config hash) plus an optional timestamp line disabled by
--no-timestamp.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from datetime import datetime

import numpy as np

from . import dataset as ds
from . import gridsearch as gs
from . import ingest
from . import net as nets
from . import sim
from .errors import (
    CoverageError,
    EmptyInputError,
    FxSignalError,
    ParseError,
    ValidationError,
)

USAGE_EXIT = 1
DATA_EXIT = 2
RUNTIME_EXIT = 3

_DATA_ERRORS = (ParseError, ValidationError, CoverageError, EmptyInputError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def load_config_file(path: str) -> dict[str, str]:
    cfg: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            cfg[key.strip()] = value.strip()
    return cfg


class Options:
    """Flag > config-file > default resolution."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file = load_config_file(args.config) if getattr(args, "config", None) else {}

    def get(self, name: str, default, cast=str):
        flag = getattr(self.args, name.replace("-", "_"), None)
        if flag is not None:
            return flag
        if name in self.file:
            return cast(self.file[name])
        return default

    def hash(self) -> str:
        items = sorted(vars(self.args).items()) + sorted(self.file.items())
        return hashlib.sha256(repr(items).encode()).hexdigest()[:16]


def _parse_models(text: str) -> list[int]:
    models = sorted({int(tok) for tok in text.split(",") if tok.strip() != ""})
    bad = [m for m in models if m not in ds.MODEL_GROUPS]
    if bad:
        raise ParseError(f"unknown model ids {bad}")
    return models


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")


def _provenance(opts: Options, inputs: dict[str, str]) -> dict[str, str]:
    prov = {f"sha256_{name}": ds.file_sha256(path) for name, path in inputs.items()}
    prov["config_hash"] = opts.hash()
    return prov


def _timestamp(args) -> str | None:
    return None if args.no_timestamp else datetime.now().isoformat(timespec="seconds")


# --- subcommands -------------------------------------------------------------


def cmd_synth(args, opts: Options) -> int:
    seed = opts.get("seed", 0, int)
    series = ingest.generate_synthetic(seed, args.days, args.regime)
    ingest.save_price_series(series, args.out)
    print(f"wrote {len(series)} days to {args.out}")
    if args.macro_dir:
        os.makedirs(args.macro_dir, exist_ok=True)
        for macro in ingest.generate_synthetic_macro(seed, series):
            ingest.save_macro_series(macro, args.macro_dir)
        print(f"wrote 16 macro series to {args.macro_dir}")
    return 0


def _build_tables(args, opts: Options, models: list[int]):
    series = ingest.load_price_series(args.price)
    macros = None
    need_macro = any("fundamentals" in ds.MODEL_GROUPS[m] for m in models)
    if need_macro:
        if not args.macro_dir:
            raise ParseError("models with fundamentals need --macro-dir")
        macros = ingest.load_macro_dir(args.macro_dir)
    mode = opts.get("divergence-mode", "independent")
    from .levels import GrouperConfig

    grouper_cfg = GrouperConfig(alpha=opts.get("sr-alpha", 0.04, float))
    bundle = ds.build_feature_bundle(series, macros, grouper_cfg=grouper_cfg, divergence_mode=mode)
    horizon = opts.get("horizon", ds.DEFAULT_HORIZON, int)
    labels = ds.label(series, horizon)
    return {m: ds.assemble(ds.ModelSpec.standard(m), bundle, labels) for m in models}


def cmd_features(args, opts: Options) -> int:
    models = _parse_models(args.models)
    tables = _build_tables(args, opts, models)
    os.makedirs(args.out_dir, exist_ok=True)
    inputs = {"price": args.price}
    prov = _provenance(opts, inputs)
    for m, table in tables.items():
        path = os.path.join(args.out_dir, f"model_{m}.csv")
        ds.save_frame(table, path, provenance=prov, timestamp=_timestamp(args))
        print(f"model {m}: {table.feature_count} features, {len(table)} rows -> {path}")
    return 0


def cmd_label(args, opts: Options) -> int:
    series = ingest.load_price_series(args.price)
    horizon = opts.get("horizon", ds.DEFAULT_HORIZON, int)
    labels = ds.label(series, horizon)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("date,target\n")
        for d, y in labels:
            fh.write(f"{d.isoformat()},{y}\n")
    print(f"wrote {len(labels)} labels to {args.out}")
    return 0


def cmd_train(args, opts: Options) -> int:
    table = ds.load_frame(args.frame)
    seed = opts.get("seed", 0, int)
    split = opts.get("split-fraction", ds.DEFAULT_SPLIT_FRACTION, float)
    cfg = nets.LstmConfig(
        layers=args.layers, hidden_size=args.hidden, back_days=args.back_days,
        epochs=args.epochs, seed=seed,
    )
    train_ds, test_ds = ds.scale_and_window(table, cfg.back_days, split)
    net = nets.LstmNetwork(table.feature_count, cfg.hidden_size, cfg.layers, seed=seed)
    report = nets.train(net, train_ds, cfg)
    nets.save_checkpoint(
        net, cfg, args.out, feature_names=table.names,
        scale_min=train_ds.scale_min, scale_max=train_ds.scale_max,
        split_fraction=split,
    )
    if report.epoch_loss:
        print(f"final train loss {report.epoch_loss[-1]:.4f}, acc {report.epoch_acc[-1]:.4f}")
    print(f"checkpoint -> {args.out} ({len(train_ds)} train / {len(test_ds)} test samples)")
    return 0


def _write_grid_tables(results, out_dir: str) -> None:
    for by in gs.AGGREGATE_KEYS:
        rows = gs.aggregate(results, by)
        with open(os.path.join(out_dir, f"table_by_{by}.txt"), "w", encoding="utf-8") as fh:
            fh.write(gs.render_aggregate(rows, by))
    best = gs.select_best(results, top_k=5)
    with open(os.path.join(out_dir, "table_best.txt"), "w", encoding="utf-8") as fh:
        fh.write(gs.render_best(best))


def cmd_grid(args, opts: Options) -> int:
    models = _parse_models(args.models)
    tables = {}
    for m in models:
        path = os.path.join(args.frames_dir, f"model_{m}.csv")
        if not os.path.exists(path):
            raise ParseError(f"missing frame {path} (run fx features first)")
        tables[m] = ds.load_frame(path)
    grid = gs.HyperGrid(
        epochs=_parse_int_list(args.epochs_grid),
        layers=_parse_int_list(args.layers_grid),
        back_days=_parse_int_list(args.back_days_grid),
    )
    os.makedirs(args.out_dir, exist_ok=True)
    store = os.path.join(args.out_dir, "results.csv")
    results = gs.run_grid(
        tables, grid, master_seed=opts.get("seed", 0, int),
        store_path=store, jobs=opts.get("jobs", None, int),
        hidden_size=args.hidden,
        split_fraction=opts.get("split-fraction", ds.DEFAULT_SPLIT_FRACTION, float),
    )
    _write_grid_tables(results, args.out_dir)
    n_ok = sum(1 for r in results if r.ok)
    print(f"{len(results)} rows ({n_ok} ok) -> {store}")
    return 0 if n_ok > 0 else RUNTIME_EXIT


def cmd_simulate(args, opts: Options) -> int:
    net, cfg, meta, scale_min, scale_max = nets.load_checkpoint(args.checkpoint)
    table = ds.load_frame(args.frame)
    if table.names != meta["feature_names"]:
        raise ValidationError("frame columns do not match the checkpoint's features")
    windowed = ds.window_with_scaling(table, cfg.back_days, scale_min, scale_max)
    split = meta.get("split_fraction") or ds.DEFAULT_SPLIT_FRACTION
    n_labeled = len(windowed) + cfg.back_days - 1
    n_train_rows = int(n_labeled * split)
    test_idx = [i for i in range(len(windowed)) if i + cfg.back_days - 1 >= n_train_rows]
    probs = nets.predict_series(net, windowed)[test_idx]
    dates = [windowed.dates[i] for i in test_idx]

    series = ingest.load_price_series(args.price)
    by_date = {c.date: c for c in series}
    missing = [d for d in dates if d not in by_date]
    if missing:
        raise ValidationError(f"price file lacks {len(missing)} signal dates (first: {missing[0]})")
    aligned = ingest.PriceSeries([by_date[d] for d in dates])

    strategy = sim.StrategyConfig(
        long_threshold=opts.get("long-threshold", 0.7, float),
        short_threshold=opts.get("short-threshold", 0.35, float),
        horizon=opts.get("horizon", 10, int),
        spread_pips=opts.get("spread-pips", 0.0, float),
        commission_per_trade=opts.get("commission", 0.0, float),
    )
    signals = sim.normalize_signals(dates, probs)
    model_id = args.model_id
    os.makedirs(args.out_dir, exist_ok=True)
    regimes = ("fixed_horizon", "dynamic") if args.regime == "both" else (args.regime,)
    for regime in regimes:
        run = sim.fixed_horizon_sim if regime == "fixed_horizon" else sim.dynamic_sim
        trades, report = run(signals, aligned, strategy)
        ledger = os.path.join(args.out_dir, f"ledger_model{model_id}_{regime}.csv")
        sim.save_ledger(ledger, [(model_id, t) for t in trades])
        summary = os.path.join(args.out_dir, f"summary_model{model_id}_{regime}.txt")
        with open(summary, "w", encoding="utf-8") as fh:
            fh.write(sim.render_report(model_id, report))
        print(f"{regime}: {len(trades)} trades -> {ledger}")
    return 0


def cmd_report(args, opts: Options) -> int:
    results = gs.load_store(args.results)
    os.makedirs(args.out_dir, exist_ok=True)
    _write_grid_tables(results, args.out_dir)
    print(f"tables -> {args.out_dir}")
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="fx", description="EUR/USD LSTM trading pipeline")
    parser.add_argument("--seed", type=int, default=None, help="master RNG seed")
    parser.add_argument("--jobs", type=int, default=None, help="parallel workers")
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--no-timestamp", action="store_true", help="omit timestamp lines from outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic price series")
    p.add_argument("--days", type=int, required=True)
    p.add_argument("--regime", choices=ingest.REGIMES, default="random_walk")
    p.add_argument("--out", required=True)
    p.add_argument("--macro-dir", default=None, help="also emit 16 synthetic macro series")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("features", help="build per-model feature frames")
    p.add_argument("--price", required=True)
    p.add_argument("--macro-dir", default=None)
    p.add_argument("--models", default="0,1,2,3,4,5,6,7,8,9")
    p.add_argument("--sr-alpha", type=float, default=None,
                   help="support/resistance clustering tolerance (fraction of price)")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("label", help="write the directional-index targets")
    p.add_argument("--price", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train", help="train one configuration")
    p.add_argument("--frame", required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--layers", type=int, default=1)
    p.add_argument("--back-days", type=int, default=20)
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("grid", help="run the hyperparameter grid")
    p.add_argument("--frames-dir", required=True)
    p.add_argument("--models", default="0,1,2,3,4,5,6,7,8,9")
    p.add_argument("--epochs-grid", default="20,40,60")
    p.add_argument("--layers-grid", default="1,4,8")
    p.add_argument("--back-days-grid", default="20,30")
    p.add_argument("--hidden", type=int, default=32)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("simulate", help="run trading simulations from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--frame", required=True)
    p.add_argument("--price", required=True)
    p.add_argument("--model-id", type=int, default=0)
    p.add_argument("--regime", choices=["fixed_horizon", "dynamic", "both"], default="both")
    p.add_argument("--long-threshold", type=float, default=None)
    p.add_argument("--short-threshold", type=float, default=None)
    p.add_argument("--spread-pips", type=float, default=None)
    p.add_argument("--commission", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="re-render aggregation tables from a results store")
    p.add_argument("--results", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = Options(args)
        return args.func(args, opts)
    except (*_DATA_ERRORS, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except FxSignalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
