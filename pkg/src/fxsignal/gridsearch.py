"""Hyperparameter grid driver, overfitting differentials, and aggregation tables.

Each (model, epochs, layers, back_days) cell trains one classifier with a
seed derived from the master seed and the cell key, so results are
independent of execution order and the run is resumable: completed rows in
the store are skipped, and the store is rewritten in canonical order at the
end so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import metrics
from .dataset import DEFAULT_SPLIT_FRACTION, FeatureTable, scale_and_window
from .errors import FxSignalError, UndefinedMetricError
from .net import LstmConfig, LstmNetwork, predict_series, train

STORE_COLUMNS = [
    "model", "epochs", "layers", "back_days", "seed", "feature_count", "status",
    "auc_train", "auc_test", "auc_min", "auc_diff",
    "acc_train", "acc_test", "acc_diff", "recall_test",
    "tp", "fp", "tn", "fn", "lift_test", "error",
]


@dataclass(frozen=True)
class HyperGrid:
    epochs: tuple[int, ...] = (20, 40, 60)
    layers: tuple[int, ...] = (1, 4, 8)
    back_days: tuple[int, ...] = (20, 30)

    def cells(self) -> list[tuple[int, int, int]]:
        return [(e, l, b) for e in self.epochs for l in self.layers for b in self.back_days]


@dataclass
class MetricsReport:
    auc_train: float
    auc_test: float
    acc_train: float
    acc_test: float
    recall_test: float
    confusion: tuple[int, int, int, int]
    lift: list[float] = field(default_factory=list)

    @property
    def auc_min(self) -> float:
        return min(self.auc_train, self.auc_test)

    @property
    def auc_diff(self) -> float:
        return self.auc_train - self.auc_test

    @property
    def acc_diff(self) -> float:
        return self.acc_train - self.acc_test


@dataclass
class GridResult:
    model_id: int
    feature_count: int
    epochs: int
    layers: int
    back_days: int
    seed: int
    report: MetricsReport | None = None
    error: str | None = None

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.model_id, self.epochs, self.layers, self.back_days)

    @property
    def ok(self) -> bool:
        return self.report is not None


def config_seed(master_seed: int, model_id: int, epochs: int, layers: int, back_days: int) -> int:
    """Order-independent per-cell seed."""
    key = f"{master_seed}:{model_id}:{epochs}:{layers}:{back_days}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big") >> 1


def evaluate_config(
    table: FeatureTable,
    model_id: int,
    epochs: int,
    layers: int,
    back_days: int,
    seed: int,
    hidden_size: int = 32,
    split_fraction: float = DEFAULT_SPLIT_FRACTION,
) -> GridResult:
    """Train one cell and measure it on both splits; failures become rows."""
    result = GridResult(
        model_id=model_id, feature_count=table.feature_count,
        epochs=epochs, layers=layers, back_days=back_days, seed=seed,
    )
    try:
        train_ds, test_ds = scale_and_window(table, back_days, split_fraction)
        cfg = LstmConfig(
            layers=layers, hidden_size=hidden_size, back_days=back_days,
            epochs=epochs, seed=seed,
        )
        net = LstmNetwork(table.feature_count, hidden_size, layers, seed=seed)
        train(net, train_ds, cfg)
        p_train = predict_series(net, train_ds)
        p_test = predict_series(net, test_ds)
        result.report = MetricsReport(
            auc_train=metrics.auc(p_train, train_ds.y),
            auc_test=metrics.auc(p_test, test_ds.y),
            acc_train=metrics.accuracy(p_train, train_ds.y),
            acc_test=metrics.accuracy(p_test, test_ds.y),
            recall_test=metrics.recall(p_test, test_ds.y),
            confusion=metrics.confusion(p_test, test_ds.y),
            lift=list(metrics.lift_curve(p_test, test_ds.y)) if len(test_ds) >= 10 else [],
        )
    except (FxSignalError, UndefinedMetricError) as exc:
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def _worker(args) -> GridResult:
    table, model_id, e, l, b, seed, hidden, split = args
    try:
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=1):
            return evaluate_config(table, model_id, e, l, b, seed, hidden, split)
    except ImportError:
        return evaluate_config(table, model_id, e, l, b, seed, hidden, split)


def run_grid(
    tables: dict[int, FeatureTable],
    grid: HyperGrid,
    master_seed: int,
    store_path: str | None = None,
    jobs: int | None = None,
    hidden_size: int = 32,
    split_fraction: float = DEFAULT_SPLIT_FRACTION,
) -> list[GridResult]:
    """Run every (model, cell) combination; resumable via the results store."""
    done: dict[tuple[int, int, int, int], GridResult] = {}
    if store_path and os.path.exists(store_path):
        for row in load_store(store_path):
            done[row.key] = row
    tasks = []
    for model_id in sorted(tables):
        table = tables[model_id]
        for e, l, b in grid.cells():
            if (model_id, e, l, b) in done:
                continue
            seed = config_seed(master_seed, model_id, e, l, b)
            tasks.append((table, model_id, e, l, b, seed, hidden_size, split_fraction))
    results = list(done.values())
    if tasks:
        if jobs is None:
            jobs = os.cpu_count() or 1
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for res in pool.map(_worker, tasks, chunksize=1):
                    results.append(res)
                    if store_path:
                        append_store(store_path, res)
        else:
            for task in tasks:
                res = _worker(task)
                results.append(res)
                if store_path:
                    append_store(store_path, res)
    results.sort(key=lambda r: r.key)
    if store_path:
        save_store(store_path, results)
    return results


# --- results store ----------------------------------------------------------


def _result_row(r: GridResult) -> list[str]:
    rep = r.report
    def fmt(v):
        return repr(float(v)) if v is not None else ""
    return [
        str(r.model_id), str(r.epochs), str(r.layers), str(r.back_days),
        str(r.seed), str(r.feature_count), "ok" if r.ok else "failed",
        fmt(rep.auc_train) if rep else "", fmt(rep.auc_test) if rep else "",
        fmt(rep.auc_min) if rep else "", fmt(rep.auc_diff) if rep else "",
        fmt(rep.acc_train) if rep else "", fmt(rep.acc_test) if rep else "",
        fmt(rep.acc_diff) if rep else "", fmt(rep.recall_test) if rep else "",
        str(rep.confusion[0]) if rep else "", str(rep.confusion[1]) if rep else "",
        str(rep.confusion[2]) if rep else "", str(rep.confusion[3]) if rep else "",
        "|".join(repr(float(v)) for v in rep.lift) if rep else "",
        r.error or "",
    ]


def append_store(path: str, result: GridResult) -> None:
    new = not os.path.exists(path)
    with open(path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(STORE_COLUMNS)
        writer.writerow(_result_row(result))


def save_store(path: str, results: list[GridResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(STORE_COLUMNS)
        for r in sorted(results, key=lambda r: r.key):
            writer.writerow(_result_row(r))


def load_store(path: str) -> list[GridResult]:
    results = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            report = None
            if row["status"] == "ok":
                report = MetricsReport(
                    auc_train=float(row["auc_train"]),
                    auc_test=float(row["auc_test"]),
                    acc_train=float(row["acc_train"]),
                    acc_test=float(row["acc_test"]),
                    recall_test=float(row["recall_test"]),
                    confusion=(int(row["tp"]), int(row["fp"]), int(row["tn"]), int(row["fn"])),
                    lift=[float(v) for v in row["lift_test"].split("|")] if row["lift_test"] else [],
                )
            results.append(GridResult(
                model_id=int(row["model"]), feature_count=int(row["feature_count"]),
                epochs=int(row["epochs"]), layers=int(row["layers"]),
                back_days=int(row["back_days"]), seed=int(row["seed"]),
                report=report, error=row["error"] or None,
            ))
    return results


# --- aggregation ------------------------------------------------------------

AGGREGATE_KEYS = ("model", "epochs", "layers", "back_days")


def aggregate(results: list[GridResult], by: str) -> list[dict]:
    """MAX/AVG/MIN of AUC_min and AVG(AUC_diff), grouped by one key."""
    if by not in AGGREGATE_KEYS:
        raise ValueError(f"unknown aggregation key {by!r}")
    attr = {"model": "model_id", "epochs": "epochs", "layers": "layers", "back_days": "back_days"}[by]
    groups: dict[int, list[GridResult]] = {}
    for r in results:
        if r.ok:
            groups.setdefault(getattr(r, attr), []).append(r)
    rows = []
    for key in sorted(groups):
        mins = np.array([g.report.auc_min for g in groups[key]])
        diffs = np.array([g.report.auc_diff for g in groups[key]])
        rows.append({
            by: key,
            "max_auc_min": float(mins.max()),
            "avg_auc_min": float(mins.mean()),
            "min_auc_min": float(mins.min()),
            "avg_auc_diff": float(diffs.mean()),
        })
    return rows


def select_best(results: list[GridResult], top_k: int) -> list[GridResult]:
    """Descending AUC_min; ties by smaller AUC_diff, then layers, then epochs."""
    ok = [r for r in results if r.ok]
    ok.sort(key=lambda r: (-r.report.auc_min, r.report.auc_diff, r.layers, r.epochs))
    return ok[:top_k]


def render_aggregate(rows: list[dict], by: str) -> str:
    """Plain-text table: key, MAX/AVG/MIN(AUC_min), AVG(AUC_diff)."""
    header = [by.capitalize(), "MAX(AUC_min)", "AVG(AUC_min)", "MIN(AUC_min)", "AVG(AUC_diff)"]
    body = [
        [str(r[by]), f"{r['max_auc_min']:.4f}", f"{r['avg_auc_min']:.4f}",
         f"{r['min_auc_min']:.4f}", f"{r['avg_auc_diff']:.4f}"]
        for r in rows
    ]
    return _render_table(header, body)


def render_best(best: list[GridResult]) -> str:
    header = ["Model", "Features", "Epochs", "Layers", "Days",
              "AUC_test", "AUC_train", "AUC_min", "AUC_diff"]
    body = [
        [str(r.model_id), str(r.feature_count), str(r.epochs), str(r.layers), str(r.back_days),
         f"{r.report.auc_test:.4f}", f"{r.report.auc_train:.4f}",
         f"{r.report.auc_min:.4f}", f"{r.report.auc_diff:.4f}"]
        for r in best
    ]
    return _render_table(header, body)


def _render_table(header: list[str], body: list[list[str]]) -> str:
    widths = [max(len(h), *(len(row[i]) for row in body)) if body else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines) + "\n"
