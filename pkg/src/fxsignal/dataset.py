"""Targets, per-model feature assembly, scaling, windowing, and frame files.

The binary target comes from the directional index: an equally weighted sum
of the forward-window maximum move, minimum move, and horizon-end move of
the close.  Ten model variable sets combine six feature groups; rows with
any absent value are dropped, min-max scaling is fit on the chronological
training split only, and samples are sliding look-back windows labeled by
their final row.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import date

import numpy as np

from . import divergence as div
from . import indicators as ind
from . import levels as lvl
from .errors import ConfigError, ParseError, PreconditionError
from .ingest import AlignedMacroFeature, MacroSeries, PriceSeries, align_macro

GROUP_ORDER = ("price", "indicators", "fundamentals", "levels", "divergence", "fibonacci")

MODEL_GROUPS: dict[int, tuple[str, ...]] = {
    0: ("price",),
    1: ("indicators",),
    2: ("fundamentals",),
    3: ("indicators", "fundamentals"),
    4: ("indicators", "levels"),
    5: ("indicators", "fundamentals", "levels"),
    6: ("indicators", "levels", "divergence"),
    7: ("indicators", "fundamentals", "levels", "divergence"),
    8: ("indicators", "levels", "divergence", "fibonacci"),
    9: GROUP_ORDER,
}

# The ichimoku lagging span references the close m days ahead, so it is the
# one indicator column excluded from model features (see assemble).
ANTICAUSAL_COLUMNS = ("CS",)

DEFAULT_HORIZON = 10
DEFAULT_SPLIT_FRACTION = 0.8


@dataclass(frozen=True)
class ModelSpec:
    id: int
    feature_groups: tuple[str, ...]

    def __post_init__(self):
        if self.id not in MODEL_GROUPS:
            raise ConfigError(f"unknown model id {self.id}")
        unknown = set(self.feature_groups) - set(GROUP_ORDER)
        if unknown:
            raise ConfigError(f"unknown feature groups {sorted(unknown)}")

    @classmethod
    def standard(cls, model_id: int) -> "ModelSpec":
        if model_id not in MODEL_GROUPS:
            raise ConfigError(f"unknown model id {model_id}")
        return cls(model_id, MODEL_GROUPS[model_id])


def directional_index(series: PriceSeries, n: int, h: int = DEFAULT_HORIZON) -> float:
    """Equal-weight composite of forward max, forward min, and horizon-end moves."""
    if n + h >= len(series):
        raise PreconditionError(f"no full forward window at position {n} (h={h}, T={len(series)})")
    p = series.close
    fwd = p[n + 1: n + h + 1]
    return 0.5 * (fwd.max() - p[n]) + 0.5 * (fwd.min() - p[n]) + 0.5 * (p[n + h] - p[n])


def label(series: PriceSeries, h: int = DEFAULT_HORIZON) -> list[tuple[date, int]]:
    """(date, Y) per day with a full forward window; Y = 1 iff the index is positive."""
    if len(series) <= h:
        raise PreconditionError(f"series length {len(series)} must exceed horizon {h}")
    return [
        (series.dates[n], 1 if directional_index(series, n, h) > 0 else 0)
        for n in range(len(series) - h)
    ]


@dataclass
class FeatureBundle:
    """All feature columns computed once from a price series and macro data."""

    series: PriceSeries
    groups: dict[str, dict[str, np.ndarray]]


def build_feature_bundle(
    series: PriceSeries,
    macros: list[MacroSeries] | None = None,
    params: ind.IndicatorParams | None = None,
    grouper_cfg: lvl.GrouperConfig | None = None,
    divergence_mode: str = "independent",
) -> FeatureBundle:
    """Compute every feature group for one price series."""
    groups: dict[str, dict[str, np.ndarray]] = {}
    groups["price"] = {
        "open": series.open.copy(),
        "high": series.high.copy(),
        "low": series.low.copy(),
        "close": series.close.copy(),
    }
    cols = ind.compute_all(series, params)
    groups["indicators"] = {c.name: c.values for c in cols}
    if macros:
        aligned: list[AlignedMacroFeature] = [align_macro(m, series) for m in macros]
        fundamentals: dict[str, np.ndarray] = {}
        for a in aligned:
            fundamentals[a.name] = a.values
            fundamentals[a.name + "_days"] = a.days_since.astype(np.float64)
        groups["fundamentals"] = fundamentals
    cfg = grouper_cfg or lvl.GrouperConfig()
    groups["levels"] = lvl.support_resistance_columns(series, cfg)
    groups["fibonacci"] = lvl.fibonacci_columns(series, cfg.lookback)
    sqz = groups["indicators"]["SQZ"]
    groups["divergence"] = div.divergence_columns(series.close, sqz, divergence_mode)
    return FeatureBundle(series=series, groups=groups)


@dataclass
class FeatureTable:
    """Dense per-day table: ordered dates, named columns, optional target."""

    dates: list[date]
    names: list[str]
    values: np.ndarray = field(repr=False)
    target: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def feature_count(self) -> int:
        return len(self.names)


def assemble(
    model: ModelSpec,
    bundle: FeatureBundle,
    labels: list[tuple[date, int]] | None = None,
) -> FeatureTable:
    """Join the model's feature groups; drop days with any absent value.

    Column order: groups in their canonical order, then alphabetical within
    each group.  Target is NaN on days beyond the label horizon.
    """
    names: list[str] = []
    columns: list[np.ndarray] = []
    for group in GROUP_ORDER:
        if group not in model.feature_groups:
            continue
        if group not in bundle.groups:
            raise ConfigError(f"feature group {group!r} not available in bundle")
        gcols = bundle.groups[group]
        for name in sorted(gcols):
            if group == "indicators" and name in ANTICAUSAL_COLUMNS:
                continue
            names.append(name)
            columns.append(gcols[name])
    values = np.column_stack(columns)
    keep = ~np.isnan(values).any(axis=1)
    dates = [d for d, k in zip(bundle.series.dates, keep) if k]
    values = values[keep]
    target = None
    if labels is not None:
        label_map = dict(labels)
        target = np.array([float(label_map.get(d, np.nan)) for d in dates])
    return FeatureTable(dates=dates, names=names, values=values, target=target)


@dataclass
class WindowedDataset:
    """Sliding-window samples for one split, plus the train-fit scaling."""

    split: str
    x: np.ndarray = field(repr=False)  # (n, back_days, features)
    y: np.ndarray = field(repr=False)
    dates: list[date] = field(default_factory=list)
    scale_min: np.ndarray | None = field(default=None, repr=False)
    scale_max: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.y)


def scale_and_window(
    table: FeatureTable,
    back_days: int,
    split_fraction: float = DEFAULT_SPLIT_FRACTION,
) -> tuple[WindowedDataset, WindowedDataset]:
    """Chronological split, train-fit min-max scaling, and look-back windowing.

    A sample's split is decided by its target row; test samples may reach
    back into train rows for feature history.  Constant features scale to 0.
    """
    if table.target is None:
        raise ConfigError("table has no target column")
    labeled = ~np.isnan(table.target)
    values = table.values[labeled]
    target = table.target[labeled]
    dates = [d for d, k in zip(table.dates, labeled) if k]
    n = len(target)
    if n <= back_days:
        raise PreconditionError(f"table length {n} must exceed back_days {back_days}")
    n_train_rows = int(n * split_fraction)
    lo = values[:n_train_rows].min(axis=0)
    hi = values[:n_train_rows].max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = (values - lo) / safe

    xs, ys, ds, tags = [], [], [], []
    for i in range(n - back_days + 1):
        end = i + back_days - 1
        xs.append(scaled[i: end + 1])
        ys.append(target[end])
        ds.append(dates[end])
        tags.append("train" if end < n_train_rows else "test")
    x = np.stack(xs)
    y = np.array(ys)
    train_idx = [i for i, t in enumerate(tags) if t == "train"]
    test_idx = [i for i, t in enumerate(tags) if t == "test"]

    def make(split: str, idx: list[int]) -> WindowedDataset:
        return WindowedDataset(
            split=split,
            x=x[idx],
            y=y[idx],
            dates=[ds[i] for i in idx],
            scale_min=lo.copy(),
            scale_max=hi.copy(),
        )

    return make("train", train_idx), make("test", test_idx)


def window_with_scaling(
    table: FeatureTable,
    back_days: int,
    scale_min: np.ndarray,
    scale_max: np.ndarray,
) -> WindowedDataset:
    """Window a table with a previously fit scaler (checkpoint replay path)."""
    if table.target is None:
        raise ConfigError("table has no target column")
    labeled = ~np.isnan(table.target)
    values = table.values[labeled]
    target = table.target[labeled]
    dates = [d for d, k in zip(table.dates, labeled) if k]
    span = scale_max - scale_min
    safe = np.where(span > 0, span, 1.0)
    scaled = (values - scale_min) / safe
    xs, ys, ds = [], [], []
    for i in range(len(target) - back_days + 1):
        end = i + back_days - 1
        xs.append(scaled[i: end + 1])
        ys.append(target[end])
        ds.append(dates[end])
    return WindowedDataset(
        split="all", x=np.stack(xs), y=np.array(ys), dates=ds,
        scale_min=scale_min, scale_max=scale_max,
    )


def save_frame(
    table: FeatureTable,
    path: str,
    provenance: dict[str, str] | None = None,
    timestamp: str | None = None,
) -> None:
    """Write a FeatureFrame CSV: '#' provenance lines, header, empty = absent."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key, value in (provenance or {}).items():
            fh.write(f"# {key}: {value}\n")
        if timestamp is not None:
            fh.write(f"# written: {timestamp}\n")
        header = ["date"] + table.names + (["target"] if table.target is not None else [])
        fh.write(",".join(header) + "\n")
        for i, d in enumerate(table.dates):
            cells = [d.isoformat()]
            cells += ["" if np.isnan(v) else repr(float(v)) for v in table.values[i]]
            if table.target is not None:
                t = table.target[i]
                cells.append("" if np.isnan(t) else repr(int(t)))
            fh.write(",".join(cells) + "\n")


def load_frame(path: str) -> FeatureTable:
    """Read a FeatureFrame CSV written by save_frame."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    if not lines:
        raise ParseError(f"{path}: no header row")
    header = lines[0].split(",")
    if header[0] != "date":
        raise ParseError(f"{path}: first column must be 'date'")
    has_target = header[-1] == "target"
    names = header[1:-1] if has_target else header[1:]
    dates, rows, targets = [], [], []
    for ln in lines[1:]:
        cells = ln.split(",")
        dates.append(date.fromisoformat(cells[0]))
        feats = cells[1:-1] if has_target else cells[1:]
        rows.append([float(c) if c else np.nan for c in feats])
        if has_target:
            targets.append(float(cells[-1]) if cells[-1] else np.nan)
    values = np.array(rows, dtype=np.float64) if rows else np.empty((0, len(names)))
    target = np.array(targets) if has_target else None
    return FeatureTable(dates=dates, names=names, values=values, target=target)


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
