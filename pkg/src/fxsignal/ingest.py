"""Loading, validation, and calendar alignment of price and macro data.

Daily OHLC candles are the substrate for all technical features.  Macro
series are irregularly released; each is aligned onto the price calendar as
a (latest value, days since release) step function.  A seeded synthetic
generator provides a deterministic test substrate since no vendor APIs are
called.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .errors import (
    CoverageError,
    EmptyInputError,
    ParseError,
    ValidationError,
)

PRICE_HEADER = ["date", "open", "high", "low", "close"]
MACRO_HEADER = ["release_date", "value"]
REGIONS = ("US", "EA")

REGIMES = ("random_walk", "trending", "mean_reverting")


@dataclass(frozen=True)
class Candle:
    """One daily OHLC observation; prices in quote-currency units."""

    date: date
    open: float
    high: float
    low: float
    close: float

    def __post_init__(self):
        prices = (self.open, self.high, self.low, self.close)
        if not all(p > 0 and np.isfinite(p) for p in prices):
            raise ValidationError(f"{self.date}: prices must be strictly positive and finite")
        if not (self.low <= self.open <= self.high and self.low <= self.close <= self.high):
            raise ValidationError(f"{self.date}: OHLC ordering violated (low <= open/close <= high)")


class PriceSeries:
    """Ordered daily candles with strictly increasing dates."""

    def __init__(self, candles: list[Candle]):
        if not candles:
            raise EmptyInputError("price series must contain at least one candle")
        for prev, cur in zip(candles, candles[1:]):
            if cur.date <= prev.date:
                raise ValidationError(f"dates not strictly increasing at {cur.date}")
        self._candles = list(candles)
        self.dates: list[date] = [c.date for c in candles]
        self.open = np.array([c.open for c in candles], dtype=np.float64)
        self.high = np.array([c.high for c in candles], dtype=np.float64)
        self.low = np.array([c.low for c in candles], dtype=np.float64)
        self.close = np.array([c.close for c in candles], dtype=np.float64)

    def __len__(self) -> int:
        return len(self._candles)

    def __getitem__(self, i: int) -> Candle:
        return self._candles[i]

    def __iter__(self):
        return iter(self._candles)

    def prefix(self, n: int) -> "PriceSeries":
        """First n candles, as a new series (used by look-ahead audits)."""
        return PriceSeries(self._candles[:n])


@dataclass(frozen=True)
class MacroSeries:
    """One macro variable: named, region-tagged, with dated releases."""

    name: str
    region: str
    releases: tuple[tuple[date, float], ...]

    def __post_init__(self):
        if self.region not in REGIONS:
            raise ParseError(f"unknown region tag {self.region!r} (expected one of {REGIONS})")
        if not self.releases:
            raise EmptyInputError(f"macro series {self.name}: no releases")
        for (d0, _), (d1, _) in zip(self.releases, self.releases[1:]):
            if d1 <= d0:
                raise ValidationError(f"macro series {self.name}: release dates not strictly increasing at {d1}")

    @property
    def key(self) -> str:
        return f"{self.region}_{self.name}"


@dataclass
class AlignedMacroFeature:
    """Per trading day: most recent release value and calendar days since it."""

    name: str
    values: np.ndarray
    days_since: np.ndarray = field(repr=False)


def _parse_date(text: str, path: str, lineno: int) -> date:
    try:
        return date.fromisoformat(text.strip())
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: bad date {text!r}: {exc}") from exc


def _parse_float(text: str, path: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: bad number {text!r}") from exc


def load_price_series(path: str) -> PriceSeries:
    """Read an OHLC CSV (header date,open,high,low,close) into a PriceSeries."""
    candles = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [(i + 1, row) for i, row in enumerate(reader) if row and not row[0].startswith("#")]
    if not rows:
        raise EmptyInputError(f"{path}: empty file")
    lineno, header = rows[0]
    if [h.strip() for h in header] != PRICE_HEADER:
        raise ParseError(f"{path}:{lineno}: expected header {','.join(PRICE_HEADER)}")
    for lineno, row in rows[1:]:
        if len(row) != 5:
            raise ParseError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
        d = _parse_date(row[0], path, lineno)
        o, h, l, c = (_parse_float(v, path, lineno) for v in row[1:])
        candles.append(Candle(d, o, h, l, c))
    if not candles:
        raise EmptyInputError(f"{path}: no data rows")
    candles.sort(key=lambda c: c.date)
    return PriceSeries(candles)


def save_price_series(series: PriceSeries, path: str) -> None:
    """Write a PriceSeries as CSV; floats use repr so values round-trip exactly."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(PRICE_HEADER) + "\n")
        for c in series:
            fh.write(f"{c.date.isoformat()},{c.open!r},{c.high!r},{c.low!r},{c.close!r}\n")


def load_macro_series(path: str) -> MacroSeries:
    """Read one macro release CSV; region and name come from the <region>_<name>.csv filename."""
    base = os.path.splitext(os.path.basename(path))[0]
    if "_" not in base:
        raise ParseError(f"{path}: filename must follow <region>_<name>.csv")
    region, name = base.split("_", 1)
    releases = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [(i + 1, row) for i, row in enumerate(reader) if row and not row[0].startswith("#")]
    if not rows:
        raise EmptyInputError(f"{path}: empty file")
    lineno, header = rows[0]
    if [h.strip() for h in header] != MACRO_HEADER:
        raise ParseError(f"{path}:{lineno}: expected header {','.join(MACRO_HEADER)}")
    for lineno, row in rows[1:]:
        if len(row) != 2:
            raise ParseError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        releases.append((_parse_date(row[0], path, lineno), _parse_float(row[1], path, lineno)))
    return MacroSeries(name=name, region=region, releases=tuple(releases))


def load_macro_dir(path: str) -> list[MacroSeries]:
    """Load every *.csv in a directory, sorted by filename for determinism."""
    names = sorted(f for f in os.listdir(path) if f.endswith(".csv"))
    if not names:
        raise EmptyInputError(f"{path}: no macro csv files")
    return [load_macro_series(os.path.join(path, f)) for f in names]


def align_macro(series: MacroSeries, calendar: PriceSeries) -> AlignedMacroFeature:
    """Step-function alignment of releases onto the trading calendar.

    Each calendar day takes the most recent release at or before it, plus the
    calendar-day distance to that release.
    """
    releases = series.releases
    if calendar.dates[0] < releases[0][0]:
        raise CoverageError(
            f"macro series {series.key}: calendar day {calendar.dates[0]} precedes first release {releases[0][0]}"
        )
    values = np.empty(len(calendar), dtype=np.float64)
    days_since = np.empty(len(calendar), dtype=np.int64)
    j = 0
    for i, day in enumerate(calendar.dates):
        while j + 1 < len(releases) and releases[j + 1][0] <= day:
            j += 1
        rel_date, rel_value = releases[j]
        values[i] = rel_value
        days_since[i] = (day - rel_date).days
    return AlignedMacroFeature(name=series.key, values=values, days_since=days_since)


def generate_synthetic(seed: int, days: int, regime: str = "random_walk") -> PriceSeries:
    """Deterministic synthetic daily OHLC series.

    random_walk: driftless gaussian log returns.
    trending: random walk plus the minimal linear ramp guaranteeing
        close[last] > close[first] (by construction, for every seed).
    mean_reverting: Ornstein-Uhlenbeck log price around the starting level.
    """
    if days < 1:
        raise EmptyInputError("days must be >= 1")
    if regime not in REGIMES:
        raise ParseError(f"unknown regime {regime!r} (expected one of {REGIMES})")
    rng = np.random.default_rng(seed)
    log0 = np.log(1.10)
    vol = 0.004
    if regime == "random_walk":
        log_close = log0 + np.concatenate([[0.0], np.cumsum(rng.normal(0.0, vol, size=days - 1))])
    elif regime == "trending":
        log_close = log0 + np.concatenate([[0.0], np.cumsum(rng.normal(0.0, vol, size=days - 1))])
        if days > 1 and log_close[-1] <= log_close[0]:
            ramp = (log_close[0] - log_close[-1] + 1e-4) / (days - 1)
            log_close = log_close + ramp * np.arange(days)
    else:  # mean_reverting
        theta = 0.05
        log_close = np.empty(days)
        log_close[0] = log0
        shocks = rng.normal(0.0, vol, size=days - 1)
        for t in range(1, days):
            log_close[t] = log_close[t - 1] + theta * (log0 - log_close[t - 1]) + shocks[t - 1]
    close = np.exp(log_close)
    open_ = np.concatenate([[close[0]], close[:-1]])
    wick = np.abs(rng.normal(0.0, 0.0015, size=(2, days)))
    high = np.maximum(open_, close) * (1.0 + wick[0])
    low = np.minimum(open_, close) * (1.0 - wick[1])
    start = date(2012, 1, 2)
    candles = [
        Candle(start + timedelta(days=int(t)), float(open_[t]), float(high[t]), float(low[t]), float(close[t]))
        for t in range(days)
    ]
    return PriceSeries(candles)


MACRO_VARIABLE_NAMES = (
    "inflation-rate",
    "inflation-contrib",
    "unemployment-annual",
    "unemployment-quarterly",
    "net-external-debt",
    "gov-debt-annual",
    "gov-debt-components",
    "gov-debt-quarterly",
)


def generate_synthetic_macro(seed: int, calendar: PriceSeries) -> list[MacroSeries]:
    """16 synthetic macro series (8 per region) with irregular release schedules.

    Releases start at the first calendar day so alignment always has coverage.
    """
    out = []
    first, last = calendar.dates[0], calendar.dates[-1]
    for region in REGIONS:
        for k, name in enumerate(MACRO_VARIABLE_NAMES):
            rng = np.random.default_rng([seed, REGIONS.index(region), k])
            period = int(rng.integers(25, 95))
            releases = []
            day = first
            value = float(rng.normal(2.0, 1.0))
            while day <= last:
                releases.append((day, round(value, 4)))
                value += float(rng.normal(0.0, 0.2))
                day = day + timedelta(days=period + int(rng.integers(-3, 4)))
            out.append(MacroSeries(name=name, region=region, releases=tuple(releases)))
    return out


def save_macro_series(series: MacroSeries, directory: str) -> str:
    path = os.path.join(directory, f"{series.region}_{series.name}.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(MACRO_HEADER) + "\n")
        for d, v in series.releases:
            fh.write(f"{d.isoformat()},{v!r}\n")
    return path
