"""Support/resistance clustering and Fibonacci retracement levels.

Support/resistance: the 200 trading days preceding a given day are split
into ten 20-day windows; per-window extrema (max High, max Close, min Low,
min Close) are sorted and chained into groups wherever consecutive gaps are
below a tolerance relative to the current close; group means become
candidate levels, and the two nearest on each side of the close are kept.

Fibonacci: ratio levels of the preceding 200-day High-Low range; the two
nearest on each side of the close are kept.  A level equal to the close
counts as resistance (supports are strictly below).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .ingest import PriceSeries


@dataclass(frozen=True)
class GrouperConfig:
    alpha: float = 0.04
    lookback: int = 200
    window: int = 20

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if self.lookback != 10 * self.window:
            raise ValueError("lookback must equal 10 * window")


@dataclass
class LevelEntry:
    """Two supports below and two resistances above the close; NaN = absent."""

    support2: float = np.nan
    support1: float = np.nan
    resistance1: float = np.nan
    resistance2: float = np.nan

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.support2, self.support1, self.resistance1, self.resistance2)


FIB_RATIOS = (0.236, 0.382, 0.5, 0.618, 0.786, 1.272, 1.618)
FIB_BOUNDARY_RATIOS = (0.0, 1.0)


def grouper(sorted_values, delta: float) -> list[list[float]]:
    """Partition an ascending list into maximal runs with consecutive gaps < delta."""
    values = list(sorted_values)
    if delta <= 0:
        raise PreconditionError("delta must be positive")
    if any(b < a for a, b in zip(values, values[1:])):
        raise PreconditionError("grouper input must be sorted ascending")
    groups: list[list[float]] = []
    for v in values:
        if groups and v - groups[-1][-1] < delta:
            groups[-1].append(v)
        else:
            groups.append([v])
    return groups


def _nearest_levels(levels, close: float) -> LevelEntry:
    """Pick the two nearest candidates strictly below and at-or-above the close."""
    below = sorted(v for v in levels if v < close)
    above = sorted(v for v in levels if v >= close)
    entry = LevelEntry()
    if below:
        entry.support1 = below[-1]
    if len(below) > 1:
        entry.support2 = below[-2]
    if above:
        entry.resistance1 = above[0]
    if len(above) > 1:
        entry.resistance2 = above[1]
    return entry


def support_resistance(series: PriceSeries, day: int, cfg: GrouperConfig | None = None) -> LevelEntry:
    """Clustered support/resistance levels for one day (absent before warm-up)."""
    cfg = cfg or GrouperConfig()
    if day < cfg.lookback or day >= len(series):
        return LevelEntry()
    lo = day - cfg.lookback
    extrema: list[float] = []
    for i in range(cfg.lookback // cfg.window):
        a = lo + i * cfg.window
        b = a + cfg.window
        extrema.append(float(series.high[a:b].max()))
        extrema.append(float(series.close[a:b].max()))
        extrema.append(float(series.low[a:b].min()))
        extrema.append(float(series.close[a:b].min()))
    close = float(series.close[day])
    groups = grouper(sorted(extrema), cfg.alpha * close)
    means = [sum(g) / len(g) for g in groups]
    return _nearest_levels(means, close)


def fibonacci_levels(
    series: PriceSeries,
    day: int,
    lookback: int = 200,
    include_boundaries: bool = True,
) -> LevelEntry:
    """Fibonacci-ratio levels of the preceding lookback window for one day."""
    if day < lookback or day >= len(series):
        return LevelEntry()
    lo = day - lookback
    window_high = float(series.high[lo:day].max())
    window_low = float(series.low[lo:day].min())
    span = window_high - window_low
    if span <= 0:
        return LevelEntry()
    ratios = FIB_RATIOS + (FIB_BOUNDARY_RATIOS if include_boundaries else ())
    levels = [window_low + r * span for r in ratios]
    return _nearest_levels(levels, float(series.close[day]))


def support_resistance_columns(series: PriceSeries, cfg: GrouperConfig | None = None) -> dict[str, np.ndarray]:
    """Per-day support/resistance feature columns over a whole series."""
    names = ("SR_S2", "SR_S1", "SR_R1", "SR_R2")
    cols = {n: np.full(len(series), np.nan) for n in names}
    for day in range(len(series)):
        entry = support_resistance(series, day, cfg)
        for n, v in zip(names, entry.as_tuple()):
            cols[n][day] = v
    return cols


def fibonacci_columns(series: PriceSeries, lookback: int = 200, include_boundaries: bool = True) -> dict[str, np.ndarray]:
    """Per-day Fibonacci level feature columns over a whole series."""
    names = ("FIB_S2", "FIB_S1", "FIB_R1", "FIB_R2")
    cols = {n: np.full(len(series), np.nan) for n in names}
    for day in range(len(series)):
        entry = fibonacci_levels(series, day, lookback, include_boundaries)
        for n, v in zip(names, entry.as_tuple()):
            cols[n][day] = v
    return cols
