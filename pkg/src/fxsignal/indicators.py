"""The eleven technical indicators/oscillators, as rolling per-day columns.

Every operation takes a PriceSeries and returns one or more IndicatorColumn
whose values are NaN during the warm-up prefix.  Formulas follow the source
conventions exactly: RSI uses simple (unsmoothed) gain/loss means, the
directional index inside ADX is unnormalized, Williams %R keeps the
0-at-top / 100-at-bottom sign convention, and the squeeze momentum is a
three-SMA ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ComputationError
from .ingest import PriceSeries


@dataclass(frozen=True)
class IndicatorParams:
    """Window sizes for all eleven indicators (defaults are the standard ones)."""

    sma_windows: tuple[int, ...] = (20, 55)
    ema_windows: tuple[int, ...] = (20, 55, 200)
    bb_n: int = 20
    bb_k: float = 2.0
    ichimoku_n: int = 9
    ichimoku_m: int = 26
    ichimoku_p: int = 52
    rsi_windows: tuple[int, ...] = (6, 12, 14, 24)
    macd_n: int = 12
    macd_m: int = 26
    macd_p: int = 9
    adx_n: int = 14
    willr_n: int = 14
    atr_n: int = 14
    kdj_k_window: int = 14
    kdj_d_smooth: int = 3
    sqz_n: int = 20
    sqz_m: int = 50
    sqz_p: int = 200
    sqz_q: float = 2.0

    def __post_init__(self):
        windows = (
            *self.sma_windows, *self.ema_windows, self.bb_n, self.ichimoku_n,
            self.ichimoku_m, self.ichimoku_p, *self.rsi_windows, self.macd_n,
            self.macd_m, self.macd_p, self.adx_n, self.willr_n, self.atr_n,
            self.kdj_k_window, self.kdj_d_smooth, self.sqz_n, self.sqz_m, self.sqz_p,
        )
        if any(w < 1 for w in windows):
            raise ValueError("all window sizes must be >= 1")
        if self.macd_m <= self.macd_n:
            raise ValueError("macd requires m > n")
        if not (self.sqz_p >= self.sqz_m >= self.sqz_n):
            raise ValueError("squeeze requires p >= m >= n")


@dataclass
class IndicatorColumn:
    """Named per-day values; NaN marks the warm-up prefix."""

    name: str
    values: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.values)


def _check_finite(series: PriceSeries) -> None:
    for arr in (series.open, series.high, series.low, series.close):
        if not np.all(np.isfinite(arr)):
            raise ComputationError("non-finite price input")


def _nan(n: int) -> np.ndarray:
    return np.full(n, np.nan)


def _rolling_mean(x: np.ndarray, n: int) -> np.ndarray:
    """Mean over the trailing window of n values; NaN for the first n-1 days."""
    out = _nan(len(x))
    if len(x) >= n:
        out[n - 1:] = sliding_window_view(x, n).mean(axis=1)
    return out


def _rolling_max(x: np.ndarray, n: int) -> np.ndarray:
    out = _nan(len(x))
    if len(x) >= n:
        out[n - 1:] = sliding_window_view(x, n).max(axis=1)
    return out


def _rolling_min(x: np.ndarray, n: int) -> np.ndarray:
    out = _nan(len(x))
    if len(x) >= n:
        out[n - 1:] = sliding_window_view(x, n).min(axis=1)
    return out


def sma(series: PriceSeries, n: int) -> IndicatorColumn:
    """Simple moving average of closes over the trailing n days."""
    _check_finite(series)
    return IndicatorColumn(f"SMA_{n}", _rolling_mean(series.close, n))


def _ema_values(x: np.ndarray, n: int) -> np.ndarray:
    """EMA recurrence seeded with the SMA of the first n values at index n-1.

    Works on arrays with a NaN warm-up prefix (the defined suffix is used).
    """
    out = _nan(len(x))
    defined = np.flatnonzero(~np.isnan(x))
    if len(defined) < n:
        return out
    start = defined[0]
    alpha = 2.0 / (n + 1)
    seed_at = start + n - 1
    ema = float(np.mean(x[start:seed_at + 1]))
    out[seed_at] = ema
    for t in range(seed_at + 1, len(x)):
        ema = ema + alpha * (x[t] - ema)
        out[t] = ema
    return out


def ema(series: PriceSeries, n: int) -> IndicatorColumn:
    """Exponential moving average of closes, SMA-seeded."""
    _check_finite(series)
    return IndicatorColumn(f"EMA_{n}", _ema_values(series.close, n))


def bollinger(series: PriceSeries, n: int = 20, k: float = 2.0) -> list[IndicatorColumn]:
    """Bollinger bands: lower/middle/upper plus band width and band percent.

    StdDev is the population standard deviation over the window.  A zero
    variance window gives BBB = 0 and an absent BBP.
    """
    _check_finite(series)
    close = series.close
    mid = _rolling_mean(close, n)
    std = _nan(len(close))
    if len(close) >= n:
        std[n - 1:] = sliding_window_view(close, n).std(axis=1)
    lower = mid - k * std
    upper = mid + k * std
    width = np.where(std > 0, (upper - lower) / mid, np.where(np.isnan(std), np.nan, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        pct = np.where(std > 0, (close - lower) / (upper - lower), np.nan)
    return [
        IndicatorColumn(f"BBL_{n}", lower),
        IndicatorColumn(f"BBM_{n}", mid),
        IndicatorColumn(f"BBU_{n}", upper),
        IndicatorColumn(f"BBB_{n}", width),
        IndicatorColumn(f"BBP_{n}", pct),
    ]


def ichimoku(series: PriceSeries, n: int = 9, m: int = 26, p: int = 52) -> list[IndicatorColumn]:
    """Ichimoku lines: ITS/IKS/ISB midpoints, ISA average, CS lagged close.

    ISA and ISB are displaced forward by floor(p/2) days; CS at day t is the
    close at day t+m (the printed backward plot), so its defined region ends
    m days before the series does.
    """
    _check_finite(series)
    T = len(series)
    high, low, close = series.high, series.low, series.close

    def midline(w: int) -> np.ndarray:
        return (_rolling_max(high, w) + _rolling_min(low, w)) / 2.0

    its = midline(n)
    iks = midline(m)
    isa_raw = (its + iks) / 2.0
    isb_raw = midline(p)
    shift = p // 2
    isa = _nan(T)
    isb = _nan(T)
    isa[shift:] = isa_raw[: T - shift]
    isb[shift:] = isb_raw[: T - shift]
    cs = _nan(T)
    cs[: T - m] = close[m:]
    return [
        IndicatorColumn("ITS", its),
        IndicatorColumn("IKS", iks),
        IndicatorColumn("ISA", isa),
        IndicatorColumn("ISB", isb),
        IndicatorColumn("CS", cs),
    ]


def rsi(series: PriceSeries, n: int) -> IndicatorColumn:
    """RSI with simple means of up/down moves over the last n changes.

    Zero average loss gives 100; zero gain and loss gives 50.
    """
    _check_finite(series)
    close = series.close
    out = _nan(len(close))
    delta = np.diff(close)
    if len(delta) >= n:
        gains = sliding_window_view(np.maximum(delta, 0.0), n).mean(axis=1)
        losses = sliding_window_view(np.maximum(-delta, 0.0), n).mean(axis=1)
        vals = np.empty(len(gains))
        both_zero = (gains == 0) & (losses == 0)
        no_loss = (losses == 0) & ~both_zero
        regular = ~both_zero & ~no_loss
        vals[both_zero] = 50.0
        vals[no_loss] = 100.0
        rs = gains[regular] / losses[regular]
        vals[regular] = 100.0 - 100.0 / (1.0 + rs)
        out[n:] = vals
    return IndicatorColumn(f"RSI_{n}", out)


def macd(series: PriceSeries, n: int = 12, m: int = 26, p: int = 9) -> list[IndicatorColumn]:
    """MACD line, histogram, and signal line built from the module's EMA."""
    _check_finite(series)
    fast = _ema_values(series.close, n)
    slow = _ema_values(series.close, m)
    line = fast - slow
    signal = _ema_values(line, p)
    hist = line - signal
    return [
        IndicatorColumn("MACD", np.where(np.isnan(slow), np.nan, line)),
        IndicatorColumn("MACDh", hist),
        IndicatorColumn("MACDs", signal),
    ]


def adx(series: PriceSeries, n: int = 14) -> IndicatorColumn:
    """Directional-index smoothing loop over unnormalized DI+/DI- moves.

    DX is 0 whenever |DI+ + DI-| is 0; the smoother is seeded with the mean
    of the first n DX values.
    """
    _check_finite(series)
    high, low = series.high, series.low
    T = len(high)
    out = _nan(T)
    di_plus = high[1:] - high[:-1]
    di_minus = low[:-1] - low[1:]
    denom = np.abs(di_plus + di_minus)
    with np.errstate(invalid="ignore", divide="ignore"):
        dx = np.where(denom > 0, np.abs(di_plus - di_minus) / denom, 0.0)
    if len(dx) < n:
        return IndicatorColumn(f"ADX_{n}", out)
    adx_val = float(np.mean(dx[:n]))
    out[n] = adx_val
    for t in range(n + 1, T):
        adx_val = (adx_val * (n - 1) + dx[t - 1]) / n
        out[t] = adx_val
    return IndicatorColumn(f"ADX_{n}", out)


def williams_r(series: PriceSeries, n: int = 14) -> IndicatorColumn:
    """Williams %R exactly as printed: 0 at the window top, 100 at the bottom."""
    _check_finite(series)
    hi = _rolling_max(series.high, n)
    lo = _rolling_min(series.low, n)
    with np.errstate(invalid="ignore", divide="ignore"):
        vals = np.where(hi > lo, (hi - series.close) / (hi - lo) * 100.0, np.nan)
    return IndicatorColumn(f"WILLR_{n}", vals)


def true_range(series: PriceSeries) -> np.ndarray:
    """Per-day true range; the first day falls back to High - Low."""
    high, low, close = series.high, series.low, series.close
    tr = high - low
    if len(high) > 1:
        prev_close = close[:-1]
        tr = np.concatenate([
            tr[:1],
            np.maximum.reduce([
                high[1:] - low[1:],
                np.abs(high[1:] - prev_close),
                np.abs(low[1:] - prev_close),
            ]),
        ])
    return tr


def atr(series: PriceSeries, n: int = 14) -> IndicatorColumn:
    """Mean of the true range over the trailing n days."""
    _check_finite(series)
    return IndicatorColumn(f"ATR_{n}", _rolling_mean(true_range(series), n))


def kdj(series: PriceSeries, k_window: int = 14, d_smooth: int = 3) -> list[IndicatorColumn]:
    """Stochastic oscillator: %K over k_window, %D its SMA, J = 3K - 2D."""
    _check_finite(series)
    hi = _rolling_max(series.high, k_window)
    lo = _rolling_min(series.low, k_window)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(hi > lo, (series.close - lo) / (hi - lo) * 100.0, np.nan)
    d = _nan(len(k))
    defined = np.flatnonzero(~np.isnan(k))
    if len(defined) >= d_smooth:
        start = defined[0]
        d[start + d_smooth - 1:] = sliding_window_view(k[start:], d_smooth).mean(axis=1)
    j = 3.0 * k - 2.0 * d
    return [
        IndicatorColumn("K", k),
        IndicatorColumn("D", d),
        IndicatorColumn("J", j),
    ]


def squeeze(series: PriceSeries, n: int = 20, m: int = 50, p: int = 200, q: float = 2.0) -> IndicatorColumn:
    """Squeeze momentum: (SMA_n - SMA_m) / (SMA_p * q)."""
    _check_finite(series)
    close = series.close
    vals = (_rolling_mean(close, n) - _rolling_mean(close, m)) / (_rolling_mean(close, p) * q)
    return IndicatorColumn("SQZ", vals)


def compute_all(series: PriceSeries, params: IndicatorParams | None = None) -> list[IndicatorColumn]:
    """All indicator columns for the default (or given) parameter set."""
    p = params or IndicatorParams()
    cols: list[IndicatorColumn] = []
    for n in p.sma_windows:
        cols.append(sma(series, n))
    for n in p.ema_windows:
        cols.append(ema(series, n))
    cols.extend(bollinger(series, p.bb_n, p.bb_k))
    cols.extend(ichimoku(series, p.ichimoku_n, p.ichimoku_m, p.ichimoku_p))
    for n in p.rsi_windows:
        cols.append(rsi(series, n))
    cols.extend(macd(series, p.macd_n, p.macd_m, p.macd_p))
    cols.append(adx(series, p.adx_n))
    cols.append(williams_r(series, p.willr_n))
    cols.append(atr(series, p.atr_n))
    cols.extend(kdj(series, p.kdj_k_window, p.kdj_d_smooth))
    cols.append(squeeze(series, p.sqz_n, p.sqz_m, p.sqz_p, p.sqz_q))
    return cols
