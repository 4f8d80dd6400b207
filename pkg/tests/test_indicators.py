"""Every indicator column against an independently written naive oracle.

The oracles below are deliberate plain-loop implementations of the same
formula conventions the package documents (simple-mean RSI, SMA-seeded EMA,
unnormalized ADX directional moves, population-std Bollinger bands, %R with
0 at the window top).  [DERIVED] values throughout.
"""

import math

import numpy as np
import pytest

from conftest import make_series, random_walk_series
from fxsignal import indicators as ind
from fxsignal.errors import ComputationError

NAN = float("nan")


def assert_close(actual, expected, tol=1e-10):
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    assert actual.shape == expected.shape
    both_nan = np.isnan(actual) & np.isnan(expected)
    assert np.array_equal(np.isnan(actual), np.isnan(expected)), "NaN masks differ"
    diff = np.abs(actual - expected)[~both_nan]
    assert diff.size == 0 or diff.max() < tol


# --- naive oracles -----------------------------------------------------------


def oracle_sma(x, n):
    return [NAN if t < n - 1 else sum(x[t - n + 1: t + 1]) / n for t in range(len(x))]


def oracle_ema(x, n):
    """SMA-seeded EMA; tolerates a NaN warm-up prefix."""
    out = [NAN] * len(x)
    start = next((i for i, v in enumerate(x) if not math.isnan(v)), None)
    if start is None or len(x) - start < n:
        return out
    seed_at = start + n - 1
    val = sum(x[start: seed_at + 1]) / n
    out[seed_at] = val
    k = 2.0 / (n + 1)
    for t in range(seed_at + 1, len(x)):
        val = val + k * (x[t] - val)
        out[t] = val
    return out


def oracle_bollinger(close, n, k):
    lower, mid, upper, width, pct = ([NAN] * len(close) for _ in range(5))
    for t in range(n - 1, len(close)):
        w = close[t - n + 1: t + 1]
        m = sum(w) / n
        sd = math.sqrt(sum((v - m) ** 2 for v in w) / n)
        mid[t] = m
        lower[t] = m - k * sd
        upper[t] = m + k * sd
        width[t] = (upper[t] - lower[t]) / m if sd > 0 else 0.0
        pct[t] = (close[t] - lower[t]) / (upper[t] - lower[t]) if sd > 0 else NAN
    return lower, mid, upper, width, pct


def oracle_ichimoku(high, low, close, n, m, p):
    T = len(close)

    def mid(w, t):
        if t < w - 1:
            return NAN
        return (max(high[t - w + 1: t + 1]) + min(low[t - w + 1: t + 1])) / 2.0

    its = [mid(n, t) for t in range(T)]
    iks = [mid(m, t) for t in range(T)]
    isa_raw = [(a + b) / 2.0 for a, b in zip(its, iks)]
    isb_raw = [mid(p, t) for t in range(T)]
    shift = p // 2
    isa = [NAN] * T
    isb = [NAN] * T
    for t in range(shift, T):
        isa[t] = isa_raw[t - shift]
        isb[t] = isb_raw[t - shift]
    cs = [close[t + m] if t + m < T else NAN for t in range(T)]
    return its, iks, isa, isb, cs


def oracle_rsi(close, n):
    out = [NAN] * len(close)
    for t in range(n, len(close)):
        deltas = [close[i] - close[i - 1] for i in range(t - n + 1, t + 1)]
        gain = sum(d for d in deltas if d > 0) / n
        loss = sum(-d for d in deltas if d < 0) / n
        if gain == 0 and loss == 0:
            out[t] = 50.0
        elif loss == 0:
            out[t] = 100.0
        else:
            out[t] = 100.0 - 100.0 / (1.0 + gain / loss)
    return out


def oracle_macd(close, n, m, p):
    fast = oracle_ema(close, n)
    slow = oracle_ema(close, m)
    line = [NAN if math.isnan(s) else f - s for f, s in zip(fast, slow)]
    signal = oracle_ema(line, p)
    hist = [NAN if math.isnan(s) else l - s for l, s in zip(line, signal)]
    return line, hist, signal


def oracle_adx(high, low, n):
    T = len(high)
    out = [NAN] * T
    dx = []
    for t in range(1, T):
        up = high[t] - high[t - 1]
        down = low[t - 1] - low[t]
        denom = abs(up + down)
        dx.append(abs(up - down) / denom if denom > 0 else 0.0)
    if len(dx) < n:
        return out
    val = sum(dx[:n]) / n
    out[n] = val
    for t in range(n + 1, T):
        val = (val * (n - 1) + dx[t - 1]) / n
        out[t] = val
    return out


def oracle_willr(high, low, close, n):
    out = [NAN] * len(close)
    for t in range(n - 1, len(close)):
        hh = max(high[t - n + 1: t + 1])
        ll = min(low[t - n + 1: t + 1])
        out[t] = (hh - close[t]) / (hh - ll) * 100.0 if hh > ll else NAN
    return out


def oracle_atr(high, low, close, n):
    T = len(close)
    tr = [high[0] - low[0]]
    for t in range(1, T):
        tr.append(max(high[t] - low[t], abs(high[t] - close[t - 1]), abs(low[t] - close[t - 1])))
    return oracle_sma(tr, n)


def oracle_kdj(high, low, close, kw, dn):
    T = len(close)
    k = [NAN] * T
    for t in range(kw - 1, T):
        hh = max(high[t - kw + 1: t + 1])
        ll = min(low[t - kw + 1: t + 1])
        k[t] = (close[t] - ll) / (hh - ll) * 100.0 if hh > ll else NAN
    d = [NAN] * T
    for t in range(kw - 1 + dn - 1, T):
        window = k[t - dn + 1: t + 1]
        d[t] = sum(window) / dn
    j = [3 * kv - 2 * dv if not (math.isnan(kv) or math.isnan(dv)) else NAN
         for kv, dv in zip(k, d)]
    return k, d, j


def oracle_squeeze(close, n, m, p, q):
    a = oracle_sma(close, n)
    b = oracle_sma(close, m)
    c = oracle_sma(close, p)
    return [(x - y) / (z * q) if not math.isnan(z) else NAN for x, y, z in zip(a, b, c)]


# --- tests --------------------------------------------------------------------


@pytest.fixture(scope="module")
def walk():
    return random_walk_series(11, 400)


def arrays(series):
    return (list(series.high), list(series.low), list(series.close))


@pytest.mark.parametrize("n", [5, 20, 55])
def test_sma(walk, n):
    assert_close(ind.sma(walk, n).values, oracle_sma(list(walk.close), n))


@pytest.mark.parametrize("n", [10, 20, 200])
def test_ema(walk, n):
    assert_close(ind.ema(walk, n).values, oracle_ema(list(walk.close), n))


def test_bollinger(walk):
    cols = ind.bollinger(walk, 20, 2.0)
    expected = oracle_bollinger(list(walk.close), 20, 2.0)
    for col, exp in zip(cols, expected):
        assert_close(col.values, exp)


def test_bollinger_flat_window():
    s = make_series([1.5] * 30)
    cols = {c.name: c.values for c in ind.bollinger(s, 20, 2.0)}
    assert cols["BBB_20"][25] == 0.0
    assert math.isnan(cols["BBP_20"][25])


def test_ichimoku(walk):
    cols = ind.ichimoku(walk, 9, 26, 52)
    high, low, close = arrays(walk)
    expected = oracle_ichimoku(high, low, close, 9, 26, 52)
    for col, exp in zip(cols, expected):
        assert_close(col.values, exp)


@pytest.mark.parametrize("n", [6, 12, 14, 24])
def test_rsi(walk, n):
    assert_close(ind.rsi(walk, n).values, oracle_rsi(list(walk.close), n))


def test_rsi_guards():
    up = make_series(np.linspace(1.0, 2.0, 30))
    assert np.nanmax(ind.rsi(up, 6).values) == 100.0
    flat = make_series([1.4] * 30)
    vals = ind.rsi(flat, 6).values
    assert np.all(vals[6:] == 50.0)


def test_macd(walk):
    cols = ind.macd(walk, 12, 26, 9)
    expected = oracle_macd(list(walk.close), 12, 26, 9)
    for col, exp in zip(cols, expected):
        assert_close(col.values, exp)


def test_adx(walk):
    high, low, _ = arrays(walk)
    assert_close(ind.adx(walk, 14).values, oracle_adx(high, low, 14))


def test_williams_r(walk):
    assert_close(ind.williams_r(walk, 14).values, oracle_willr(*arrays(walk), 14))


def test_williams_sign_convention():
    # close at the top of the window -> 0; at the bottom -> 100
    closes = [1.0] * 13 + [2.0]
    s = make_series(closes, highs=[2.0] * 14, lows=[1.0] * 14, opens=[1.5] * 14)
    assert ind.williams_r(s, 14).values[13] == 0.0
    s2 = make_series([2.0] * 13 + [1.0], highs=[2.0] * 14, lows=[1.0] * 14, opens=[1.5] * 14)
    assert ind.williams_r(s2, 14).values[13] == 100.0


def test_atr(walk):
    assert_close(ind.atr(walk, 14).values, oracle_atr(*arrays(walk), 14))


def test_kdj(walk):
    cols = ind.kdj(walk, 14, 3)
    expected = oracle_kdj(*arrays(walk), 14, 3)
    for col, exp in zip(cols, expected):
        assert_close(col.values, exp)


def test_squeeze(walk):
    assert_close(ind.squeeze(walk, 20, 50, 200, 2.0).values,
                 oracle_squeeze(list(walk.close), 20, 50, 200, 2.0))


def test_compute_all_names_and_lengths(walk):
    cols = ind.compute_all(walk)
    names = [c.name for c in cols]
    assert len(names) == len(set(names))
    assert all(len(c) == len(walk) for c in cols)
    for expected in ("SMA_20", "EMA_200", "BBP_20", "ITS", "CS", "RSI_14",
                     "MACDh", "ADX_14", "WILLR_14", "ATR_14", "J", "SQZ"):
        assert expected in names


def test_params_validation():
    with pytest.raises(ValueError):
        ind.IndicatorParams(macd_n=26, macd_m=12)
    with pytest.raises(ValueError):
        ind.IndicatorParams(sma_windows=(0,))


def test_nonfinite_input_rejected(walk):
    bad = make_series([1.0, 1.1, 1.2])
    bad.close[1] = np.nan
    with pytest.raises(ComputationError):
        ind.sma(bad, 2)
