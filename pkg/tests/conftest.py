"""Shared helpers for building small price series in tests."""

from datetime import date, timedelta

import numpy as np
import pytest

from fxsignal.ingest import Candle, PriceSeries, generate_synthetic


def make_series(closes, highs=None, lows=None, opens=None, start=date(2015, 1, 1)):
    """PriceSeries from a close array, with consistent synthetic OHL values."""
    closes = np.asarray(closes, dtype=np.float64)
    n = len(closes)
    if opens is None:
        opens = np.concatenate([closes[:1], closes[:-1]])
    if highs is None:
        highs = np.maximum(opens, closes) * 1.001
    if lows is None:
        lows = np.minimum(opens, closes) * 0.999
    return PriceSeries([
        Candle(start + timedelta(days=i), float(opens[i]), float(highs[i]),
               float(lows[i]), float(closes[i]))
        for i in range(n)
    ])


def random_walk_series(seed, days):
    """Seeded synthetic OHLC series (the package's own generator)."""
    return generate_synthetic(seed, days)


@pytest.fixture
def walk300():
    return random_walk_series(7, 300)
