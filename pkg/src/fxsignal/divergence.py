"""Convergence/divergence states between price and the squeeze momentum.

Over a rolling 40-day window, the two most recent local peaks (and troughs)
of the price and of the indicator define four trend lines; the sign of the
slope product per side is the state: +1 aligned trends (convergence), -1
opposing trends (divergence), 0 when either side lacks two extrema, shares
an index, or has a flat line.
"""

from __future__ import annotations

import numpy as np

from .errors import PreconditionError

WINDOW = 40


def find_local_extrema(values: np.ndarray, kind: str) -> list[tuple[int, float]]:
    """Two most recent strict local peaks or troughs, most-recent last.

    A peak is strictly greater than both neighbors (troughs strictly less);
    plateau points are not extrema.  Returns fewer than two pairs when the
    window lacks them.
    """
    if kind not in ("peak", "trough"):
        raise PreconditionError(f"unknown extremum kind {kind!r}")
    v = np.asarray(values, dtype=np.float64)
    found: list[tuple[int, float]] = []
    for i in range(len(v) - 2, 0, -1):
        if kind == "peak":
            hit = v[i] > v[i - 1] and v[i] > v[i + 1]
        else:
            hit = v[i] < v[i - 1] and v[i] < v[i + 1]
        if hit:
            found.append((i, float(v[i])))
            if len(found) == 2:
                break
    found.reverse()
    return found


def _slope(p0: tuple[int, float], p1: tuple[int, float]) -> float | None:
    if p1[0] == p0[0]:
        return None
    return (p1[1] - p0[1]) / (p1[0] - p0[0])


def _side_state(price_window: np.ndarray, ind_window: np.ndarray, kind: str, mode: str) -> int:
    price_ext = find_local_extrema(price_window, kind)
    if len(price_ext) < 2:
        return 0
    if mode == "price_anchored":
        ind_ext = [(i, float(ind_window[i])) for i, _ in price_ext]
    else:
        ind_ext = find_local_extrema(ind_window, kind)
        if len(ind_ext) < 2:
            return 0
    m_price = _slope(*price_ext)
    m_ind = _slope(*ind_ext)
    if m_price is None or m_ind is None:
        return 0
    product = m_price * m_ind
    if product > 0:
        return 1
    if product < 0:
        return -1
    return 0


def divergence_state(
    price_window: np.ndarray,
    indicator_window: np.ndarray,
    mode: str = "independent",
) -> tuple[int, int]:
    """(s_high, s_low) for one aligned 40-day window pair."""
    price_window = np.asarray(price_window, dtype=np.float64)
    indicator_window = np.asarray(indicator_window, dtype=np.float64)
    if price_window.shape != indicator_window.shape:
        raise PreconditionError("price and indicator windows must be aligned")
    if mode not in ("independent", "price_anchored"):
        raise PreconditionError(f"unknown divergence mode {mode!r}")
    s_high = _side_state(price_window, indicator_window, "peak", mode)
    s_low = _side_state(price_window, indicator_window, "trough", mode)
    return s_high, s_low


def divergence_columns(
    close: np.ndarray,
    indicator: np.ndarray,
    mode: str = "independent",
    window: int = WINDOW,
) -> dict[str, np.ndarray]:
    """Per-day S_high / S_low feature columns (NaN until both windows are defined)."""
    n = len(close)
    if len(indicator) != n:
        raise PreconditionError("close and indicator columns must be aligned")
    s_high = np.full(n, np.nan)
    s_low = np.full(n, np.nan)
    for t in range(window - 1, n):
        pw = close[t - window + 1: t + 1]
        iw = indicator[t - window + 1: t + 1]
        if np.any(np.isnan(pw)) or np.any(np.isnan(iw)):
            continue
        hi, lo = divergence_state(pw, iw, mode)
        s_high[t] = hi
        s_low[t] = lo
    return {"S_high": s_high, "S_low": s_low}
