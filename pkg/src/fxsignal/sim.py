"""Trading simulations: signal normalization, the two position regimes, and
cost-adjusted P&L accounting.

Raw model probabilities are min-max normalized over the evaluation window
into weighted probabilities.  Days at or above the long threshold (default
0.7) open longs, days at or below the short threshold (default 0.35) open
shorts.  Fixed-horizon: every entry closes exactly `horizon` trading days
later, overlapping positions allowed.  Dynamic: at most one open position
per direction, held while its threshold condition persists.  Returns are
simple and unleveraged; costs default to zero (frictionless reference mode).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from datetime import date

import numpy as np

from .errors import DegenerateSignalError, PreconditionError

LEDGER_COLUMNS = [
    "model", "direction", "entry_date", "exit_date",
    "entry_price", "exit_price", "gross_return", "net_return",
]


@dataclass(frozen=True)
class StrategyConfig:
    long_threshold: float = 0.7
    short_threshold: float = 0.35
    horizon: int = 10
    spread_pips: float = 0.0
    pip_size: float = 0.0001
    commission_per_trade: float = 0.0
    swap_per_day: float = 0.0
    slippage: float = 0.0
    regime: str = "fixed_horizon"

    def __post_init__(self):
        if not 0.0 <= self.short_threshold < self.long_threshold <= 1.0:
            raise ValueError("need 0 <= short_threshold < long_threshold <= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")


@dataclass
class SignalSeries:
    dates: list[date]
    raw: np.ndarray = field(repr=False)
    weighted: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.raw)


@dataclass(frozen=True)
class Trade:
    direction: str  # "long" | "short"
    entry_date: date
    exit_date: date
    entry_price: float
    exit_price: float
    gross_return: float
    net_return: float


@dataclass
class DirectionSummary:
    winners: int = 0
    losers: int = 0
    total_return: float = 0.0

    @property
    def win_rate(self) -> float | None:
        n = self.winners + self.losers
        return None if n == 0 else 100.0 * self.winners / n


@dataclass
class SimulationReport:
    long: DirectionSummary = field(default_factory=DirectionSummary)
    short: DirectionSummary = field(default_factory=DirectionSummary)


def normalize_signals(dates: list[date], raw: np.ndarray) -> SignalSeries:
    """Min-max normalize raw probabilities over the whole evaluation window."""
    raw = np.asarray(raw, dtype=np.float64)
    if len(raw) < 2:
        raise PreconditionError("need at least 2 raw probabilities")
    if len(dates) != len(raw):
        raise PreconditionError("dates and probabilities must be aligned")
    lo, hi = float(raw.min()), float(raw.max())
    if hi == lo:
        raise DegenerateSignalError("all raw probabilities equal; no trading possible")
    return SignalSeries(dates=list(dates), raw=raw, weighted=(raw - lo) / (hi - lo))


def make_trade(direction: str, entry_date: date, exit_date: date,
               entry_price: float, exit_price: float, cfg: StrategyConfig) -> Trade:
    if direction == "long":
        gross = (exit_price - entry_price) / entry_price
    elif direction == "short":
        gross = (entry_price - exit_price) / entry_price
    else:
        raise ValueError(f"unknown direction {direction!r}")
    trade = Trade(direction, entry_date, exit_date, entry_price, exit_price, gross, gross)
    return apply_costs(trade, cfg)


def apply_costs(trade: Trade, cfg: StrategyConfig) -> Trade:
    """Deduct spread, commission, swap, and slippage from the gross return."""
    holding_days = (trade.exit_date - trade.entry_date).days
    cost = (
        cfg.spread_pips * cfg.pip_size / trade.entry_price
        + cfg.commission_per_trade
        + cfg.swap_per_day * holding_days
        + cfg.slippage
    )
    return replace(trade, net_return=trade.gross_return - cost)


def _check_alignment(signals: SignalSeries, prices) -> None:
    if len(signals) != len(prices.dates) or signals.dates != list(prices.dates):
        raise PreconditionError("signals must be date-aligned with prices")


def fixed_horizon_sim(signals: SignalSeries, prices, cfg: StrategyConfig) -> tuple[list[Trade], SimulationReport]:
    """Open on every threshold day; close at the close `horizon` days later.

    `prices` is a PriceSeries covering exactly the signal dates.  Entries in
    the final horizon days that cannot complete are skipped.
    """
    _check_alignment(signals, prices)
    n = len(signals)
    trades: list[Trade] = []
    for t in range(n):
        w = signals.weighted[t]
        if w >= cfg.long_threshold:
            direction = "long"
        elif w <= cfg.short_threshold:
            direction = "short"
        else:
            continue
        exit_t = t + cfg.horizon
        if exit_t >= n:
            continue
        trades.append(make_trade(
            direction, signals.dates[t], signals.dates[exit_t],
            float(prices.close[t]), float(prices.close[exit_t]), cfg,
        ))
    return trades, summarize(trades)


def dynamic_sim(signals: SignalSeries, prices, cfg: StrategyConfig) -> tuple[list[Trade], SimulationReport]:
    """Hold at most one position per direction while its condition persists.

    A long opens on the first day weighted >= long_threshold with no open
    long, and closes at the close of the first day the condition fails (or
    the final day).  Shorts mirror against the short threshold.
    """
    _check_alignment(signals, prices)
    n = len(signals)
    trades: list[Trade] = []
    open_at = {"long": None, "short": None}

    def active(direction: str, w: float) -> bool:
        return w >= cfg.long_threshold if direction == "long" else w <= cfg.short_threshold

    for t in range(n):
        w = signals.weighted[t]
        for direction in ("long", "short"):
            entry = open_at[direction]
            if entry is not None and not active(direction, w):
                trades.append(make_trade(
                    direction, signals.dates[entry], signals.dates[t],
                    float(prices.close[entry]), float(prices.close[t]), cfg,
                ))
                open_at[direction] = None
            elif entry is None and active(direction, w):
                open_at[direction] = t
    last = n - 1
    for direction in ("long", "short"):
        entry = open_at[direction]
        if entry is not None and entry < last:
            trades.append(make_trade(
                direction, signals.dates[entry], signals.dates[last],
                float(prices.close[entry]), float(prices.close[last]), cfg,
            ))
    trades.sort(key=lambda tr: (tr.entry_date, tr.direction))
    return trades, summarize(trades)


def summarize(trades: list[Trade]) -> SimulationReport:
    """Winner/loser counts, total return, and win rate per direction.

    A zero-return trade counts as losing.
    """
    report = SimulationReport()
    for tr in trades:
        side = report.long if tr.direction == "long" else report.short
        if tr.net_return > 0:
            side.winners += 1
        else:
            side.losers += 1
        side.total_return += tr.net_return
    return report


def save_ledger(path: str, entries: list[tuple[int, Trade]]) -> None:
    """Trade ledger CSV; floats use repr so reruns are byte-identical."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEDGER_COLUMNS)
        for model_id, tr in entries:
            writer.writerow([
                model_id, tr.direction, tr.entry_date.isoformat(), tr.exit_date.isoformat(),
                repr(tr.entry_price), repr(tr.exit_price),
                repr(tr.gross_return), repr(tr.net_return),
            ])


def load_ledger(path: str) -> list[tuple[int, Trade]]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append((int(row["model"]), Trade(
                direction=row["direction"],
                entry_date=date.fromisoformat(row["entry_date"]),
                exit_date=date.fromisoformat(row["exit_date"]),
                entry_price=float(row["entry_price"]),
                exit_price=float(row["exit_price"]),
                gross_return=float(row["gross_return"]),
                net_return=float(row["net_return"]),
            )))
    return out


def render_report(model_id: int, report: SimulationReport) -> str:
    """Summary table in the winning/losing/total-return/win-rate layout."""
    lines = ["Model  Position  Winning  Losing  TotalReturn  WinRate(%)"]
    for name, side in (("Long", report.long), ("Short", report.short)):
        rate = "—" if side.win_rate is None else f"{side.win_rate:.2f}"
        lines.append(
            f"{model_id:<6} {name:<9} {side.winners:<8} {side.losers:<7} "
            f"{100.0 * side.total_return:>10.2f}%  {rate}"
        )
    return "\n".join(lines) + "\n"
