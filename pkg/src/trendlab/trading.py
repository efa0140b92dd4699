"""Anti-cyclic correction trades: closed-form expectation, Monte Carlo, backtest.

The trade enters against the trend once a correction retraces an ``entry``
fraction of the preceding movement and exits either at a deeper ``target``
retracement or, if the correction ends first, at the close of the bar where
its end is detected, so the detection delay acts as unavoidable slippage.
Returns are expressed in units of the preceding movement:

    R(x, d) = x - entry - d   if entry <= x < target
    R(x, d) = target - entry  if x >= target

Target fills are delay-free (a resting order at a known price); only the
detected correction end realizes the delay.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import trend as trend_mod
from .indicators import ScalingConfig, macd_sar
from .market_data import CandleSeries
from .minmax import HIGH, run_minmax
from .stats import (
    BivariateLogNormalParams,
    _MIN_SURVIVAL,
    conditional_cross_mean,
    lognormal_sf,
    truncated_lognormal_mean,
)


@dataclass(frozen=True)
class TradeSpec:
    """Entry and target retracement levels, in units of the last movement."""

    entry: float
    target: float

    def __post_init__(self):
        if not (0.0 < self.entry < self.target):
            raise ValueError("need 0 < entry < target")


@dataclass(frozen=True)
class TradeOutcome:
    ret: float
    reached_target: bool
    x: float
    d: float
    direction: str = trend_mod.UP
    entry_bar: Optional[int] = None
    exit_bar: Optional[int] = None


def trade_return(x: float, d: float, spec: TradeSpec) -> Optional[TradeOutcome]:
    """Outcome of one trade, or None when the retracement never reaches entry."""
    if d < 0.0:
        raise ValueError("delay must be non-negative")
    if x < spec.entry:
        return None
    if x >= spec.target:
        return TradeOutcome(ret=spec.target - spec.entry, reached_target=True, x=x, d=d)
    return TradeOutcome(ret=x - spec.entry - d, reached_target=False, x=x, d=d)


def expected_return(params: BivariateLogNormalParams, spec: TradeSpec) -> float:
    """E(R | X >= entry) under the joint log-normal model:

        E(X|X>=a) - (a + E(D|X>=a))
          + [P(X>=t)/P(X>=a)] * [t + E(D|X>=t) - E(X|X>=t)]

    with a = entry, t = target. The bracket drops out when P(X >= t)
    underflows, which also covers the t -> infinity reduction.
    """
    a, t = spec.entry, spec.target
    sf_a = lognormal_sf(a, params.x)
    if sf_a < _MIN_SURVIVAL:
        raise ValueError(f"tail too deep: P(X >= {a}) underflows")
    value = truncated_lognormal_mean(params.x, a) - (a + conditional_cross_mean(params, a))
    sf_t = lognormal_sf(t, params.x)
    if sf_t >= _MIN_SURVIVAL:
        weight = sf_t / sf_a
        value += weight * (t + conditional_cross_mean(params, t) - truncated_lognormal_mean(params.x, t))
    return value


def simulate_expected_return(
    params: BivariateLogNormalParams,
    spec: TradeSpec,
    n: int = 1_000_000,
    seed: int = 0,
) -> tuple[float, float]:
    """Monte Carlo (mean, stderr) of R over draws with X >= entry.

    Draws correlated normals, exponentiates, filters on the entry condition,
    and applies the same return rule as trade_return. Deterministic per seed.
    """
    if n < 10_000:
        raise ValueError("need at least 10^4 draws")
    rng = np.random.default_rng(seed)
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    x = np.exp(params.mu_x + params.sigma_x * z1)
    d = np.exp(params.mu_d + params.sigma_d * (params.rho * z1 + math.sqrt(1.0 - params.rho**2) * z2))
    opened = x >= spec.entry
    m = int(opened.sum())
    if m < 100:
        raise ValueError(f"only {m} of {n} draws reach the entry level {spec.entry}")
    ret = np.where(x >= spec.target, spec.target - spec.entry, x - spec.entry - d)[opened]
    return float(ret.mean()), float(ret.std(ddof=1) / math.sqrt(m))


@dataclass(frozen=True)
class BacktestResult(Sequence):
    """Trade outcomes plus tallies for skipped legs and series-end truncation."""

    trades: tuple[TradeOutcome, ...]
    degenerate: int = 0
    truncated: int = 0

    def __len__(self) -> int:
        return len(self.trades)

    def __getitem__(self, item):
        return self.trades[item]


def backtest_anticyclic(
    series: CandleSeries,
    scaling: float,
    spec: TradeSpec,
    include_down: bool = False,
) -> BacktestResult:
    """Replay the anti-cyclic rule over every detected trend correction.

    Entry fills at the exact level price (limit order, no slippage) on the
    first bar whose range reaches it; on that same bar the target may fill too
    (entry first, then target). Down-trend corrections are mirrored and only
    evaluated when ``include_down`` is set. A correction still open at the end
    of the series is tallied as truncated when its entry level was already hit.
    """
    sar = macd_sar(series, ScalingConfig(scaling))
    mm = run_minmax(series, sar)
    phases = trend_mod.detect_trends(mm)
    pts = mm.points
    lows = series.low
    highs = series.high

    trades: list[TradeOutcome] = []
    degenerate = 0
    truncated = 0
    for ph in phases:
        if ph.direction == trend_mod.DOWN and not include_down:
            continue
        up = ph.direction == trend_mod.UP
        last_leg_end = ph.violation_point_index if ph.violation_point_index is not None else ph.end_point_index
        for j in range(ph.start_point_index, last_leg_end):
            a, b = pts[j], pts[j + 1]
            is_correction = (a.kind == HIGH) == up
            if not is_correction or j - 1 < 0:
                continue
            o = pts[j - 1]
            movement = a.price - o.price if up else o.price - a.price
            corr = a.price - b.price if up else b.price - a.price
            if movement <= 0.0 or corr <= 0.0:
                degenerate += 1
                continue
            x = corr / movement
            if up:
                entry_price = a.price - spec.entry * movement
                target_price = a.price - spec.target * movement
            else:
                entry_price = a.price + spec.entry * movement
                target_price = a.price + spec.target * movement
            entry_bar = _first_touch(lows if up else highs, a.bar + 1, b.bar, entry_price, up)
            if entry_bar is None:
                continue
            target_bar = _first_touch(lows if up else highs, entry_bar, b.bar, target_price, up)
            d = b.d_abs / movement
            if target_bar is not None:
                trades.append(
                    TradeOutcome(spec.target - spec.entry, True, x, d, ph.direction, entry_bar, target_bar)
                )
            else:
                exit_close = b.detection_close
                ret = (entry_price - exit_close) / movement if up else (exit_close - entry_price) / movement
                trades.append(TradeOutcome(ret, False, x, d, ph.direction, entry_bar, b.detection_bar))

    # an entry hit inside the still-open final correction has no resolvable exit
    if mm.open_candidate is not None and phases:
        ph = phases[-1]
        if ph.violation_point_index is None and ph.end_point_index == len(pts) - 1:
            include = ph.direction == trend_mod.UP or include_down
            up = ph.direction == trend_mod.UP
            a = pts[ph.end_point_index]
            is_correction = (a.kind == HIGH) == up
            if include and is_correction and ph.end_point_index >= 1:
                o = pts[ph.end_point_index - 1]
                movement = a.price - o.price if up else o.price - a.price
                if movement > 0.0:
                    entry_price = a.price - spec.entry * movement if up else a.price + spec.entry * movement
                    hit = _first_touch(lows if up else highs, a.bar + 1, len(series) - 1, entry_price, up)
                    if hit is not None:
                        truncated += 1
    return BacktestResult(tuple(trades), degenerate=degenerate, truncated=truncated)


def _first_touch(prices, start: int, stop: int, level: float, downward: bool) -> Optional[int]:
    """First bar in [start, stop] whose extreme reaches the level, else None."""
    for i in range(start, stop + 1):
        p = prices[i]
        if (p <= level) if downward else (p >= level):
            return int(i)
    return None
