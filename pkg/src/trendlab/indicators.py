"""EMA, MACD, and the two-valued MACD SAR process.

A single positive scaling parameter s stretches the classic (12/26/9) MACD
periods to (12s/26s/9s); non-integer periods are handled directly through the
EMA smoothing factor alpha = 2/(period+1), no resampling. The SAR value is +1
while the MACD line is above its signal line, -1 while below, and carries the
previous value on exact ties (first defined value defaults to -1 on a tie).
All functions are pure; identical inputs give bit-identical outputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .market_data import CandleSeries

FAST_RATIO = 12.0
SLOW_RATIO = 26.0
SIGNAL_RATIO = 9.0

SAR_UP = 1
SAR_DOWN = -1
SAR_UNDEFINED = 0


@dataclass(frozen=True)
class ScalingConfig:
    """MACD period scaling; fast/slow/signal = (12, 26, 9) * scaling."""

    scaling: float = 1.0

    def __post_init__(self):
        if not (self.scaling > 0.0 and math.isfinite(self.scaling)):
            raise ValueError("scaling must be a positive finite number")

    @property
    def fast(self) -> float:
        return FAST_RATIO * self.scaling

    @property
    def slow(self) -> float:
        return SLOW_RATIO * self.scaling

    @property
    def signal(self) -> float:
        return SIGNAL_RATIO * self.scaling

    @property
    def warmup(self) -> int:
        """Bars to mask while the slow EMA transient decays: ceil(26 * s)."""
        return int(math.ceil(self.slow))


@dataclass(frozen=True)
class SarSeries:
    """Stop-and-reverse values aligned with a candle series.

    values[i] is +1 (up move), -1 (down move), or 0 during the initial
    warm-up prefix where the indicator is undefined.
    """

    values: np.ndarray
    warmup: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int8)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.warmup < 0:
            raise ValueError("warmup must be non-negative")
        if np.any(v[: self.warmup] != SAR_UNDEFINED):
            raise ValueError("warm-up prefix must be undefined")
        defined = v[self.warmup:]
        if defined.size and np.any((defined != SAR_UP) & (defined != SAR_DOWN)):
            raise ValueError("SAR values past warm-up must be +1 or -1")

    def __len__(self) -> int:
        return len(self.values)


def ema(values, period: float) -> np.ndarray:
    """Exponential moving average, seeded with the first value.

    e[0] = v[0]; e[t] = alpha*v[t] + (1-alpha)*e[t-1], alpha = 2/(period+1).
    """
    if period < 1.0:
        raise ValueError("period must be >= 1")
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("ema of empty input")
    alpha = 2.0 / (period + 1.0)
    beta = 1.0 - alpha
    vals = v.tolist()
    out = [0.0] * len(vals)
    acc = vals[0]
    out[0] = acc
    for i in range(1, len(vals)):
        acc = alpha * vals[i] + beta * acc
        out[i] = acc
    return np.array(out)


def macd(series: CandleSeries, cfg: ScalingConfig = ScalingConfig()) -> tuple[np.ndarray, np.ndarray]:
    """MACD line (fast EMA - slow EMA of closes) and its signal-line EMA."""
    if len(series) == 0:
        raise ValueError("macd of empty series")
    macd_line = ema(series.close, cfg.fast) - ema(series.close, cfg.slow)
    signal_line = ema(macd_line, cfg.signal)
    return macd_line, signal_line


def macd_sar(series: CandleSeries, cfg: ScalingConfig = ScalingConfig()) -> SarSeries:
    """Two-valued MACD SAR: sign of (macd_line - signal_line) with tie carry."""
    macd_line, signal_line = macd(series, cfg)
    n = len(series)
    warmup = min(cfg.warmup, n)
    values = np.zeros(n, dtype=np.int8)
    diff = macd_line[warmup:] - signal_line[warmup:]
    signs = np.sign(diff).astype(np.int8)
    ties = np.flatnonzero(signs == 0)
    if ties.size:
        prev = SAR_DOWN
        j = 0
        for i in range(signs.size):
            if j < ties.size and ties[j] == i:
                signs[i] = prev
                j += 1
            else:
                prev = signs[i]
    values[warmup:] = signs
    return SarSeries(values, warmup)
