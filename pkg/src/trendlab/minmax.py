"""Alternating swing extrema (MinMax process) driven by a SAR indicator.

The sweep tracks one candidate extremum at a time: a running maximum of candle
highs while searching a high (SAR up), a running minimum of candle lows while
searching a low (SAR down). A candidate becomes a fixed point when the SAR
changes sign, or immediately when a bar violates the last fixed opposite
extremum (a low breaking under the last fixed low during a high search, and
mirrored). Each fixed point records both the bar of the extreme price and the
bar at which it was detected; the absolute delay d_abs is the distance between
the extreme price and the close of the detection bar.

Everything is causal: a point fixed at detection bar t depends only on candles
with index <= t, so replaying any prefix reproduces all points already fixed
within it, byte for byte.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .indicators import SAR_DOWN, SAR_UP, SarSeries
from .market_data import CandleSeries

HIGH = "high"
LOW = "low"


@dataclass(frozen=True)
class ExtremumPoint:
    kind: str
    price: float
    bar: int
    detection_bar: int
    detection_close: float
    d_abs: float

    def __post_init__(self):
        if self.kind not in (HIGH, LOW):
            raise ValueError(f"bad extremum kind {self.kind!r}")
        if self.detection_bar < self.bar:
            raise ValueError("detection_bar must be >= bar")
        if self.d_abs != abs(self.price - self.detection_close):
            raise ValueError("d_abs must equal |price - detection_close|")


@dataclass(frozen=True)
class OpenCandidate:
    """Provisional extremum still being tracked when the series ends."""

    kind: str
    price: float
    bar: int


@dataclass(frozen=True)
class MinMaxProcess:
    points: tuple[ExtremumPoint, ...]
    open_candidate: Optional[OpenCandidate]

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        for i, p in enumerate(pts):
            if i == 0:
                continue
            q = pts[i - 1]
            if p.kind == q.kind:
                raise ValueError(f"points must alternate kinds (index {i})")
            if p.bar <= q.bar:
                raise ValueError(f"point bars must strictly increase (index {i})")
            if p.detection_bar < q.detection_bar:
                raise ValueError(f"detection bars must be non-decreasing (index {i})")
        if pts and self.open_candidate is not None:
            if self.open_candidate.kind == pts[-1].kind:
                raise ValueError("open candidate must alternate with the last fixed point")

    def __len__(self) -> int:
        return len(self.points)


def run_minmax(series: CandleSeries, sar: SarSeries) -> MinMaxProcess:
    """Sweep a candle series against its SAR values into a MinMax process.

    The first search covers every bar up to and including the first defined
    SAR bar (warm-up bars feed the initial candidate but never fix points).
    After a point is fixed, the opposite search scans the bars strictly after
    the fixed extremum through the detection bar, then continues bar by bar.
    """
    n = len(series)
    if len(sar) != n:
        raise ValueError(f"SAR length {len(sar)} does not match series length {n}")
    w = sar.warmup
    if w >= n:
        return MinMaxProcess(points=(), open_candidate=None)

    highs = series.high.tolist()
    lows = series.low.tolist()
    closes = series.close.tolist()
    sar_values = sar.values.tolist()

    points: list[ExtremumPoint] = []
    searching_high = sar_values[w] == SAR_UP

    # seed the first candidate over [0 .. w]
    cand_bar = 0
    cand_price = highs[0] if searching_high else lows[0]
    for j in range(1, w + 1):
        if searching_high:
            if highs[j] > cand_price:
                cand_price, cand_bar = highs[j], j
        elif lows[j] < cand_price:
            cand_price, cand_bar = lows[j], j

    last_fixed_price: float | None = None  # price of the last fixed point (opposite kind)
    prev_sar = sar_values[w]

    for i in range(w + 1, n):
        s = sar_values[i]
        hi = highs[i]
        lo = lows[i]
        if searching_high:
            if cand_bar < 0 or hi > cand_price:
                cand_price, cand_bar = hi, i
        else:
            if cand_bar < 0 or lo < cand_price:
                cand_price, cand_bar = lo, i

        fix = False
        if s != prev_sar:
            # a flip only fixes when the vanishing phase matches the search
            if searching_high and s == SAR_DOWN:
                fix = True
            elif not searching_high and s == SAR_UP:
                fix = True
        if not fix and last_fixed_price is not None:
            if searching_high:
                fix = lo < last_fixed_price
            else:
                fix = hi > last_fixed_price
        if fix:
            close_i = closes[i]
            points.append(
                ExtremumPoint(
                    kind=HIGH if searching_high else LOW,
                    price=cand_price,
                    bar=cand_bar,
                    detection_bar=i,
                    detection_close=close_i,
                    d_abs=abs(cand_price - close_i),
                )
            )
            last_fixed_price = cand_price
            searching_high = not searching_high
            # rescan (fixed bar, i] for the opposite candidate
            start = cand_bar + 1
            cand_bar = -1
            cand_price = 0.0
            for j in range(start, i + 1):
                if searching_high:
                    if cand_bar < 0 or highs[j] > cand_price:
                        cand_price, cand_bar = highs[j], j
                elif cand_bar < 0 or lows[j] < cand_price:
                    cand_price, cand_bar = lows[j], j
        prev_sar = s

    open_candidate = None
    if cand_bar >= 0:
        open_candidate = OpenCandidate(HIGH if searching_high else LOW, cand_price, cand_bar)
    return MinMaxProcess(points=tuple(points), open_candidate=open_candidate)


def relative_delay(point: ExtremumPoint, denom: float) -> float:
    """Detection delay of a point expressed in units of ``denom``."""
    if not denom > 0.0:
        raise ValueError("denominator must be positive")
    return point.d_abs / denom
