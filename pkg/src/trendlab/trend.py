"""Dow-trend phases over a MinMax process and the trend-variable samples.

A market is in an up-trend once the last two fixed lows and the last two fixed
highs are both strictly increasing; the trend ends at the detection of the
first point breaking that strict monotonicity (equal values break it too).
Down-trends mirror everything. Phases never overlap: when a new trend's
establishing quadruple reaches back into the previous phase, its start is
trimmed to the first point after that phase.

Per completed leg inside a phase the observable variables are emitted, all
strictly positive ratios except the integer bar-count duration:

  movement leg    rel_movement = size / start price, delay_m = d_abs / start price
  correction leg  rel_correction = size / start price, delay_c = d_abs / start price,
                  retracement = size / previous movement size,
                  delay_x = d_abs / previous movement size,
                  duration = end bar - start bar

A leg whose completing point also terminates the phase still counts: the leg
itself completed, the trend merely ended because of its size. Degenerate legs
(non-positive sizes, missing previous movement) and zero delays are skipped
and tallied instead of emitted.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .market_data import CandleSeries
from .minmax import HIGH, LOW, MinMaxProcess

UP = "up"
DOWN = "down"

RETRACEMENT = "retracement"
DURATION = "duration"
REL_MOVEMENT = "rel_movement"
REL_CORRECTION = "rel_correction"
DELAY_X = "delay_x"
DELAY_M = "delay_m"
DELAY_C = "delay_c"
PERIOD_GAP = "period_gap"

VARIABLES = (RETRACEMENT, DURATION, REL_MOVEMENT, REL_CORRECTION, DELAY_X, DELAY_M, DELAY_C)


@dataclass(frozen=True)
class TrendPhase:
    direction: str
    start_point_index: int
    end_point_index: int
    established_point_index: int
    violation_point_index: Optional[int]
    start_detection_bar: int
    end_detection_bar: int


@dataclass(frozen=True)
class TrendSample:
    variable: str
    value: float
    direction: str
    scaling: float
    symbol: str
    event: int


@dataclass(frozen=True)
class SampleBatch(Sequence):
    """Extracted samples plus tallies for skipped degenerate legs and zero delays."""

    samples: tuple[TrendSample, ...]
    degenerate: int = 0
    zero_delay: int = 0

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, item):
        return self.samples[item]

    def values(self, variable: str, direction: str | None = None) -> np.ndarray:
        sel = [
            s.value
            for s in self.samples
            if s.variable == variable and (direction is None or s.direction == direction)
        ]
        return np.array(sel, dtype=float)

    def linked_pairs(self, var_a: str, var_b: str, direction: str | None = None) -> list[tuple[float, float]]:
        """Value pairs of two variables sharing a leg event, for joint fits."""
        a = {
            s.event: s.value
            for s in self.samples
            if s.variable == var_a and (direction is None or s.direction == direction)
        }
        out = []
        for s in self.samples:
            if s.variable == var_b and s.event in a and (direction is None or s.direction == direction):
                out.append((a[s.event], s.value))
        return out


def _establish(points, k: int) -> str | None:
    """Trend direction established by points[k-3..k], or None."""
    older_a, older_b = points[k - 3], points[k - 2]
    newer_a, newer_b = points[k - 1], points[k]
    # by alternation (k-3, k-1) and (k-2, k) are the same-kind pairs
    if newer_a.price > older_a.price and newer_b.price > older_b.price:
        return UP
    if newer_a.price < older_a.price and newer_b.price < older_b.price:
        return DOWN
    return None


def _continues(direction: str, new_price: float, prev_price: float) -> bool:
    # strict comparison: an equal extremum gives no fresh trend indication
    if direction == UP:
        return new_price > prev_price
    return new_price < prev_price


def detect_trends(mm: MinMaxProcess) -> list[TrendPhase]:
    """Scan fixed points into non-overlapping trend phases.

    Depends only on the point sequence, never on prices between points. A
    still-open trend at the end of the process yields a phase without a
    violation point.
    """
    pts = mm.points
    phases: list[TrendPhase] = []
    direction: str | None = None
    start = established = end = -1

    def close(violation: int | None):
        nonlocal direction
        end_detection = pts[violation].detection_bar if violation is not None else pts[end].detection_bar
        phases.append(
            TrendPhase(
                direction=direction,  # type: ignore[arg-type]
                start_point_index=start,
                end_point_index=end,
                established_point_index=established,
                violation_point_index=violation,
                start_detection_bar=pts[established].detection_bar,
                end_detection_bar=end_detection,
            )
        )
        direction = None

    for k in range(len(pts)):
        if direction is not None:
            if _continues(direction, pts[k].price, pts[k - 2].price):
                end = k
                continue
            close(violation=k)
            # the violator cannot itself establish a trend: one of its
            # monotonicity legs just failed strictly in both readings
            continue
        if k >= 3:
            found = _establish(pts, k)
            if found is not None:
                direction = found
                start = k - 3
                if phases and phases[-1].end_point_index >= start:
                    start = phases[-1].end_point_index + 1
                established = k
                end = k
    if direction is not None:
        close(violation=None)
    return phases


def extract_samples(
    mm: MinMaxProcess,
    phases: Sequence[TrendPhase],
    series: CandleSeries,
    scaling: float = float("nan"),
) -> SampleBatch:
    """Emit per-leg trend variables for every completed leg inside a phase."""
    pts = mm.points
    symbol = series.symbol
    samples: list[TrendSample] = []
    degenerate = 0
    zero_delay = 0
    event = 0

    def emit(variable: str, value: float, direction: str):
        samples.append(TrendSample(variable, value, direction, scaling, symbol, event))

    for ph in phases:
        last_leg_end = ph.violation_point_index if ph.violation_point_index is not None else ph.end_point_index
        for j in range(ph.start_point_index, last_leg_end):
            a, b = pts[j], pts[j + 1]
            event += 1
            rising = b.kind == HIGH
            size = b.price - a.price if rising else a.price - b.price
            if size <= 0.0:
                degenerate += 1
                continue
            is_movement = (a.kind == LOW) == (ph.direction == UP)
            if is_movement:
                emit(REL_MOVEMENT, size / a.price, ph.direction)
                if b.d_abs > 0.0:
                    emit(DELAY_M, b.d_abs / a.price, ph.direction)
                else:
                    zero_delay += 1
            else:
                emit(REL_CORRECTION, size / a.price, ph.direction)
                emit(DURATION, float(b.bar - a.bar), ph.direction)
                if b.d_abs > 0.0:
                    emit(DELAY_C, b.d_abs / a.price, ph.direction)
                else:
                    zero_delay += 1
                if j - 1 >= 0:
                    o = pts[j - 1]
                    movement = a.price - o.price if a.kind == HIGH else o.price - a.price
                    if movement > 0.0:
                        emit(RETRACEMENT, size / movement, ph.direction)
                        if b.d_abs > 0.0:
                            emit(DELAY_X, b.d_abs / movement, ph.direction)
                    else:
                        degenerate += 1
                else:
                    degenerate += 1
    return SampleBatch(tuple(samples), degenerate=degenerate, zero_delay=zero_delay)


def period_gaps(mm: MinMaxProcess, phases: Sequence[TrendPhase]) -> list[int]:
    """Bar gaps between consecutive same-kind points lying inside a phase."""
    pts = mm.points
    gaps = []
    for ph in phases:
        for i in range(ph.start_point_index, ph.end_point_index - 1):
            gaps.append(pts[i + 2].bar - pts[i].bar)
    return gaps


def mean_period(mm: MinMaxProcess, phases: Sequence[TrendPhase]) -> float | None:
    """Mean same-kind bar gap inside trends, or None when no pair qualifies."""
    gaps = period_gaps(mm, phases)
    if not gaps:
        return None
    return float(np.mean(gaps))


@dataclass(frozen=True)
class LineFit:
    intercept: float
    slope: float
    residual_rms: float
    n: int


def period_scaling_fit(points: Sequence[tuple[float, float]]) -> LineFit:
    """Ordinary least squares of period against scaling: T ~ intercept + slope*s."""
    pts = [(float(s), float(t)) for s, t in points]
    if len({s for s, _ in pts}) < 2:
        raise ValueError("need at least two distinct scalings for a line fit")
    s = np.array([p[0] for p in pts])
    t = np.array([p[1] for p in pts])
    s_mean = s.mean()
    t_mean = t.mean()
    slope = float(np.sum((s - s_mean) * (t - t_mean)) / np.sum((s - s_mean) ** 2))
    intercept = float(t_mean - slope * s_mean)
    resid = t - (intercept + slope * s)
    return LineFit(intercept, slope, float(np.sqrt(np.mean(resid**2))), len(pts))
