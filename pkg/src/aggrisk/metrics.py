"""Risk metrics over year loss tables: PML, TVAR, EP curves, roll-up.

PML at return period ``rp`` is the empirical (1 - 1/rp)-quantile of the
trial losses, taken as the k-th smallest with ``k = ceil((1 - 1/rp) * N)``
and no interpolation.  TVAR is the mean of the closed tail, the top
``N - k + 1`` order statistics.  All functions are pure and leave their
inputs untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import YearLossTable


def _loss_array(ylt) -> np.ndarray:
    losses = ylt.losses if isinstance(ylt, YearLossTable) else ylt
    arr = np.asarray(losses, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("losses must be one-dimensional")
    return arr


def _order_stat_k(n: int, return_period: float) -> int:
    """1-indexed rank for the PML order statistic.

    ceil((1 - 1/rp) * N) == N - floor(N / rp) exactly; the right-hand form
    avoids the float overshoot of products like 0.99 * 1000.
    """
    rp = float(return_period)
    if not rp > 1.0:
        raise ValueError(f"return_period must exceed 1, got {return_period}")
    if rp > n:
        raise ValueError(f"return_period {return_period} exceeds trial count {n}")
    k = n - math.floor(n / rp)
    assert 1 <= k <= n
    return k


def pml(ylt, return_period: float) -> float:
    """Probable maximum loss: empirical quantile at the given return period."""
    losses = _loss_array(ylt)
    n = losses.shape[0]
    if n == 0:
        raise ValueError("empty year loss table")
    k = _order_stat_k(n, return_period)
    return float(np.partition(losses, k - 1)[k - 1])


def tvar(ylt, return_period: float) -> float:
    """Tail value at risk: mean of losses at and beyond the PML quantile."""
    losses = _loss_array(ylt)
    n = losses.shape[0]
    if n == 0:
        raise ValueError("empty year loss table")
    k = _order_stat_k(n, return_period)
    part = np.partition(losses, k - 1)
    return float(np.mean(part[k - 1 :]))


@dataclass(frozen=True)
class EPCurve:
    """Exceedance-probability curve: points sorted by descending probability."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for (l0, p0), (l1, p1) in zip(self.points, self.points[1:]):
            if not p1 < p0:
                raise ValueError("probabilities must be strictly decreasing")
            if l1 < l0:
                raise ValueError("losses must be non-decreasing")
        for _, p in self.points:
            if not 0.0 <= p <= 1.0:
                raise ValueError("probability outside [0, 1]")

    @property
    def losses(self) -> tuple[float, ...]:
        return tuple(l for l, _ in self.points)

    @property
    def probabilities(self) -> tuple[float, ...]:
        return tuple(p for _, p in self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def ep_curve(ylt, return_periods: Iterable[float]) -> EPCurve:
    """PML at each return period, as (loss, 1/rp) points.

    Duplicate return periods collapse to one point; points come back in
    descending-probability (ascending return-period) order.
    """
    losses = _loss_array(ylt)
    n = losses.shape[0]
    if n == 0:
        raise ValueError("empty year loss table")
    rps = sorted({float(rp) for rp in return_periods})
    if not rps:
        raise ValueError("no return periods given")
    ordered = np.sort(losses)
    points = []
    for rp in rps:
        k = _order_stat_k(n, rp)
        points.append((float(ordered[k - 1]), 1.0 / rp))
    return EPCurve(tuple(points))


def portfolio_rollup(ylts: Sequence[YearLossTable]) -> YearLossTable:
    """Per-trial sum across layers; the whole-portfolio year loss table."""
    if not ylts:
        raise ValueError("no year loss tables to roll up")
    if len(ylts) == 1:
        return ylts[0]
    n = ylts[0].losses.shape[0]
    for y in ylts[1:]:
        if y.losses.shape[0] != n:
            raise ValueError(
                f"year loss tables differ in length: {n} vs {y.losses.shape[0]}"
            )
    total = ylts[0].losses.astype(np.float64, copy=True)
    for y in ylts[1:]:
        np.add(total, y.losses, out=total)
    return YearLossTable("portfolio", total)
