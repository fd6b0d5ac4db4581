"""Independent reference implementations used only by the tests.

The trial oracle follows the per-occurrence algorithm literally with plain
Python floats and dict lookups: no direct access tables, no vectorization,
and the aggregate terms in their cumulative prefix/clamp/difference form
rather than the engine's telescoped closed form.  The metrics oracle ranks
by full sort with the quantile index computed in exact rational arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from aggrisk.model import (
    EventLossTable,
    FinancialTerms,
    Layer,
    LayerTerms,
    Trial,
    YearEventTable,
)

# ----------------------------------------------------------- trial oracle ---


def fin_terms(loss: float, t: FinancialTerms) -> float:
    net = min(max(t.exchange_rate * loss - t.event_retention, 0.0), t.event_limit)
    return t.share * net


def trial_loss(events, elt_dicts, elt_terms, lt: LayerTerms) -> float:
    """Net trial loss: per-occurrence combine, occurrence clamp, then the
    aggregate terms via running prefix sums clamped and differenced."""
    f_prev = 0.0
    total = 0.0
    c = 0.0
    for e in events:
        combined = 0.0
        for d, t in zip(elt_dicts, elt_terms):
            combined += fin_terms(d.get(int(e), 0.0), t)
        occ = min(max(combined - lt.occ_retention, 0.0), lt.occ_limit)
        c += occ
        f = min(max(c - lt.agg_retention, 0.0), lt.agg_limit)
        total += f - f_prev
        f_prev = f
    return total


def layer_ylt(layer: Layer, yet: YearEventTable) -> list[float]:
    dicts = [e.as_dict() for e in layer.elts]
    terms = [e.terms for e in layer.elts]
    out = []
    offsets = yet.offsets
    for t in range(yet.trial_count):
        events = yet.event_ids[int(offsets[t]) : int(offsets[t + 1])]
        out.append(trial_loss(events, dicts, terms, layer.terms))
    return out


# --------------------------------------------------------- metrics oracle ---


def quantile_rank(n: int, return_period: float) -> int:
    """k = ceil((1 - 1/rp) * n) in exact rational arithmetic."""
    rp = Fraction(return_period)
    k = math.ceil((1 - 1 / rp) * n)
    return max(1, int(k))


def pml(losses, return_period: float) -> float:
    ordered = sorted(float(x) for x in losses)
    return ordered[quantile_rank(len(ordered), return_period) - 1]


def tvar(losses, return_period: float) -> float:
    ordered = sorted(float(x) for x in losses)
    tail = ordered[quantile_rank(len(ordered), return_period) - 1 :]
    return float(np.mean(tail))


# ------------------------------------------------------ instance builders ---


def random_fin_terms(rng: np.random.Generator) -> FinancialTerms:
    """Financial terms spanning identities, zeros, and infinite limits."""
    rate = 1.0 if rng.random() < 0.4 else float(rng.uniform(0.25, 3.0))
    retention = 0.0 if rng.random() < 0.4 else float(rng.uniform(0.0, 150.0))
    limit = math.inf if rng.random() < 0.5 else float(rng.uniform(1.0, 400.0))
    share = 1.0 if rng.random() < 0.4 else float(rng.uniform(0.0, 1.0))
    if rng.random() < 0.1:
        share = 0.0
    return FinancialTerms(rate, retention, limit, share)


def random_layer_terms(rng: np.random.Generator) -> LayerTerms:
    """Layer terms spanning zeros (annihilating limits) and infinities."""

    def _limit() -> float:
        u = rng.random()
        if u < 0.35:
            return math.inf
        if u < 0.45:
            return 0.0
        return float(rng.uniform(1.0, 2000.0))

    def _retention() -> float:
        return 0.0 if rng.random() < 0.35 else float(rng.uniform(0.0, 500.0))

    return LayerTerms(_retention(), _limit(), _retention(), _limit())


def random_elt(rng: np.random.Generator, catalog: int) -> EventLossTable:
    size = int(rng.integers(1, catalog + 1))
    ids = np.sort(rng.choice(catalog, size=size, replace=False).astype(np.uint32) + 1)
    losses = rng.lognormal(0.0, 1.0, size) * 50.0
    losses[rng.random(size) < 0.1] = 0.0  # explicit zero losses
    return EventLossTable(catalog, ids, losses, random_fin_terms(rng))


def random_instance(
    rng: np.random.Generator,
    max_trials: int = 100,
    max_events: int = 100,
    max_elts: int = 5,
) -> tuple[Layer, YearEventTable]:
    catalog = int(rng.integers(5, 200))
    n_elts = int(rng.integers(1, max_elts + 1))
    elts = tuple(random_elt(rng, catalog) for _ in range(n_elts))
    layer = Layer("oracle", elts, random_layer_terms(rng))
    n_trials = int(rng.integers(1, max_trials + 1))
    trials = []
    for _ in range(n_trials):
        n = int(rng.integers(1, max_events + 1))
        events = rng.integers(1, catalog + 1, size=n)
        trials.append(Trial.from_events(events.tolist()))
    yet = YearEventTable.from_trials(trials, catalog)
    return layer, yet
