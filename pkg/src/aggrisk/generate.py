"""Synthetic portfolio generation at realistic desk shapes.

Every draw comes from a named counter-based PRNG (NumPy Philox) keyed by
``(seed, stream)``, where the stream tag encodes what is being generated
(trial, ELT, or layer) and its index.  Each trial and each table therefore
owns an independent stream: generation order never matters, pieces can be
regenerated in isolation, and output is a pure function of the spec.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    EventLossTable,
    Layer,
    LayerTerms,
    YearEventTable,
)

_KIND_TRIAL = 1
_KIND_ELT = 2
_KIND_LAYER = 3

_MAX_SEED = 2**64 - 1


def _stream(seed: int, kind: int, index: int) -> np.random.Generator:
    # key limbs are uint64: [user seed, kind tag in the top bits | index]
    key = np.array([seed, (kind << 48) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class GeneratorSpec:
    """Shape and seed of a synthetic portfolio."""

    seed: int = 0
    catalog_size: int = 100_000
    trial_count: int = 10_000
    events_per_trial_range: tuple[int, int] = (800, 1500)
    elt_count: int = 15
    elt_size_range: tuple[int, int] = (10_000, 30_000)
    loss_scale: float = 1000.0
    layer_count: int = 1
    elts_per_layer: int | None = None

    def validate(self) -> None:
        if not 0 <= self.seed <= _MAX_SEED:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.catalog_size < 1:
            raise ValueError("catalog_size must be >= 1")
        if self.trial_count < 1:
            raise ValueError("trial_count must be >= 1")
        lo, hi = self.events_per_trial_range
        if not 0 <= lo <= hi:
            raise ValueError("events_per_trial_range must be a non-empty range")
        lo, hi = self.elt_size_range
        if not 1 <= lo <= hi:
            raise ValueError("elt_size_range must be a non-empty range")
        if hi > self.catalog_size:
            raise ValueError(
                f"elt size up to {hi} exceeds catalog of {self.catalog_size} events"
            )
        if self.elt_count < 1:
            raise ValueError("elt_count must be >= 1")
        if not self.loss_scale > 0:
            raise ValueError("loss_scale must be positive")
        if self.layer_count < 1:
            raise ValueError("layer_count must be >= 1")
        if self.elts_per_layer is not None and not 1 <= self.elts_per_layer <= self.elt_count:
            raise ValueError("elts_per_layer must be in [1, elt_count]")


def generate_yet(spec: GeneratorSpec) -> YearEventTable:
    """Seeded year event table: per-trial counts, ids, sorted timestamps.

    Two passes over the same per-trial streams: the first draws only the
    occurrence counts to size the arrays, the second replays each stream and
    fills the slices in place.  Peak memory stays at one copy of the table.
    """
    spec.validate()
    lo, hi = spec.events_per_trial_range
    counts = np.empty(spec.trial_count, dtype=np.int64)
    for t in range(spec.trial_count):
        counts[t] = _stream(spec.seed, _KIND_TRIAL, t).integers(lo, hi + 1)
    offsets = np.zeros(spec.trial_count + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    total = int(offsets[-1])
    event_ids = np.empty(total, dtype=np.uint32)
    timestamps = np.empty(total, dtype=np.float64)
    for t in range(spec.trial_count):
        rng = _stream(spec.seed, _KIND_TRIAL, t)
        n = int(rng.integers(lo, hi + 1))
        start, end = int(offsets[t]), int(offsets[t + 1])
        event_ids[start:end] = rng.integers(
            1, spec.catalog_size + 1, size=n, dtype=np.uint32
        )
        ts = rng.random(n)
        ts.sort()
        timestamps[start:end] = ts
    return YearEventTable(spec.catalog_size, event_ids, timestamps, offsets)


def generate_elt(spec: GeneratorSpec, index: int) -> EventLossTable:
    """Seeded event loss table ``index``: unique ids, log-normal losses."""
    spec.validate()
    if index < 0:
        raise ValueError("index must be >= 0")
    rng = _stream(spec.seed, _KIND_ELT, index)
    lo, hi = spec.elt_size_range
    size = int(rng.integers(lo, hi + 1))
    if size > spec.catalog_size:
        raise ValueError(f"elt size {size} exceeds catalog of {spec.catalog_size} events")
    ids = rng.choice(spec.catalog_size, size=size, replace=False).astype(np.uint32) + 1
    losses = rng.lognormal(mean=0.0, sigma=1.0, size=size) * spec.loss_scale
    order = np.argsort(ids)
    return EventLossTable(spec.catalog_size, ids[order], losses[order])


def generate_layer(
    spec: GeneratorSpec, index: int, elts: Sequence[EventLossTable]
) -> Layer:
    """Seeded layer ``index`` drawing its ELT subset and terms from one stream.

    Terms are uniform multiples of loss_scale picked so that typical trials
    both pierce the retentions and occasionally hit the limits.
    """
    spec.validate()
    if index < 0:
        raise ValueError("index must be >= 0")
    if not elts:
        raise ValueError("layer needs at least one event loss table")
    rng = _stream(spec.seed, _KIND_LAYER, index)
    want = len(elts) if spec.elts_per_layer is None else min(spec.elts_per_layer, len(elts))
    picked = np.sort(rng.choice(len(elts), size=want, replace=False))
    scale = spec.loss_scale
    terms = LayerTerms(
        occ_retention=float(rng.uniform(0.0, 2.0)) * scale,
        occ_limit=float(rng.uniform(10.0, 100.0)) * scale,
        agg_retention=float(rng.uniform(0.0, 5.0)) * scale,
        agg_limit=float(rng.uniform(50.0, 500.0)) * scale,
    )
    return Layer(
        id=f"layer-{index:03d}",
        elts=tuple(elts[int(i)] for i in picked),
        terms=terms,
    )


def generate_portfolio(
    spec: GeneratorSpec,
) -> tuple[YearEventTable, list[EventLossTable], list[Layer]]:
    """Full synthetic portfolio: the YET, the ELT pool, and the layers."""
    spec.validate()
    yet = generate_yet(spec)
    elts = [generate_elt(spec, i) for i in range(spec.elt_count)]
    layers = [generate_layer(spec, i, elts) for i in range(spec.layer_count)]
    return yet, elts, layers
