"""Core value types for aggregate risk analysis.

The object model is array-backed: a :class:`YearEventTable` stores one flat
vector of event ids, one of timestamps, and a trial-boundary offset vector,
and :class:`Trial` objects are cheap views into it.  At realistic scale
(10^5..10^6 trials x ~1000 occurrences) per-occurrence Python objects are not
an option; the flat layout is also exactly what the binary file format and
the simulation kernel consume.

All types are immutable after construction and safe to share across threads.
Constructors do not enforce domain invariants; :func:`validate_portfolio`
checks them and returns a report, and the engine refuses to run on data that
does not validate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

UNLIMITED = math.inf
"""Sentinel for an unlimited (absent) retention layer limit."""

MAX_TRIAL_LENGTH = 10_000
"""Upper bound on occurrences per trial accepted by validation."""

EventId = int
"""Dense positive integer in [1, catalog_size]; 0 is reserved for "no event"."""


@dataclass(frozen=True)
class EventOccurrence:
    """One event hitting at some point of the contractual year.

    ``timestamp`` is the unitless fraction of the year in [0, 1].  The
    analysis only uses the ordering it induces, never the value itself.
    """

    event: EventId
    timestamp: float


@dataclass(frozen=True)
class FinancialTerms:
    """Per-event transformation attached to an event loss table.

    Applied to each looked-up loss as
    ``share * min(max(exchange_rate * loss - event_retention, 0), event_limit)``.
    The identity element is ``FinancialTerms()``.
    """

    exchange_rate: float = 1.0
    event_retention: float = 0.0
    event_limit: float = UNLIMITED
    share: float = 1.0

    def is_identity(self) -> bool:
        return (
            self.exchange_rate == 1.0
            and self.event_retention == 0.0
            and self.event_limit == UNLIMITED
            and self.share == 1.0
        )


@dataclass(frozen=True)
class LayerTerms:
    """Occurrence and aggregate retention/limit of a reinsurance layer.

    Occurrence terms clamp each individual event loss; aggregate terms clamp
    the running cumulative loss of a trial.  ``UNLIMITED`` disables a limit.
    """

    occ_retention: float = 0.0
    occ_limit: float = UNLIMITED
    agg_retention: float = 0.0
    agg_limit: float = UNLIMITED


class Trial:
    """Ordered sequence of event occurrences for one simulated year.

    Thin immutable wrapper over two parallel arrays (uint32 event ids,
    float64 timestamps sorted ascending).
    """

    __slots__ = ("event_ids", "timestamps")

    def __init__(self, event_ids: np.ndarray, timestamps: np.ndarray):
        event_ids = np.ascontiguousarray(event_ids, dtype=np.uint32)
        timestamps = np.ascontiguousarray(timestamps, dtype=np.float64)
        if event_ids.shape != timestamps.shape or event_ids.ndim != 1:
            raise ValueError("event_ids and timestamps must be 1-d and parallel")
        self.event_ids = event_ids
        self.timestamps = timestamps
        self.event_ids.setflags(write=False)
        self.timestamps.setflags(write=False)

    @classmethod
    def from_events(cls, events: Sequence[int], timestamps: Sequence[float] | None = None) -> "Trial":
        """Build a trial from a plain event id list.

        If ``timestamps`` is omitted the occurrences are placed evenly across
        the year, preserving the given order.
        """
        ids = np.asarray(list(events), dtype=np.uint32)
        if timestamps is None:
            n = len(ids)
            ts = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(n)
        else:
            ts = np.asarray(list(timestamps), dtype=np.float64)
        return cls(ids, ts)

    def __len__(self) -> int:
        return int(self.event_ids.shape[0])

    @property
    def occurrences(self) -> Iterator[EventOccurrence]:
        for e, t in zip(self.event_ids.tolist(), self.timestamps.tolist()):
            yield EventOccurrence(e, t)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Trial)
            and np.array_equal(self.event_ids, other.event_ids)
            and np.array_equal(self.timestamps, other.timestamps)
        )

    def __repr__(self) -> str:
        return f"Trial(n={len(self)})"


class _TrialSeq(Sequence):
    """Lazy sequence of Trial views over a YearEventTable."""

    __slots__ = ("_yet",)

    def __init__(self, yet: "YearEventTable"):
        self._yet = yet

    def __len__(self) -> int:
        return self._yet.trial_count

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        n = len(self)
        if i < 0:
            i += n
        if not 0 <= i < n:
            raise IndexError(i)
        lo, hi = self._yet.offsets[i], self._yet.offsets[i + 1]
        return Trial(self._yet.event_ids[lo:hi], self._yet.timestamps[lo:hi])


class YearEventTable:
    """Pre-simulated catalog of trials, stored columnar.

    ``event_ids`` and ``timestamps`` are flat arrays over all trials;
    ``offsets`` has ``trial_count + 1`` entries and trial ``i`` spans
    ``[offsets[i], offsets[i+1])``.
    """

    __slots__ = ("catalog_size", "event_ids", "timestamps", "offsets")

    def __init__(
        self,
        catalog_size: int,
        event_ids: np.ndarray,
        timestamps: np.ndarray,
        offsets: np.ndarray,
    ):
        self.catalog_size = int(catalog_size)
        self.event_ids = np.ascontiguousarray(event_ids, dtype=np.uint32)
        self.timestamps = np.ascontiguousarray(timestamps, dtype=np.float64)
        self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        if self.offsets.ndim != 1 or self.offsets.shape[0] < 1:
            raise ValueError("offsets must hold at least one boundary")
        if self.event_ids.shape != self.timestamps.shape:
            raise ValueError("event_ids and timestamps must be parallel")
        if int(self.offsets[0]) != 0 or int(self.offsets[-1]) != self.event_ids.shape[0]:
            raise ValueError("offsets must span [0, occurrence count]")
        for a in (self.event_ids, self.timestamps, self.offsets):
            a.setflags(write=False)

    @classmethod
    def from_trials(cls, trials: Sequence[Trial], catalog_size: int) -> "YearEventTable":
        counts = [len(t) for t in trials]
        offsets = np.zeros(len(trials) + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        total = int(offsets[-1])
        ids = np.empty(total, dtype=np.uint32)
        ts = np.empty(total, dtype=np.float64)
        for i, t in enumerate(trials):
            ids[offsets[i] : offsets[i + 1]] = t.event_ids
            ts[offsets[i] : offsets[i + 1]] = t.timestamps
        return cls(catalog_size, ids, ts, offsets)

    @property
    def trial_count(self) -> int:
        return int(self.offsets.shape[0] - 1)

    @property
    def trials(self) -> Sequence[Trial]:
        return _TrialSeq(self)

    def head(self, n: int) -> "YearEventTable":
        """View of the first ``n`` trials (no copy); used by benchmark sweeps."""
        if not 0 <= n <= self.trial_count:
            raise ValueError(f"head({n}) out of range for {self.trial_count} trials")
        end = int(self.offsets[n])
        return YearEventTable(
            self.catalog_size,
            self.event_ids[:end],
            self.timestamps[:end],
            self.offsets[: n + 1],
        )

    def __repr__(self) -> str:
        return f"YearEventTable(catalog={self.catalog_size}, trials={self.trial_count})"


class EventLossTable:
    """Event to expected-loss mapping for one exposure set.

    Stored as parallel arrays (unique uint32 event ids, float64 losses) plus
    the financial terms applied to every loss drawn from this table.
    """

    __slots__ = ("catalog_size", "event_ids", "losses", "terms")

    def __init__(
        self,
        catalog_size: int,
        event_ids: np.ndarray,
        losses: np.ndarray,
        terms: FinancialTerms | None = None,
    ):
        self.catalog_size = int(catalog_size)
        self.event_ids = np.ascontiguousarray(event_ids, dtype=np.uint32)
        self.losses = np.ascontiguousarray(losses, dtype=np.float64)
        if self.event_ids.shape != self.losses.shape or self.event_ids.ndim != 1:
            raise ValueError("event_ids and losses must be 1-d and parallel")
        self.terms = terms if terms is not None else FinancialTerms()
        self.event_ids.setflags(write=False)
        self.losses.setflags(write=False)

    @classmethod
    def from_records(
        cls,
        records: Mapping[int, float],
        catalog_size: int,
        terms: FinancialTerms | None = None,
    ) -> "EventLossTable":
        ids = np.fromiter(records.keys(), dtype=np.uint32, count=len(records))
        losses = np.fromiter(records.values(), dtype=np.float64, count=len(records))
        order = np.argsort(ids, kind="stable")
        return cls(catalog_size, ids[order], losses[order], terms)

    @property
    def record_count(self) -> int:
        return int(self.event_ids.shape[0])

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.event_ids.tolist(), self.losses.tolist()))

    def __repr__(self) -> str:
        return f"EventLossTable(catalog={self.catalog_size}, records={self.record_count})"


@dataclass(frozen=True)
class Layer:
    """A contract: a set of event loss tables priced under shared layer terms."""

    id: str
    elts: tuple[EventLossTable, ...]
    terms: LayerTerms = field(default_factory=LayerTerms)

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "elts", tuple(self.elts))


class YearLossTable:
    """Net loss per trial for one layer, index-aligned with the year event table."""

    __slots__ = ("layer_id", "losses")

    def __init__(self, layer_id: str, losses: np.ndarray):
        self.layer_id = str(layer_id)
        self.losses = np.ascontiguousarray(losses, dtype=np.float64)
        if self.losses.ndim != 1:
            raise ValueError("losses must be 1-d")
        self.losses.setflags(write=False)

    def __len__(self) -> int:
        return int(self.losses.shape[0])

    def __repr__(self) -> str:
        return f"YearLossTable(layer={self.layer_id!r}, trials={len(self)})"


@dataclass(frozen=True)
class Violation:
    """One validation finding; ``category`` is a stable machine-readable key."""

    category: str
    message: str

    def __str__(self) -> str:
        return f"[{self.category}] {self.message}"


def _check_financial_terms(t: FinancialTerms, where: str, out: list[Violation]) -> None:
    if not (t.exchange_rate > 0 and math.isfinite(t.exchange_rate)):
        out.append(Violation("bad_financial_terms", f"{where}: exchange_rate must be finite and > 0"))
    if not t.event_retention >= 0:
        out.append(Violation("bad_financial_terms", f"{where}: event_retention must be >= 0"))
    if not t.event_limit > 0:
        out.append(Violation("bad_financial_terms", f"{where}: event_limit must be > 0"))
    if not 0 <= t.share <= 1:
        out.append(Violation("bad_financial_terms", f"{where}: share must lie in [0, 1]"))


def _check_layer_terms(t: LayerTerms, where: str, out: list[Violation]) -> None:
    for name in ("occ_retention", "occ_limit", "agg_retention", "agg_limit"):
        v = getattr(t, name)
        if not v >= 0:
            out.append(Violation("bad_layer_terms", f"{where}: {name} must be >= 0"))
    if not math.isfinite(t.occ_retention) or not math.isfinite(t.agg_retention):
        out.append(Violation("bad_layer_terms", f"{where}: retentions must be finite"))


def validate_elt(elt: EventLossTable, catalog_size: int | None = None, where: str = "elt") -> list[Violation]:
    """Invariant report for a single event loss table."""
    out: list[Violation] = []
    cat = elt.catalog_size if catalog_size is None else catalog_size
    if catalog_size is not None and elt.catalog_size != catalog_size:
        out.append(
            Violation(
                "catalog_mismatch",
                f"{where}: catalog_size {elt.catalog_size} != portfolio catalog {catalog_size}",
            )
        )
    ids = elt.event_ids
    if ids.size:
        if int(ids.min()) < 1 or int(ids.max()) > cat:
            out.append(Violation("event_out_of_range", f"{where}: event id outside [1, {cat}]"))
        if np.unique(ids).size != ids.size:
            out.append(Violation("duplicate_event", f"{where}: duplicate event ids"))
    if elt.losses.size and (not np.all(np.isfinite(elt.losses)) or float(elt.losses.min()) < 0):
        out.append(Violation("negative_loss", f"{where}: losses must be finite and >= 0"))
    _check_financial_terms(elt.terms, where, out)
    return out


def validate_portfolio(layers: Sequence[Layer], yet: YearEventTable) -> list[Violation]:
    """Check every domain invariant; an empty report means the input is valid.

    Covers: non-empty trial set, per-trial length bounds and timestamp
    ordering, event ids within the catalog on both sides, catalog consistency
    between the year event table and every layer's loss tables, non-empty
    layers, and term-value ranges.
    """
    out: list[Violation] = []
    cat = yet.catalog_size

    if yet.trial_count == 0:
        out.append(Violation("no_trials", "year event table holds no trials"))
    counts = np.diff(yet.offsets)
    if counts.size:
        bad = np.flatnonzero((counts < 1) | (counts > MAX_TRIAL_LENGTH))
        if bad.size:
            out.append(
                Violation(
                    "trial_length",
                    f"{bad.size} trial(s) outside [1, {MAX_TRIAL_LENGTH}] occurrences (first: trial {int(bad[0])})",
                )
            )
    ids = yet.event_ids
    if ids.size:
        if int(ids.min()) < 1 or int(ids.max()) > cat:
            out.append(Violation("event_out_of_range", f"trial event id outside [1, {cat}]"))
        ts = yet.timestamps
        if ts.size and (float(ts.min()) < 0.0 or float(ts.max()) > 1.0):
            out.append(Violation("bad_timestamp", "timestamps must lie in [0, 1]"))
        # Non-decreasing within each trial: only boundary positions may drop.
        steps = np.diff(ts)
        drops = np.flatnonzero(steps < 0) + 1
        interior = np.setdiff1d(drops, yet.offsets, assume_unique=False)
        if interior.size:
            out.append(Violation("trial_unsorted", f"timestamps decrease inside {interior.size} position(s)"))

    for li, layer in enumerate(layers):
        where = f"layer {layer.id!r}"
        if len(layer.elts) == 0:
            out.append(Violation("layer_no_elts", f"{where}: layer has no ELTs"))
        _check_layer_terms(layer.terms, where, out)
        for ei, elt in enumerate(layer.elts):
            out.extend(validate_elt(elt, cat, where=f"{where} elt[{ei}]"))
    return out
