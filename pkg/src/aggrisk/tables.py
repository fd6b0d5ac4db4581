"""Direct access tables: dense catalog-indexed loss arrays.

An event loss table is a sparse mapping; the analysis needs one random read
per (occurrence, table) pair, so each table is expanded into a dense float64
array of ``catalog_size + 1`` slots indexed directly by event id (slot 0 is
allocated but unused so ids index without offset arithmetic).  Absent events
hold 0.0, which contributes nothing downstream, so absence and an explicit
zero loss are deliberately indistinguishable.

A :class:`TableSet` stacks the tables of one layer (or one pricing session)
into a single C-contiguous 2-d array so the simulation kernel can address
any subset of them without copying.  Tables are built once and never
mutated; re-pricing with new layer terms reuses them as-is.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EventOutOfRangeError
from .model import EventLossTable, FinancialTerms

BYTES_PER_SLOT = 8  # float64 losses

_build_lock = threading.Lock()
_build_count = 0


def build_count() -> int:
    """Number of table-set builds since import (instrumentation for tests
    and for the pricing service's builds == sessions invariant)."""
    return _build_count


def _note_build() -> None:
    global _build_count
    with _build_lock:
        _build_count += 1


class DirectAccessTable:
    """Dense loss array for one event loss table.

    ``losses[e]`` is the loss for event ``e``; every event absent from the
    source table reads 0.0.  Immutable after build.
    """

    __slots__ = ("catalog_size", "losses", "terms", "nonzero_count")

    def __init__(self, catalog_size: int, losses: np.ndarray, terms: FinancialTerms, nonzero_count: int):
        self.catalog_size = int(catalog_size)
        self.losses = losses
        self.terms = terms
        self.nonzero_count = int(nonzero_count)
        self.losses.setflags(write=False)

    def lookup(self, event: int) -> float:
        """Loss for ``event``; exactly one memory access after the range check."""
        if not 1 <= event <= self.catalog_size:
            raise EventOutOfRangeError(f"event id {event} outside [1, {self.catalog_size}]")
        return float(self.losses[event])

    def __repr__(self) -> str:
        return f"DirectAccessTable(catalog={self.catalog_size}, nonzero={self.nonzero_count})"


class TableSet:
    """The direct access tables of one layer, stacked row-per-table.

    ``stacked`` has shape ``(n_tables, catalog_size + 1)``; ``tables[i]`` is
    a :class:`DirectAccessTable` viewing row ``i``.  Per-table financial
    terms are mirrored into flat arrays for the kernel.
    """

    __slots__ = ("catalog_size", "stacked", "tables", "fin_rate", "fin_ret", "fin_lim", "fin_share")

    def __init__(self, catalog_size: int, stacked: np.ndarray, terms: Sequence[FinancialTerms], nonzero: Sequence[int]):
        self.catalog_size = int(catalog_size)
        self.stacked = stacked
        self.stacked.setflags(write=False)
        self.tables = tuple(
            DirectAccessTable(catalog_size, stacked[i], t, nz)
            for i, (t, nz) in enumerate(zip(terms, nonzero))
        )
        self.fin_rate = np.array([t.exchange_rate for t in terms], dtype=np.float64)
        self.fin_ret = np.array([t.event_retention for t in terms], dtype=np.float64)
        self.fin_lim = np.array([t.event_limit for t in terms], dtype=np.float64)
        self.fin_share = np.array([t.share for t in terms], dtype=np.float64)
        _note_build()

    @classmethod
    def from_elts(cls, elts: Sequence[EventLossTable], catalog_size: int | None = None) -> "TableSet":
        """Expand each loss table into its dense row.

        Raises :class:`EventOutOfRangeError` if any record's event id exceeds
        the catalog (never silently drops or wraps).
        """
        if catalog_size is None:
            if not elts:
                raise ValueError("catalog_size required for an empty table set")
            catalog_size = max(e.catalog_size for e in elts)
        n = len(elts)
        stacked = np.zeros((n, catalog_size + 1), dtype=np.float64)
        nonzero = []
        for i, elt in enumerate(elts):
            ids = elt.event_ids
            if ids.size and (int(ids.min()) < 1 or int(ids.max()) > catalog_size):
                raise EventOutOfRangeError(
                    f"elt[{i}] holds event ids outside [1, {catalog_size}]"
                )
            stacked[i, ids] = elt.losses
            nonzero.append(int(np.count_nonzero(elt.losses)))
        return cls(catalog_size, stacked, [e.terms for e in elts], nonzero)

    @classmethod
    def from_tables(cls, tables: Sequence[DirectAccessTable]) -> "TableSet":
        """Stack standalone tables into one set (copies each row once)."""
        if not tables:
            raise ValueError("need at least one table")
        catalog = tables[0].catalog_size
        if any(t.catalog_size != catalog for t in tables):
            raise ValueError("tables span different catalogs")
        stacked = np.vstack([t.losses for t in tables])
        return cls(catalog, stacked, [t.terms for t in tables], [t.nonzero_count for t in tables])

    def __len__(self) -> int:
        return len(self.tables)

    def selection_arrays(self, indices: Sequence[int] | None = None):
        """Kernel inputs for a subset of tables: (row indices, rate, ret, lim, share).

        ``None`` selects every table.  Selection is index arithmetic over the
        prebuilt stack; nothing is copied or rebuilt.
        """
        if indices is None:
            sel = np.arange(len(self.tables), dtype=np.int64)
        else:
            sel = np.asarray(list(indices), dtype=np.int64)
            if sel.size == 0:
                raise ValueError("table selection is empty")
            if sel.min() < 0 or sel.max() >= len(self.tables):
                raise IndexError("table selection out of range")
        return (
            sel,
            np.ascontiguousarray(self.fin_rate[sel]),
            np.ascontiguousarray(self.fin_ret[sel]),
            np.ascontiguousarray(self.fin_lim[sel]),
            np.ascontiguousarray(self.fin_share[sel]),
        )


def build_direct_table(elt: EventLossTable) -> DirectAccessTable:
    """Dense table for a single event loss table."""
    return TableSet.from_elts([elt], elt.catalog_size).tables[0]


def lookup(table: DirectAccessTable, event: int) -> float:
    """Loss stored for ``event`` (0.0 when the source table did not list it)."""
    return table.lookup(event)


@dataclass(frozen=True)
class MemoryFootprint:
    """Size report for a collection of direct access tables.

    ``payload_slots`` counts one slot per catalog event per table; the unused
    index-0 slot of each table is accounted as overhead.
    """

    table_count: int
    payload_slots: int
    payload_bytes: int
    overhead_bytes: int

    @property
    def total_bytes(self) -> int:
        return self.payload_bytes + self.overhead_bytes


def memory_footprint(tables: Sequence[DirectAccessTable]) -> MemoryFootprint:
    """Account the dense-array cost of ``tables``.

    15 tables over a 2,000,000-event catalog report 30,000,000 payload slots;
    a single table over a 1,000-event catalog totals 8,008 bytes (1,001
    slots of 8 bytes, one of them the index-0 overhead slot).
    """
    slots = sum(t.catalog_size for t in tables)
    n = len(tables)
    return MemoryFootprint(
        table_count=n,
        payload_slots=slots,
        payload_bytes=slots * BYTES_PER_SLOT,
        overhead_bytes=n * BYTES_PER_SLOT,
    )
