"""Aggregate loss simulation over layers and trials.

The four per-trial steps: dense-table lookup of each occurrence's loss in
every table of the layer, per-table financial terms accumulated into one
combined loss per occurrence, occurrence retention/limit per occurrence,
and the aggregate retention/limit over the trial's running cumulative loss.

Two interchangeable backends implement the hot loop: a compiled extension
(``aggrisk.engine._kernel``, Cython) and a NumPy fallback
(``aggrisk.engine._fallback``).  Import selects the compiled core when the
extension built, unless ``AGGRISK_PURE_PYTHON=1``; ``EngineConfig.backend``
overrides per run.  Both produce bit-identical output.

Parallelism is one task per block of trials on a thread pool; the compiled
kernel releases the GIL.  Within a trial execution is strictly sequential in
trial order, and output slots are disjoint per trial, so results are
bit-identical across worker counts and chunk sizes.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EventOutOfRangeError, PortfolioInvalidError
from ..model import (
    FinancialTerms,
    Layer,
    LayerTerms,
    Trial,
    YearEventTable,
    YearLossTable,
    validate_portfolio,
)
from ..tables import DirectAccessTable, TableSet, memory_footprint
from . import _fallback

try:  # compiled core is optional; the fallback covers every contract
    from . import _kernel

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _kernel = None
    HAVE_COMPILED = False

UNCHUNKED = None
"""Chunk-size value selecting the fused single-pass execution path."""

DEFAULT_CHUNK_SIZE = 4

_FORCE_PYTHON = os.environ.get("AGGRISK_PURE_PYTHON", "") not in ("", "0")
DEFAULT_BACKEND = "compiled" if (HAVE_COMPILED and not _FORCE_PYTHON) else "python"


def resolve_backend(name: str = "auto") -> str:
    """Map a backend request to the module that will run ("compiled"/"python")."""
    if name == "auto":
        return DEFAULT_BACKEND
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel not built; install with the extension or use backend='python'")
        return "compiled"
    if name == "python":
        return "python"
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class EngineConfig:
    """Execution knobs; the defaults ship chunked at size 4 on one worker."""

    worker_count: int = 1
    chunk_size: int | None = DEFAULT_CHUNK_SIZE
    deterministic: bool = True
    backend: str = "auto"

    def __post_init__(self):
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if self.chunk_size is not None and self.chunk_size < 1:
            raise ValueError("chunk_size must be >= 1 or None for unchunked")
        if not self.deterministic:
            raise ValueError("nondeterministic execution is not supported")
        resolve_backend(self.backend)


@dataclass
class RunStats:
    """Counters and timings for one analysis run (timings exclude validation)."""

    trials: int = 0
    layers: int = 0
    lookups: int = 0
    sim_seconds: float = 0.0
    build_seconds: float = 0.0
    peak_table_bytes: int = 0

    @property
    def trials_per_sec(self) -> float:
        done = self.trials * self.layers
        return done / self.sim_seconds if self.sim_seconds > 0 else float("inf")


def apply_financial_terms(loss: float, terms: FinancialTerms) -> float:
    """Per-event transformation: currency scale, retention, limit, share."""
    net = min(max(terms.exchange_rate * loss - terms.event_retention, 0.0), terms.event_limit)
    out = terms.share * net
    assert out >= 0.0
    return out


def apply_occurrence_terms(loss: float, terms: LayerTerms) -> float:
    """Occurrence retention/limit on one combined event loss."""
    out = min(max(loss - terms.occ_retention, 0.0), terms.occ_limit)
    assert out >= 0.0
    return out


def apply_aggregate_terms(occ_losses: Sequence[float], terms: LayerTerms) -> float:
    """Aggregate retention/limit over a trial's occurrence-net losses.

    Runs the cumulative-sum form: prefix sums, clamp each against the
    aggregate terms, difference consecutive clamped values (first against 0),
    and sum the differences.  The telescoped closed form
    ``min(max(sum - agg_retention, 0), agg_limit)`` is asserted in debug runs.
    """
    losses = np.asarray(occ_losses, dtype=np.float64)
    if losses.size == 0:
        return 0.0
    prefix = np.add.accumulate(losses)
    capped = np.minimum(np.maximum(prefix - terms.agg_retention, 0.0), terms.agg_limit)
    diffs = np.empty_like(capped)
    diffs[0] = capped[0]
    np.subtract(capped[1:], capped[:-1], out=diffs[1:])
    result = float(np.add.accumulate(diffs)[-1])
    if __debug__:
        closed = min(max(float(prefix[-1]) - terms.agg_retention, 0.0), terms.agg_limit)
        assert abs(result - closed) <= 1e-9 * max(1.0, abs(closed))
    return result


def _backend_module(name: str):
    return _kernel if resolve_backend(name) == "compiled" else _fallback


def _split_by_events(offsets: np.ndarray, parts: int) -> list[tuple[int, int]]:
    """Trial-range batches with roughly equal occurrence counts."""
    n = offsets.shape[0] - 1
    parts = max(1, min(parts, n))
    total = int(offsets[-1])
    targets = [round(total * k / parts) for k in range(1, parts)]
    cuts = np.searchsorted(offsets, targets, side="left").tolist()
    bounds = sorted(set([0] + [int(c) for c in cuts] + [n]))
    return [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1) if bounds[i] < bounds[i + 1]]


def _run_layer(
    yet: YearEventTable,
    tset: TableSet,
    selection: Sequence[int] | None,
    terms: LayerTerms,
    cfg: EngineConfig,
    out: np.ndarray,
    pool: ThreadPoolExecutor | None = None,
) -> int:
    """Fill ``out`` with per-trial losses for one layer; returns lookup count."""
    backend = _backend_module(cfg.backend)
    sel, rate, ret, lim, share = tset.selection_arrays(selection)
    chunk = 0 if cfg.chunk_size is None else int(cfg.chunk_size)
    n = yet.trial_count
    if n == 0:
        return 0

    def task(t0: int, t1: int) -> int:
        if backend is _fallback:
            lens = np.diff(yet.offsets[t0 : t1 + 1])
            scratch = _fallback.TrialScratch(int(lens.max()) if lens.size else 1)
        else:
            scratch = np.empty(max(chunk, 1), dtype=np.float64)
        return backend.run_trials(
            yet.event_ids, yet.offsets, tset.stacked, sel,
            rate, ret, lim, share,
            terms.occ_retention, terms.occ_limit,
            terms.agg_retention, terms.agg_limit,
            chunk, t0, t1, out, scratch,
        )

    if cfg.worker_count == 1:
        return task(0, n)
    batches = _split_by_events(yet.offsets, cfg.worker_count * 4)
    if pool is None:
        with ThreadPoolExecutor(max_workers=cfg.worker_count) as ex:
            counts = list(ex.map(lambda b: task(*b), batches))
    else:
        counts = list(pool.map(lambda b: task(*b), batches))
    return sum(counts)


def price_layer(
    yet: YearEventTable,
    tset: TableSet,
    selection: Sequence[int] | None,
    terms: LayerTerms,
    cfg: EngineConfig | None = None,
    pool: ThreadPoolExecutor | None = None,
) -> tuple[np.ndarray, int]:
    """Trial losses for ad-hoc terms over prebuilt tables; no table rebuild.

    ``selection`` picks a subset of the table set by index (None means all).
    Returns the loss vector and the lookup count.  This is the interactive
    path: the table set is built once elsewhere and reused across calls.
    """
    cfg = cfg or EngineConfig()
    out = np.empty(yet.trial_count, dtype=np.float64)
    lookups = _run_layer(yet, tset, selection, terms, cfg, out, pool)
    return out, lookups


def run_aggregate_analysis_with_stats(
    layers: Sequence[Layer],
    yet: YearEventTable,
    cfg: EngineConfig | None = None,
    pool: ThreadPoolExecutor | None = None,
) -> tuple[list[YearLossTable], RunStats]:
    """Run every layer over every trial, returning counters and timings too.

    Validates first and refuses invalid portfolios.  Layers run as an outer
    sequential loop so at most one layer's tables are resident at a time;
    parallelism lives at the trial level.
    """
    cfg = cfg or EngineConfig()
    violations = validate_portfolio(layers, yet)
    if violations:
        raise PortfolioInvalidError(violations)
    stats = RunStats(trials=yet.trial_count, layers=len(layers))
    ylts: list[YearLossTable] = []
    for layer in layers:
        t0 = time.perf_counter()
        tset = TableSet.from_elts(layer.elts, yet.catalog_size)
        stats.build_seconds += time.perf_counter() - t0
        stats.peak_table_bytes = max(
            stats.peak_table_bytes, memory_footprint(tset.tables).total_bytes
        )
        t0 = time.perf_counter()
        out = np.empty(yet.trial_count, dtype=np.float64)
        stats.lookups += _run_layer(yet, tset, None, layer.terms, cfg, out, pool)
        stats.sim_seconds += time.perf_counter() - t0
        ylts.append(YearLossTable(layer.id, out))
    return ylts, stats


def run_aggregate_analysis(
    layers: Sequence[Layer],
    yet: YearEventTable,
    cfg: EngineConfig | None = None,
) -> list[YearLossTable]:
    """Year loss table per layer; see :func:`run_aggregate_analysis_with_stats`."""
    return run_aggregate_analysis_with_stats(layers, yet, cfg)[0]


def run_chunked(
    layers: Sequence[Layer],
    yet: YearEventTable,
    cfg: EngineConfig | None = None,
) -> list[YearLossTable]:
    """Chunked execution path; requires a chunk size in the config."""
    cfg = cfg or EngineConfig()
    if cfg.chunk_size is None:
        raise ValueError("run_chunked requires cfg.chunk_size")
    return run_aggregate_analysis(layers, yet, cfg)


def analyse_trial(
    trial: Trial,
    layer: Layer,
    tables: TableSet | Sequence[DirectAccessTable] | None = None,
    cfg: EngineConfig | None = None,
) -> float:
    """Net loss of a single trial under one layer.

    ``tables`` must be the direct access tables of ``layer.elts`` (index
    aligned); they are built on the fly when omitted.
    """
    cfg = cfg or EngineConfig()
    if tables is None:
        tset = TableSet.from_elts(layer.elts)
    elif isinstance(tables, TableSet):
        tset = tables
    else:
        tset = TableSet.from_tables(list(tables))
    if len(tset) != len(layer.elts):
        raise ValueError("tables not aligned with layer elts")
    ids = trial.event_ids
    if ids.size and (int(ids.min()) < 1 or int(ids.max()) > tset.catalog_size):
        bad = ids[(ids < 1) | (ids > tset.catalog_size)][0]
        raise EventOutOfRangeError(
            f"event {int(bad)} outside catalog 1..{tset.catalog_size}"
        )
    offsets = np.array([0, ids.size], dtype=np.int64)
    out = np.zeros(1, dtype=np.float64)
    backend = _backend_module(cfg.backend)
    sel, rate, ret, lim, share = tset.selection_arrays(None)
    chunk = 0 if cfg.chunk_size is None else int(cfg.chunk_size)
    if backend is _fallback:
        scratch = _fallback.TrialScratch(max(int(ids.size), 1))
    else:
        scratch = np.empty(max(chunk, 1), dtype=np.float64)
    backend.run_trials(
        np.ascontiguousarray(ids, dtype=np.uint32), offsets, tset.stacked, sel,
        rate, ret, lim, share,
        layer.terms.occ_retention, layer.terms.occ_limit,
        layer.terms.agg_retention, layer.terms.agg_limit,
        chunk, 0, 1, out, scratch,
    )
    return float(out[0])
