"""Pure-NumPy trial kernel, used when the compiled core is unavailable.

Computes exactly what ``_kernel.run_trials`` computes, in the same
floating-point order: per occurrence the combined loss accumulates across
tables in selection order, and per trial the cumulative sum runs in trial
order via ``np.add.accumulate`` (sequential by definition).  The compiled
core is built without FP contraction, so the two backends agree bitwise.

Chunking here blocks only the elementwise stages (lookup, financial terms,
occurrence terms) through the reusable scratch; the aggregate stage is one
sequential accumulate per trial.  Splitting the accumulate at block
boundaries would re-associate additions and break the bit-identical-across-
chunk-sizes contract.
"""

from __future__ import annotations

import numpy as np


class TrialScratch:
    """Per-worker buffers reused across trials (no allocation in the loop).

    ``combined`` holds the per-occurrence loss accumulated across tables,
    then in place the occurrence-net values; ``gather``/``cumulative`` are
    staging space for table reads and the running sum.
    """

    def __init__(self, max_len: int):
        n = max(int(max_len), 1)
        self.gather = np.empty(n, dtype=np.float64)
        self.combined = np.empty(n, dtype=np.float64)
        self.cumulative = np.empty(n, dtype=np.float64)


def run_trials(
    event_ids: np.ndarray,
    offsets: np.ndarray,
    stacked: np.ndarray,
    rows: np.ndarray,
    fin_rate: np.ndarray,
    fin_ret: np.ndarray,
    fin_lim: np.ndarray,
    fin_share: np.ndarray,
    occ_ret: float,
    occ_lim: float,
    agg_ret: float,
    agg_lim: float,
    chunk: int,
    first_trial: int,
    last_trial: int,
    out: np.ndarray,
    scratch: TrialScratch | None = None,
) -> int:
    """Simulate trials [first_trial, last_trial); returns lookups performed."""
    table_rows = [stacked[r] for r in rows]  # views, one per selected table
    if scratch is None:
        lens = np.diff(offsets[first_trial : last_trial + 1])
        scratch = TrialScratch(int(lens.max()) if lens.size else 1)
    g_all, comb_all, cum_all = scratch.gather, scratch.combined, scratch.cumulative
    lookups = 0

    for t in range(first_trial, last_trial):
        lo, hi = int(offsets[t]), int(offsets[t + 1])
        n = hi - lo
        if n == 0:
            out[t] = min(max(0.0 - agg_ret, 0.0), agg_lim)
            continue
        comb = comb_all[:n]
        step = n if chunk <= 0 else int(chunk)
        for start in range(0, n, step):
            stop = min(start + step, n)
            ids = event_ids[lo + start : lo + stop]
            g = g_all[: stop - start]
            blk = comb[start:stop]
            blk[:] = 0.0
            for j, row in enumerate(table_rows):
                np.take(row, ids, out=g)
                np.multiply(g, fin_rate[j], out=g)
                np.subtract(g, fin_ret[j], out=g)
                np.maximum(g, 0.0, out=g)
                np.minimum(g, fin_lim[j], out=g)
                np.multiply(g, fin_share[j], out=g)
                blk += g
            lookups += (stop - start) * len(table_rows)
            np.subtract(blk, occ_ret, out=blk)
            np.maximum(blk, 0.0, out=blk)
            np.minimum(blk, occ_lim, out=blk)
        if __debug__:
            assert float(comb.min(initial=0.0)) >= 0.0
        cum = cum_all[:n]
        np.add.accumulate(comb, out=cum)
        total = float(cum[-1])
        out[t] = min(max(total - agg_ret, 0.0), agg_lim)
    return lookups
