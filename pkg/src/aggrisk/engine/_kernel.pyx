# Hot loop of the aggregate loss simulation, compiled.
#
# One call walks a contiguous range of trials and writes each trial's net
# loss into `out`.  Per occurrence: one dense-table read per selected table,
# the table's financial terms, accumulation across tables, occurrence
# retention/limit; per trial: running cumulative sum under the aggregate
# retention/limit.  The accumulation order (tables in selection order,
# occurrences in trial order) is fixed, so results are bit-identical for any
# worker partitioning and any chunk size.
#
# Releases the GIL for the whole range; callers run one invocation per
# worker thread over disjoint trial ranges.

DEF MAX_TABLES = 256


def run_trials(const unsigned int[::1] event_ids,
               const long long[::1] offsets,
               const double[:, ::1] stacked,
               const long long[::1] rows,
               const double[::1] fin_rate,
               const double[::1] fin_ret,
               const double[::1] fin_lim,
               const double[::1] fin_share,
               double occ_ret, double occ_lim,
               double agg_ret, double agg_lim,
               Py_ssize_t chunk,
               Py_ssize_t first_trial, Py_ssize_t last_trial,
               double[::1] out,
               double[::1] scratch):
    """Simulate trials [first_trial, last_trial) for one layer.

    `chunk` <= 0 runs the fused single-pass variant; a positive `chunk`
    stages blocks of that many occurrences through `scratch` (cache
    blocking), which must then hold at least `chunk` slots.  Returns the
    number of table lookups performed.
    """
    cdef Py_ssize_t n_tab = rows.shape[0]
    cdef const double* tab[MAX_TABLES]
    cdef double rate[MAX_TABLES]
    cdef double ret[MAX_TABLES]
    cdef double lim[MAX_TABLES]
    cdef double share[MAX_TABLES]
    cdef Py_ssize_t t, i, j, b, lo, hi, blk
    cdef double x, l, comb, occ, c, f
    cdef unsigned int e
    cdef long long lookups = 0

    if n_tab > MAX_TABLES:
        raise ValueError(f"kernel supports at most {MAX_TABLES} tables per layer, got {n_tab}")
    if chunk > 0 and scratch.shape[0] < chunk:
        raise ValueError("scratch smaller than chunk size")
    for j in range(n_tab):
        tab[j] = &stacked[rows[j], 0]
        rate[j] = fin_rate[j]
        ret[j] = fin_ret[j]
        lim[j] = fin_lim[j]
        share[j] = fin_share[j]

    with nogil:
        for t in range(first_trial, last_trial):
            lo = offsets[t]
            hi = offsets[t + 1]
            c = 0.0
            if chunk <= 0:
                for i in range(lo, hi):
                    e = event_ids[i]
                    comb = 0.0
                    for j in range(n_tab):
                        x = tab[j][e]
                        l = rate[j] * x - ret[j]
                        if l < 0.0:
                            l = 0.0
                        if l > lim[j]:
                            l = lim[j]
                        comb += share[j] * l
                    lookups += n_tab
                    occ = comb - occ_ret
                    if occ < 0.0:
                        occ = 0.0
                    if occ > occ_lim:
                        occ = occ_lim
                    c += occ
            else:
                i = lo
                while i < hi:
                    blk = hi - i
                    if blk > chunk:
                        blk = chunk
                    for b in range(blk):
                        e = event_ids[i + b]
                        comb = 0.0
                        for j in range(n_tab):
                            x = tab[j][e]
                            l = rate[j] * x - ret[j]
                            if l < 0.0:
                                l = 0.0
                            if l > lim[j]:
                                l = lim[j]
                            comb += share[j] * l
                        scratch[b] = comb
                    lookups += blk * n_tab
                    for b in range(blk):
                        occ = scratch[b] - occ_ret
                        if occ < 0.0:
                            occ = 0.0
                        if occ > occ_lim:
                            occ = occ_lim
                        scratch[b] = occ
                    for b in range(blk):
                        c += scratch[b]
                    i += blk
            f = c - agg_ret
            if f < 0.0:
                f = 0.0
            if f > agg_lim:
                f = agg_lim
            out[t] = f
    return lookups
