"""Command-line front end: gen, run, metrics, bench, serve.

Exit codes: 0 success, 2 argument errors (argparse), 3 validation errors,
4 I/O and file-format errors.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import bench as bench_mod
from . import io as aio
from .engine import EngineConfig, run_aggregate_analysis_with_stats
from .errors import DataFormatError, PortfolioInvalidError
from .generate import GeneratorSpec, generate_portfolio
from .metrics import ep_curve, pml, tvar

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_VALIDATION = 3
EXIT_IO = 4


def _fmt_bytes(n: int) -> str:
    if n >= 1 << 30:
        return f"{n / (1 << 30):.2f} GiB"
    if n >= 1 << 20:
        return f"{n / (1 << 20):.2f} MiB"
    return f"{n} B"


def cmd_gen(args) -> int:
    spec = GeneratorSpec(
        seed=args.seed,
        catalog_size=args.catalog,
        trial_count=args.trials,
        events_per_trial_range=tuple(args.events),
        elt_count=args.elts,
        elt_size_range=tuple(args.elt_size),
        loss_scale=args.loss_scale,
        layer_count=args.layers,
        elts_per_layer=args.elts_per_layer,
    )
    spec.validate()
    t0 = time.perf_counter()
    yet, elts, layers = generate_portfolio(spec)
    written = aio.save_dataset(args.out, yet, layers, elts, format=args.format)
    dt = time.perf_counter() - t0
    total = int(yet.offsets[-1])
    print(f"wrote {len(written)} files to {args.out} in {dt:.2f}s")
    print(f"trials: {yet.trial_count}  occurrences: {total}  "
          f"catalog: {yet.catalog_size}  elts: {len(elts)}  layers: {len(layers)}")
    return EXIT_OK


def cmd_run(args) -> int:
    yet, layers = aio.load_dataset(args.data)
    cfg = EngineConfig(
        worker_count=args.workers,
        chunk_size=None if args.chunk == 0 else args.chunk,
        backend=args.backend,
    )
    ylts, stats = run_aggregate_analysis_with_stats(layers, yet, cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ext = "are1" if args.format == "binary" else "csv"
    for i, ylt in enumerate(ylts):
        aio.save_ylt(ylt, out_dir / f"ylt_{i:03d}.{ext}", format=args.format)
    print(f"wrote {len(ylts)} year loss tables to {out_dir}")
    print(f"trials: {stats.trials}  layers: {stats.layers}")
    print(f"simulation: {stats.sim_seconds:.3f}s  ({stats.trials_per_sec:,.0f} trials/s)")
    print(f"table build: {stats.build_seconds:.3f}s")
    print(f"lookups: {stats.lookups:,}")
    print(f"peak table memory: {_fmt_bytes(stats.peak_table_bytes)} "
          f"({stats.peak_table_bytes} bytes)")
    return EXIT_OK


def cmd_metrics(args) -> int:
    ylt = aio.load_ylt(args.ylt)
    rps = args.rp
    print(f"layer: {ylt.layer_id}  trials: {ylt.losses.shape[0]}")
    print(f"{'return period':>14}  {'probability':>11}  {'pml':>16}  {'tvar':>16}")
    for rp in rps:
        p = pml(ylt, rp)
        t = tvar(ylt, rp)
        print(f"{rp:>14g}  {1.0 / rp:>11.6f}  {p:>16,.2f}  {t:>16,.2f}")
    if args.ep_out:
        curve = ep_curve(ylt, rps)
        lines = ["# are1 epcurve version=1", "loss,exceedance_probability"]
        lines += [f"{l:.17g},{p:.17g}" for l, p in curve]
        Path(args.ep_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        print(f"wrote EP curve to {args.ep_out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    points = None
    if args.points:
        points = [int(p) if p.lstrip("-").isdigit() else p for p in args.points]
    report = bench_mod.run_sweep(
        args.sweep,
        points,
        seed=args.seed,
        repeats=args.repeats,
        progress=lambda msg: print(f"  {msg}", file=sys.stderr),
    )
    print(bench_mod.format_report(report))
    if args.out:
        bench_mod.save_report(report, args.out)
        print(f"wrote report to {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        session_cap=args.session_cap,
        engine_workers=args.workers,
        data_root=args.data_root,
        static_dir=args.static,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aggrisk",
        description="aggregate risk analysis: generate, simulate, measure, serve",
    )
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--catalog", type=int, default=100_000)
    g.add_argument("--trials", type=int, default=10_000)
    g.add_argument("--events", type=int, nargs=2, default=(800, 1500),
                   metavar=("MIN", "MAX"))
    g.add_argument("--elts", type=int, default=15)
    g.add_argument("--elt-size", type=int, nargs=2, default=(10_000, 30_000),
                   metavar=("MIN", "MAX"))
    g.add_argument("--loss-scale", type=float, default=1000.0)
    g.add_argument("--layers", type=int, default=1)
    g.add_argument("--elts-per-layer", type=int, default=None)
    g.add_argument("--format", choices=("binary", "tabular"), default="binary")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run the aggregate analysis over a dataset")
    r.add_argument("--data", required=True, help="dataset directory (yet.* plus layer_*.*)")
    r.add_argument("--out", required=True, help="directory for year loss tables")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--chunk", type=int, default=4, help="events per chunk; 0 = unchunked")
    r.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto")
    r.add_argument("--format", choices=("binary", "tabular"), default="binary")
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("metrics", help="PML and TVAR from a year loss table")
    m.add_argument("--ylt", required=True, help="year loss table file")
    m.add_argument("--rp", type=float, nargs="+", default=[10.0, 50.0, 100.0, 250.0],
                   help="return periods")
    m.add_argument("--ep-out", default=None, help="write the EP curve to this file")
    m.set_defaults(func=cmd_metrics)

    b = sub.add_parser("bench", help="scaling sweeps with linearity fits")
    b.add_argument("--sweep", required=True, choices=bench_mod.SWEEP_NAMES)
    b.add_argument("--points", nargs="+", default=None,
                   help="sweep values (0 means unchunked for chunk_size)")
    b.add_argument("--repeats", type=int, default=3,
                   help="measurement rounds per point; the minimum is kept")
    b.add_argument("--seed", type=int, default=7)
    b.add_argument("--out", default=None, help="report file path")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("serve", help="run the interactive pricing service")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=8321)
    s.add_argument("--session-cap", type=int, default=8)
    s.add_argument("--workers", type=int, default=1, help="engine workers per reprice")
    s.add_argument("--data-root", default=None,
                   help="restrict session data directories to this root")
    s.add_argument("--static", default=None, help="serve this directory at /")
    s.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PortfolioInvalidError as exc:
        print("validation failed:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
