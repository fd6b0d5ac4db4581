"""Scaling benchmarks: size sweeps with linearity fits, worker speedups.

Problem size is set by four parameters (trial count, events per trial,
ELTs per layer, layer count) and runtime is expected to scale linearly in
each; a sweep measures one of them and reports a least-squares R².  The
worker sweep reports speedups against one worker next to the reference
machine's published curve.  Default shapes are desk scale, roughly 10-50x
below the full experiment sizes, so a sweep finishes in about a minute.

Timing covers the simulation stage only: generation, validation, and
direct-table builds are excluded, matching how the analysis stage is timed
separately from data preparation.  Points are measured in interleaved
rounds and the per-point minimum is kept, so a slow spell on a shared
machine inflates one whole round instead of skewing a single point.
"""

from __future__ import annotations

import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence
from urllib.parse import quote, unquote

import numpy as np

from . import engine
from .engine import EngineConfig, run_aggregate_analysis_with_stats
from .errors import DataFormatError, FormatMismatchError
from .generate import GeneratorSpec, generate_elt, generate_layer, generate_yet
from .model import Layer, LayerTerms, YearEventTable

REFERENCE_SPEEDUPS = {2: 1.5, 4: 2.2, 8: 2.6}
"""Published multi-core speedups on the reference machine, for comparison."""

SWEEP_NAMES = (
    "trials", "events_per_trial", "elts_per_layer", "layers",
    "workers", "chunk_size", "backend",
)

_DEFAULT_POINTS: dict[str, list] = {
    "trials": [20_000, 40_000, 60_000, 80_000, 100_000],
    "events_per_trial": [800, 900, 1000, 1100, 1200],
    "elts_per_layer": [3, 6, 9, 12, 15],
    "layers": [1, 2, 3, 4, 5],
    "workers": [1, 2, 4, 8],
    "chunk_size": [1, 4, 12, 0],
    "backend": ["compiled", "python"],
}


@dataclass(frozen=True)
class SamplePoint:
    value: object
    wall_seconds: float
    lookups: int = 0

    @property
    def lookups_per_sec(self) -> float:
        return self.lookups / self.wall_seconds if self.wall_seconds > 0 else 0.0


@dataclass
class BenchReport:
    sweep: str
    points: list[SamplePoint]
    environment: dict[str, str] = field(default_factory=dict)
    r_squared: float | None = None
    speedups: dict[int, float] | None = None
    reference_speedups: dict[int, float] | None = None

    def validate(self) -> None:
        if len(self.points) < 3 and self.sweep not in ("backend",):
            raise ValueError("a sweep needs at least 3 sample points")
        if any(p.wall_seconds <= 0 for p in self.points):
            raise ValueError("wall_seconds must be positive")


def environment_descriptor() -> dict[str, str]:
    env = {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(terse=True),
        "machine": platform.machine(),
        "backend_default": engine.DEFAULT_BACKEND,
    }
    try:
        import psutil

        env["cpus_logical"] = str(psutil.cpu_count(logical=True))
        env["cpus_physical"] = str(psutil.cpu_count(logical=False))
    except ImportError:  # pragma: no cover - psutil is a hard dep in practice
        import os

        env["cpus_logical"] = str(os.cpu_count())
    return env


def linear_fit_r2(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through the sample points: (slope, intercept, R²)."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape[0] < 2:
        raise ValueError("need at least two points to fit")
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def _run_plan(
    plan: Sequence[tuple[object, Callable[[], tuple[Sequence[Layer], object, EngineConfig]]]],
    repeats: int,
    say: Callable[[str], None],
) -> list[SamplePoint]:
    """Interleaved rounds, minimum per point.

    Every round measures each point once, in order, and the smallest time
    per point across rounds is kept.  Scheduler noise only ever adds time,
    so the minimum is the robust estimator; interleaving means a slow spell
    inflates all points of one round rather than a single point's samples.
    """
    best: dict = {}
    looks: dict = {}
    rounds = max(1, repeats)
    for r in range(rounds):
        say(f"round {r + 1}/{rounds}")
        for value, make in plan:
            layers, yet, cfg = make()
            _, stats = run_aggregate_analysis_with_stats(layers, yet, cfg)
            if value not in best or stats.sim_seconds < best[value]:
                best[value] = stats.sim_seconds
            looks[value] = stats.lookups
    samples = []
    for value, _make in plan:
        say(f"{value}: {best[value]:.3f}s")
        samples.append(SamplePoint(value, best[value], looks[value]))
    return samples


def _flat_layer(elts, layer_id: str = "bench") -> Layer:
    return Layer(layer_id, tuple(elts), LayerTerms())


def _event_prefix(yet: YearEventTable, full: int, keep: int) -> YearEventTable:
    """First ``keep`` of exactly ``full`` occurrences per trial, one gather.

    Copies even at keep == full so every point runs on an equally fresh
    allocation.
    """
    ids = yet.event_ids.reshape(-1, full)[:, :keep].copy().ravel()
    ts = yet.timestamps.reshape(-1, full)[:, :keep].copy().ravel()
    offsets = np.arange(yet.trial_count + 1, dtype=np.int64) * keep
    return YearEventTable(yet.catalog_size, ids, ts, offsets)


def run_sweep(
    sweep: str,
    points: Sequence | None = None,
    *,
    seed: int = 7,
    repeats: int = 3,
    base: GeneratorSpec | None = None,
    progress: Callable[[str], None] | None = None,
) -> BenchReport:
    """Measure one sweep and derive its fit or speedup table."""
    if sweep not in SWEEP_NAMES:
        raise ValueError(f"unknown sweep {sweep!r}; one of {', '.join(SWEEP_NAMES)}")
    values = list(points) if points is not None else list(_DEFAULT_POINTS[sweep])
    if len(values) < (2 if sweep == "backend" else 3):
        raise ValueError("too few sweep points")
    say = progress or (lambda _msg: None)

    # One desk-scale base shape; individual sweeps override one axis.
    base = base or GeneratorSpec(
        seed=seed,
        catalog_size=50_000,
        trial_count=20_000,
        events_per_trial_range=(1000, 1000),
        elt_count=15,
        elt_size_range=(10_000, 30_000),
    )
    cfg = EngineConfig()
    plan: list[tuple[object, Callable]] = []

    if sweep == "trials":
        spec = GeneratorSpec(
            **{**base.__dict__, "trial_count": int(max(values)), "elt_count": 6}
        )
        say(f"generating {spec.trial_count} trials once, slicing per point")
        yet = generate_yet(spec)
        elts = [generate_elt(spec, i) for i in range(spec.elt_count)]
        layer = _flat_layer(elts)
        for v in sorted(int(v) for v in values):
            plan.append((v, lambda v=v: ([layer], yet.head(v), cfg)))
    elif sweep == "events_per_trial":
        # this axis only spans 1.5x end to end, so double the trials and
        # generate one fixed-length table at the longest setting; points
        # then slice per-trial prefixes instead of regenerating
        vs = sorted(int(v) for v in values)
        spec = GeneratorSpec(**{
            **base.__dict__,
            "events_per_trial_range": (vs[-1], vs[-1]),
            "trial_count": base.trial_count * 2,
        })
        say(f"generating {vs[-1]} events/trial once, slicing per point")
        yet_full = generate_yet(spec)
        elts = [generate_elt(spec, i) for i in range(spec.elt_count)]
        layer = _flat_layer(elts)
        for v in vs:
            plan.append(
                (v, lambda v=v: ([layer], _event_prefix(yet_full, vs[-1], v), cfg))
            )
    elif sweep == "elts_per_layer":
        spec = GeneratorSpec(**{**base.__dict__, "elt_count": int(max(values))})
        yet = generate_yet(spec)
        elts = [generate_elt(spec, i) for i in range(spec.elt_count)]
        for v in sorted(int(v) for v in values):
            plan.append((v, lambda v=v: ([_flat_layer(elts[:v])], yet, cfg)))
    elif sweep == "layers":
        spec = GeneratorSpec(**{**base.__dict__, "elt_count": 3})
        yet = generate_yet(spec)
        elts = [generate_elt(spec, i) for i in range(spec.elt_count)]
        for v in sorted(int(v) for v in values):
            plan.append((
                v,
                lambda v=v: (
                    [_flat_layer(elts, f"bench-{i}") for i in range(v)], yet, cfg
                ),
            ))
    elif sweep == "workers":
        spec = base
        yet = generate_yet(spec)
        elts = [generate_elt(spec, i) for i in range(spec.elt_count)]
        layer = _flat_layer(elts)
        for v in sorted(int(v) for v in values):
            wcfg = EngineConfig(worker_count=v, chunk_size=cfg.chunk_size)
            plan.append((v, lambda wcfg=wcfg: ([layer], yet, wcfg)))
    elif sweep == "chunk_size":
        spec = GeneratorSpec(**{**base.__dict__, "elt_count": 3})
        yet = generate_yet(spec)
        elts = [generate_elt(spec, i) for i in range(spec.elt_count)]
        layer = _flat_layer(elts)
        for v in (int(v) for v in values):
            ccfg = EngineConfig(chunk_size=None if v == 0 else v)
            plan.append((v, lambda ccfg=ccfg: ([layer], yet, ccfg)))
    else:  # backend
        spec = GeneratorSpec(**{**base.__dict__, "elt_count": 3})
        yet = generate_yet(spec)
        elts = [generate_elt(spec, i) for i in range(spec.elt_count)]
        layer = _flat_layer(elts)
        for v in values:
            name = str(v)
            if name == "compiled" and not engine.HAVE_COMPILED:
                say("compiled backend unavailable, skipping")
                continue
            # fused path on both sides: compares raw backend throughput,
            # not the fallback's block-staging overhead at small chunks
            bcfg = EngineConfig(chunk_size=None, backend=name)
            plan.append((name, lambda bcfg=bcfg: ([layer], yet, bcfg)))

    samples = _run_plan(plan, repeats, say)

    report = BenchReport(sweep=sweep, points=samples, environment=environment_descriptor())
    if sweep in ("trials", "events_per_trial", "elts_per_layer", "layers"):
        _, _, r2 = linear_fit_r2(
            [float(p.value) for p in samples], [p.wall_seconds for p in samples]
        )
        report.r_squared = r2
    elif sweep == "workers":
        base_time = next(p.wall_seconds for p in samples if int(p.value) == 1)
        report.speedups = {int(p.value): base_time / p.wall_seconds for p in samples}
        report.reference_speedups = dict(REFERENCE_SPEEDUPS)
    report.validate()
    return report


# -------------------------------------------------------------- reporting ---


def save_report(report: BenchReport, path) -> None:
    """Tabular report file: metadata lines, then one sample row per line."""
    lines = [f"# are1 bench version=1 sweep={report.sweep}"]
    meta = []
    if report.r_squared is not None:
        meta.append(f"r_squared={report.r_squared:.6f}")
    if report.speedups:
        meta.extend(f"speedup_{k}={v:.4f}" for k, v in sorted(report.speedups.items()))
    if report.reference_speedups:
        meta.extend(
            f"reference_speedup_{k}={v}" for k, v in sorted(report.reference_speedups.items())
        )
    if meta:
        lines[0] += " " + " ".join(meta)
    for k, v in sorted(report.environment.items()):
        lines.append(f"# env {k}={quote(str(v), safe='')}")
    lines.append("value,wall_seconds,lookups")
    for p in report.points:
        lines.append(f"{p.value},{p.wall_seconds:.6f},{p.lookups}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_report(path) -> BenchReport:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith("# are1 bench"):
        raise FormatMismatchError(f"{path}: not a bench report")
    head = dict(
        tok.split("=", 1) for tok in text[0].split()[3:] if "=" in tok
    )
    env = {}
    rows = []
    for line in text[1:]:
        if line.startswith("# env "):
            k, v = line[len("# env ") :].split("=", 1)
            env[k] = unquote(v)
        elif line and not line.startswith("#") and not line.startswith("value,"):
            parts = line.split(",")
            if len(parts) != 3:
                raise DataFormatError(f"{path}: bad sample row {line!r}")
            value = int(parts[0]) if parts[0].lstrip("-").isdigit() else parts[0]
            rows.append(SamplePoint(value, float(parts[1]), int(parts[2])))
    sweep = head.get("sweep", "")
    report = BenchReport(sweep=sweep, points=rows, environment=env)
    if "r_squared" in head:
        report.r_squared = float(head["r_squared"])
    speedups = {
        int(k.split("_")[1]): float(v) for k, v in head.items() if k.startswith("speedup_")
    }
    if speedups:
        report.speedups = speedups
        report.reference_speedups = {
            int(k.split("_")[2]): float(v)
            for k, v in head.items()
            if k.startswith("reference_speedup_")
        }
    return report


def format_report(report: BenchReport) -> str:
    """Human summary for standard output."""
    out = [f"sweep: {report.sweep}"]
    for p in report.points:
        rate = f"  ({p.lookups_per_sec / 1e6:.1f}M lookups/s)" if p.lookups else ""
        out.append(f"  {report.sweep}={p.value}: {p.wall_seconds:.3f}s{rate}")
    if report.r_squared is not None:
        out.append(f"linear fit R^2 = {report.r_squared:.4f}")
    if report.speedups:
        out.append("speedup vs 1 worker (reference machine in parentheses):")
        for k in sorted(report.speedups):
            ref = (report.reference_speedups or {}).get(k)
            ref_txt = f" (reference {ref}x)" if ref else ""
            out.append(f"  {k} workers: {report.speedups[k]:.2f}x{ref_txt}")
    env = ", ".join(f"{k}={v}" for k, v in sorted(report.environment.items()))
    out.append(f"environment: {env}")
    return "\n".join(out)
