"""Interactive pricing service over HTTP with JSON payloads.

A session pins a year event table and its direct access tables in memory;
reprice requests then run the engine with new layer terms over the prebuilt
tables, so the only per-request work is the simulation itself.  ELT subset
selection is an index mask over the session's table set, never a rebuild.

Endpoints (exact field names in the repository README):

* ``POST /sessions``              create a session from a data directory or
                                  an inline generator spec
* ``GET /sessions``               list open sessions
* ``DELETE /sessions/{id}``       close a session, freeing its tables
* ``POST /sessions/{id}/reprice`` price one layer; body carries terms,
                                  ELT selection, return periods
* ``GET /health``                 liveness and engine build info

Unlimited is encoded as JSON ``null`` on the two limit fields.  The session
registry is the only mutable state and is lock-guarded; sessions above the
cap evict the least recently used one.
"""

from __future__ import annotations

import math
import secrets
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from . import engine, tables
from .engine import EngineConfig, price_layer
from .errors import DataFormatError
from .generate import GeneratorSpec, generate_portfolio
from .io import load_elt, load_layer, load_yet
from .metrics import ep_curve, pml, tvar
from .model import UNLIMITED, Layer, LayerTerms, YearEventTable, validate_portfolio
from .tables import TableSet, memory_footprint

DEFAULT_RETURN_PERIODS = [10.0, 50.0, 100.0, 250.0]


# ----------------------------------------------------------- wire models ---


class SpecBody(BaseModel):
    seed: int = 0
    catalog_size: int = 100_000
    trial_count: int = 10_000
    events_per_trial_range: tuple[int, int] = (800, 1500)
    elt_count: int = 15
    elt_size_range: tuple[int, int] = (10_000, 30_000)
    loss_scale: float = 1000.0


class CreateSessionBody(BaseModel):
    data_dir: str | None = None
    spec: SpecBody | None = None


class TermsBody(BaseModel):
    occ_retention: float = 0.0
    occ_limit: float | None = None
    agg_retention: float = 0.0
    agg_limit: float | None = None


class RepriceBody(BaseModel):
    terms: TermsBody = Field(default_factory=TermsBody)
    elt_selection: list[int] | None = None
    return_periods: list[float] = Field(default_factory=lambda: list(DEFAULT_RETURN_PERIODS))


# -------------------------------------------------------------- sessions ---


@dataclass
class Session:
    id: str
    yet: YearEventTable
    tset: TableSet
    created_at: float
    last_used: float = 0.0
    reprice_count: int = 0

    def summary(self) -> dict:
        return {
            "session_id": self.id,
            "trial_count": self.yet.trial_count,
            "catalog_size": self.yet.catalog_size,
            "elt_count": len(self.tset),
            "elts": [
                {"index": i, "record_count": t.nonzero_count}
                for i, t in enumerate(self.tset.tables)
            ],
            "table_bytes": memory_footprint(self.tset.tables).total_bytes,
            "created_at": self.created_at,
            "reprice_count": self.reprice_count,
        }


@dataclass
class SessionManager:
    session_cap: int = 8
    engine_workers: int = 1
    chunk_size: int | None = 4
    data_root: str | None = None
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)
    _sessions: dict[str, Session] = field(default_factory=dict, repr=False)
    _pool: ThreadPoolExecutor | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.session_cap < 1:
            raise ValueError("session_cap must be >= 1")
        if self.engine_workers > 1:
            self._pool = ThreadPoolExecutor(
                max_workers=self.engine_workers, thread_name_prefix="aggrisk-engine"
            )

    @property
    def config(self) -> EngineConfig:
        return EngineConfig(worker_count=self.engine_workers, chunk_size=self.chunk_size)

    def _resolve_dir(self, data_dir: str) -> Path:
        if self.data_root is None:
            return Path(data_dir)
        root = Path(self.data_root).resolve()
        p = (root / data_dir).resolve()
        if root != p and root not in p.parents:
            raise HTTPException(400, detail=f"data_dir escapes the data root: {data_dir}")
        return p

    def _load_source(self, body: CreateSessionBody):
        if (body.data_dir is None) == (body.spec is None):
            raise HTTPException(400, detail="provide exactly one of data_dir or spec")
        if body.spec is not None:
            spec = GeneratorSpec(**body.spec.model_dump())
            try:
                spec.validate()
            except ValueError as exc:
                raise HTTPException(400, detail=f"invalid generator spec: {exc}") from exc
            yet, elts, _layers = generate_portfolio(spec)
            return yet, elts
        d = self._resolve_dir(body.data_dir)
        if not d.is_dir():
            raise HTTPException(400, detail=f"not a directory: {body.data_dir}")
        try:
            yet_paths = sorted(d.glob("yet.*"))
            if not yet_paths:
                raise HTTPException(400, detail=f"no yet.* file in {body.data_dir}")
            yet = load_yet(yet_paths[0])
            elts = [load_elt(p) for p in sorted(d.glob("elt_*.*"))]
            if not elts:
                for p in sorted(d.glob("layer_*.*")):
                    elts.extend(load_layer(p).elts)
            if not elts:
                raise HTTPException(
                    400, detail=f"no elt_*.* or layer_*.* files in {body.data_dir}"
                )
        except (DataFormatError, OSError) as exc:
            raise HTTPException(400, detail=f"failed to load data: {exc}") from exc
        return yet, elts

    def create(self, body: CreateSessionBody) -> dict:
        yet, elts = self._load_source(body)
        probe = Layer("session", tuple(elts), LayerTerms())
        violations = validate_portfolio([probe], yet)
        if violations:
            raise HTTPException(400, detail={
                "message": "portfolio validation failed",
                "violations": [str(v) for v in violations[:20]],
            })
        tset = TableSet.from_elts(elts, yet.catalog_size)
        now = time.time()
        session = Session(
            id=secrets.token_hex(8), yet=yet, tset=tset, created_at=now, last_used=now
        )
        with self._lock:
            while len(self._sessions) >= self.session_cap:
                victim = min(self._sessions.values(), key=lambda s: s.last_used)
                del self._sessions[victim.id]
            self._sessions[session.id] = session
        return session.summary()

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise HTTPException(404, detail=f"no such session: {session_id}")
            session.last_used = time.time()
            return session

    def close(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._sessions:
                raise HTTPException(404, detail=f"no such session: {session_id}")
            del self._sessions[session_id]

    def list(self) -> list[dict]:
        with self._lock:
            sessions = sorted(self._sessions.values(), key=lambda s: s.created_at)
            return [s.summary() for s in sessions]

    def count(self) -> int:
        with self._lock:
            return len(self._sessions)

    def reprice(self, session_id: str, body: RepriceBody) -> dict:
        session = self.get(session_id)
        terms = _parse_terms(body.terms)
        selection = _parse_selection(body.elt_selection, len(session.tset))
        rps = _parse_return_periods(body.return_periods, session.yet.trial_count)
        t0 = time.perf_counter()
        losses, lookups = price_layer(
            session.yet, session.tset, selection, terms, self.config, self._pool
        )
        engine_seconds = time.perf_counter() - t0
        metrics = [
            {"return_period": rp, "pml": pml(losses, rp), "tvar": tvar(losses, rp)}
            for rp in rps
        ]
        curve = ep_curve(losses, rps)
        with self._lock:
            session.reprice_count += 1
        return {
            "session_id": session.id,
            "trial_count": int(losses.shape[0]),
            "metrics": metrics,
            "ep_curve": [
                {"loss": l, "exceedance_probability": p} for l, p in curve
            ],
            "trial_mean": float(losses.mean()),
            "trial_max": float(losses.max()),
            "lookups": lookups,
            "engine_seconds": engine_seconds,
        }


def _parse_terms(body: TermsBody) -> LayerTerms:
    def _field(name: str, value: float | None, unlimited_ok: bool) -> float:
        if value is None:
            if not unlimited_ok:
                raise HTTPException(400, detail=f"{name} must be a number")
            return UNLIMITED
        v = float(value)
        if math.isnan(v) or v < 0:
            raise HTTPException(400, detail=f"{name} must be >= 0")
        if math.isinf(v) and not unlimited_ok:
            raise HTTPException(400, detail=f"{name} must be finite")
        return v

    return LayerTerms(
        occ_retention=_field("occ_retention", body.occ_retention, False),
        occ_limit=_field("occ_limit", body.occ_limit, True),
        agg_retention=_field("agg_retention", body.agg_retention, False),
        agg_limit=_field("agg_limit", body.agg_limit, True),
    )


def _parse_selection(selection: list[int] | None, table_count: int) -> list[int] | None:
    if selection is None:
        return None
    if not selection:
        raise HTTPException(400, detail="elt_selection must be non-empty")
    picked = sorted(set(int(i) for i in selection))
    if picked[0] < 0 or picked[-1] >= table_count:
        raise HTTPException(
            400, detail=f"elt_selection indices must be in [0, {table_count - 1}]"
        )
    return picked


def _parse_return_periods(rps: list[float], trial_count: int) -> list[float]:
    if not rps:
        raise HTTPException(400, detail="return_periods must be non-empty")
    out = []
    for rp in rps:
        v = float(rp)
        if math.isnan(v) or not 1.0 < v <= trial_count:
            raise HTTPException(
                400,
                detail=f"return period {rp} outside (1, {trial_count}]",
            )
        out.append(v)
    return out


# ------------------------------------------------------------------- app ---


def create_app(
    session_cap: int = 8,
    engine_workers: int = 1,
    chunk_size: int | None = 4,
    data_root: str | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    """Build the service; state lives in the returned app only."""
    app = FastAPI(title="aggrisk pricing service", version="1.0")
    manager = SessionManager(
        session_cap=session_cap,
        engine_workers=engine_workers,
        chunk_size=chunk_size,
        data_root=data_root,
    )
    app.state.manager = manager

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        return manager.create(body)

    @app.get("/sessions")
    def list_sessions() -> dict:
        return {"sessions": manager.list()}

    @app.delete("/sessions/{session_id}", status_code=204)
    def close_session(session_id: str) -> Response:
        manager.close(session_id)
        return Response(status_code=204)

    @app.post("/sessions/{session_id}/reprice")
    def reprice(session_id: str, body: RepriceBody) -> dict:
        return manager.reprice(session_id, body)

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "sessions": manager.count(),
            "session_cap": manager.session_cap,
            "backend": engine.DEFAULT_BACKEND,
            "compiled_available": engine.HAVE_COMPILED,
            "table_builds": tables.build_count(),
        }

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="workbench")
    return app
