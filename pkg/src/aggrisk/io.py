"""Load and save for YET, ELT, Layer, and YLT values.

Two formats share one type model:

* binary: magic ``ARE1``, a version and kind word, then per-column
  contiguous arrays (event ids as uint32, timestamps and losses as float64,
  trial boundaries as an int64 offset vector).  Bit-exact round trips.
* tabular: ``#``-prefixed metadata lines carrying scalars as ``k=v`` pairs,
  a header row with column names, then one comma-separated record per line.
  Floats print with 17 significant digits, which parses back bit-exact.

Loads sniff the format from content.  Failure modes are distinct errors:
wrong magic or malformed layout raises FormatMismatchError, an unsupported
version VersionMismatchError, a short payload TruncatedPayloadError.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import BinaryIO, Sequence
from urllib.parse import quote, unquote

import numpy as np

from .errors import (
    DataFormatError,
    FormatMismatchError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from .model import (
    EventLossTable,
    FinancialTerms,
    Layer,
    LayerTerms,
    YearEventTable,
    YearLossTable,
)

MAGIC = b"ARE1"
VERSION = 1

KIND_YET = 1
KIND_ELT = 2
KIND_LAYER = 3
KIND_YLT = 4

_KIND_NAMES = {KIND_YET: "yet", KIND_ELT: "elt", KIND_LAYER: "layer", KIND_YLT: "ylt"}
_KIND_CODES = {v: k for k, v in _KIND_NAMES.items()}

_FMT = "%.17g"


def _fmt(x: float) -> str:
    return _FMT % x


# ---------------------------------------------------------------- binary ---


class _Reader:
    """Cursor over a byte payload that fails loudly on short reads."""

    def __init__(self, data: bytes, path: str):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedPayloadError(
                f"{self.path}: needed {n} bytes at offset {self.pos}, "
                f"file has {len(self.data)}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def array(self, dtype, count: int) -> np.ndarray:
        dt = np.dtype(dtype)
        raw = self.take(dt.itemsize * count)
        return np.frombuffer(raw, dtype=dt).copy()

    def done(self) -> None:
        if self.pos != len(self.data):
            raise DataFormatError(
                f"{self.path}: {len(self.data) - self.pos} trailing bytes"
            )


def _write_header(f: BinaryIO, kind: int) -> None:
    f.write(MAGIC)
    f.write(struct.pack("<HH", VERSION, kind))


def _read_header(r: _Reader) -> int:
    magic = r.take(4)
    if magic != MAGIC:
        raise FormatMismatchError(f"{r.path}: bad magic {magic!r}, expected {MAGIC!r}")
    version, kind = r.unpack("<HH")
    if version != VERSION:
        raise VersionMismatchError(
            f"{r.path}: format version {version}, this build reads {VERSION}"
        )
    if kind not in _KIND_NAMES:
        raise FormatMismatchError(f"{r.path}: unknown kind code {kind}")
    return kind


def _write_fin_terms(f: BinaryIO, t: FinancialTerms) -> None:
    f.write(struct.pack("<4d", t.exchange_rate, t.event_retention, t.event_limit, t.share))


def _read_fin_terms(r: _Reader) -> FinancialTerms:
    rate, ret, lim, share = r.unpack("<4d")
    return FinancialTerms(rate, ret, lim, share)


def _write_str(f: BinaryIO, s: str) -> None:
    raw = s.encode("utf-8")
    f.write(struct.pack("<H", len(raw)))
    f.write(raw)


def _read_str(r: _Reader) -> str:
    (n,) = r.unpack("<H")
    return r.take(n).decode("utf-8")


def _write_elt_body(f: BinaryIO, elt: EventLossTable) -> None:
    f.write(struct.pack("<QQ", elt.catalog_size, elt.record_count))
    _write_fin_terms(f, elt.terms)
    f.write(np.ascontiguousarray(elt.event_ids, dtype=np.uint32).tobytes())
    f.write(np.ascontiguousarray(elt.losses, dtype=np.float64).tobytes())


def _read_elt_body(r: _Reader) -> EventLossTable:
    catalog, n = r.unpack("<QQ")
    terms = _read_fin_terms(r)
    ids = r.array(np.uint32, n)
    losses = r.array(np.float64, n)
    return EventLossTable(int(catalog), ids, losses, terms)


def _save_binary(value, kind: int, f: BinaryIO) -> None:
    _write_header(f, kind)
    if kind == KIND_YET:
        yet: YearEventTable = value
        total = int(yet.offsets[-1])
        f.write(struct.pack("<QQQ", yet.catalog_size, yet.trial_count, total))
        f.write(np.ascontiguousarray(yet.offsets, dtype=np.int64).tobytes())
        f.write(np.ascontiguousarray(yet.event_ids, dtype=np.uint32).tobytes())
        f.write(np.ascontiguousarray(yet.timestamps, dtype=np.float64).tobytes())
    elif kind == KIND_ELT:
        _write_elt_body(f, value)
    elif kind == KIND_LAYER:
        layer: Layer = value
        _write_str(f, layer.id)
        t = layer.terms
        f.write(struct.pack("<4d", t.occ_retention, t.occ_limit, t.agg_retention, t.agg_limit))
        f.write(struct.pack("<Q", len(layer.elts)))
        for elt in layer.elts:
            _write_elt_body(f, elt)
    elif kind == KIND_YLT:
        ylt: YearLossTable = value
        _write_str(f, ylt.layer_id)
        f.write(struct.pack("<Q", ylt.losses.shape[0]))
        f.write(np.ascontiguousarray(ylt.losses, dtype=np.float64).tobytes())
    else:  # pragma: no cover - guarded by callers
        raise ValueError(f"unknown kind {kind}")


def _load_binary(r: _Reader):
    kind = _read_header(r)
    if kind == KIND_YET:
        catalog, trials, total = r.unpack("<QQQ")
        offsets = r.array(np.int64, trials + 1)
        ids = r.array(np.uint32, total)
        ts = r.array(np.float64, total)
        if offsets.shape[0] and (offsets[0] != 0 or offsets[-1] != total):
            raise DataFormatError(f"{r.path}: offset vector inconsistent with payload")
        value = YearEventTable(int(catalog), ids, ts, offsets)
    elif kind == KIND_ELT:
        value = _read_elt_body(r)
    elif kind == KIND_LAYER:
        layer_id = _read_str(r)
        occ_ret, occ_lim, agg_ret, agg_lim = r.unpack("<4d")
        (n_elts,) = r.unpack("<Q")
        elts = tuple(_read_elt_body(r) for _ in range(n_elts))
        value = Layer(layer_id, elts, LayerTerms(occ_ret, occ_lim, agg_ret, agg_lim))
    else:
        layer_id = _read_str(r)
        (n,) = r.unpack("<Q")
        value = YearLossTable(layer_id, r.array(np.float64, n))
    r.done()
    return kind, value


# --------------------------------------------------------------- tabular ---


def _meta_line(kind: str, pairs: dict) -> str:
    body = " ".join(f"{k}={v}" for k, v in pairs.items())
    return f"# are1 {kind} version={VERSION}" + (f" {body}" if body else "") + "\n"


def _parse_meta(line: str, path: str) -> tuple[str, dict]:
    parts = line.strip().split()
    if parts[:2] != ["#", "are1"] or len(parts) < 3:
        raise FormatMismatchError(f"{path}: missing 'are1' metadata line")
    kind = parts[2]
    pairs = {}
    for tok in parts[3:]:
        if "=" not in tok:
            raise FormatMismatchError(f"{path}: bad metadata token {tok!r}")
        k, v = tok.split("=", 1)
        pairs[k] = v
    version = pairs.pop("version", None)
    if version is None:
        raise FormatMismatchError(f"{path}: metadata lacks a version")
    try:
        parsed = int(version)
    except ValueError:
        raise FormatMismatchError(f"{path}: unreadable version {version!r}") from None
    if parsed != VERSION:
        raise VersionMismatchError(
            f"{path}: format version {version}, this build reads {VERSION}"
        )
    return kind, pairs


def _fin_pairs(t: FinancialTerms) -> dict:
    return {
        "exchange_rate": _fmt(t.exchange_rate),
        "event_retention": _fmt(t.event_retention),
        "event_limit": _fmt(t.event_limit),
        "share": _fmt(t.share),
    }


def _fin_from_pairs(p: dict) -> FinancialTerms:
    return FinancialTerms(
        float(p["exchange_rate"]),
        float(p["event_retention"]),
        float(p["event_limit"]),
        float(p["share"]),
    )


def _save_tabular(value, kind: int, f) -> None:
    if kind == KIND_YET:
        yet: YearEventTable = value
        f.write(_meta_line("yet", {
            "catalog_size": yet.catalog_size, "trial_count": yet.trial_count,
        }))
        f.write("trial,event_id,timestamp\n")
        offsets = yet.offsets
        ids = yet.event_ids
        ts = yet.timestamps
        for t in range(yet.trial_count):
            for i in range(int(offsets[t]), int(offsets[t + 1])):
                f.write(f"{t},{int(ids[i])},{_fmt(ts[i])}\n")
    elif kind == KIND_ELT:
        elt: EventLossTable = value
        f.write(_meta_line("elt", {
            "catalog_size": elt.catalog_size,
            "record_count": elt.record_count, **_fin_pairs(elt.terms),
        }))
        f.write("event_id,loss\n")
        for i in range(elt.record_count):
            f.write(f"{int(elt.event_ids[i])},{_fmt(elt.losses[i])}\n")
    elif kind == KIND_LAYER:
        layer: Layer = value
        t = layer.terms
        f.write(_meta_line("layer", {
            "id": quote(layer.id, safe=""),
            "occ_retention": _fmt(t.occ_retention), "occ_limit": _fmt(t.occ_limit),
            "agg_retention": _fmt(t.agg_retention), "agg_limit": _fmt(t.agg_limit),
            "elt_count": len(layer.elts),
        }))
        for i, elt in enumerate(layer.elts):
            f.write(f"# elt index={i} catalog_size={elt.catalog_size} "
                    f"record_count={elt.record_count} "
                    + " ".join(f"{k}={v}" for k, v in _fin_pairs(elt.terms).items())
                    + "\n")
        f.write("elt,event_id,loss\n")
        for i, elt in enumerate(layer.elts):
            for j in range(elt.record_count):
                f.write(f"{i},{int(elt.event_ids[j])},{_fmt(elt.losses[j])}\n")
    elif kind == KIND_YLT:
        ylt: YearLossTable = value
        f.write(_meta_line("ylt", {
            "layer_id": quote(ylt.layer_id, safe=""),
            "trial_count": ylt.losses.shape[0],
        }))
        f.write("trial,loss\n")
        for t in range(ylt.losses.shape[0]):
            f.write(f"{t},{_fmt(ylt.losses[t])}\n")
    else:  # pragma: no cover - guarded by callers
        raise ValueError(f"unknown kind {kind}")


def _expect_columns(row: list[str], want: list[str], path: str) -> None:
    if row != want:
        raise FormatMismatchError(f"{path}: header {row!r}, expected {want!r}")


def _load_tabular(lines: list[str], path: str):
    if not lines:
        raise FormatMismatchError(f"{path}: empty file")
    kind_name, meta = _parse_meta(lines[0], path)
    if kind_name not in _KIND_CODES:
        raise FormatMismatchError(f"{path}: unknown kind {kind_name!r}")
    extra = []
    body_at = 1
    while body_at < len(lines) and lines[body_at].startswith("#"):
        extra.append(lines[body_at])
        body_at += 1
    if body_at >= len(lines):
        raise TruncatedPayloadError(f"{path}: no column header after metadata")
    header = next(csv.reader([lines[body_at]]))
    rows = list(csv.reader(lines[body_at + 1 :]))
    rows = [r for r in rows if r]

    try:
        if kind_name == "yet":
            _expect_columns(header, ["trial", "event_id", "timestamp"], path)
            catalog = int(meta["catalog_size"])
            trial_count = int(meta["trial_count"])
            ids = np.empty(len(rows), dtype=np.uint32)
            ts = np.empty(len(rows), dtype=np.float64)
            counts = np.zeros(trial_count, dtype=np.int64)
            last = -1
            for i, row in enumerate(rows):
                t = int(row[0])
                if t < last or not 0 <= t < trial_count:
                    raise DataFormatError(f"{path}: trial column not grouped/ascending")
                last = t
                counts[t] += 1
                ids[i] = int(row[1])
                ts[i] = float(row[2])
            offsets = np.zeros(trial_count + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            value = YearEventTable(catalog, ids, ts, offsets)
        elif kind_name == "elt":
            _expect_columns(header, ["event_id", "loss"], path)
            n = int(meta["record_count"])
            if n != len(rows):
                raise TruncatedPayloadError(
                    f"{path}: metadata says {n} records, found {len(rows)}"
                )
            ids = np.array([int(r[0]) for r in rows], dtype=np.uint32)
            losses = np.array([float(r[1]) for r in rows], dtype=np.float64)
            value = EventLossTable(
                int(meta["catalog_size"]), ids, losses, _fin_from_pairs(meta)
            )
        elif kind_name == "layer":
            _expect_columns(header, ["elt", "event_id", "loss"], path)
            n_elts = int(meta["elt_count"])
            fin: list[FinancialTerms] = [FinancialTerms()] * n_elts
            declared = [0] * n_elts
            catalogs = [0] * n_elts
            for line in extra:
                parts = line.strip().split()
                if parts[:2] != ["#", "elt"]:
                    raise FormatMismatchError(f"{path}: bad layer metadata {line!r}")
                pairs = dict(tok.split("=", 1) for tok in parts[2:])
                i = int(pairs.pop("index"))
                declared[i] = int(pairs.pop("record_count"))
                catalogs[i] = int(pairs.pop("catalog_size"))
                fin[i] = _fin_from_pairs(pairs)
            if len(extra) != n_elts:
                raise TruncatedPayloadError(
                    f"{path}: {n_elts} elts declared, {len(extra)} metadata lines"
                )
            buckets_id: list[list[int]] = [[] for _ in range(n_elts)]
            buckets_loss: list[list[float]] = [[] for _ in range(n_elts)]
            for row in rows:
                i = int(row[0])
                if not 0 <= i < n_elts:
                    raise DataFormatError(f"{path}: elt column {i} out of range")
                buckets_id[i].append(int(row[1]))
                buckets_loss[i].append(float(row[2]))
            for i in range(n_elts):
                if len(buckets_id[i]) != declared[i]:
                    raise TruncatedPayloadError(
                        f"{path}: elt {i} has {len(buckets_id[i])} rows, "
                        f"metadata says {declared[i]}"
                    )
            elts = tuple(
                EventLossTable(
                    catalogs[i],
                    np.array(buckets_id[i], dtype=np.uint32),
                    np.array(buckets_loss[i], dtype=np.float64),
                    fin[i],
                )
                for i in range(n_elts)
            )
            terms = LayerTerms(
                float(meta["occ_retention"]), float(meta["occ_limit"]),
                float(meta["agg_retention"]), float(meta["agg_limit"]),
            )
            value = Layer(unquote(meta["id"]), elts, terms)
        else:
            _expect_columns(header, ["trial", "loss"], path)
            n = int(meta["trial_count"])
            if n != len(rows):
                raise TruncatedPayloadError(
                    f"{path}: metadata says {n} trials, found {len(rows)}"
                )
            losses = np.array([float(r[1]) for r in rows], dtype=np.float64)
            value = YearLossTable(unquote(meta["layer_id"]), losses)
    except (KeyError, ValueError, IndexError) as exc:
        if isinstance(exc, DataFormatError):
            raise
        raise DataFormatError(f"{path}: malformed tabular payload: {exc}") from exc
    return _KIND_CODES[kind_name], value


# ---------------------------------------------------------------- public ---


def _save(value, kind: int, path, format: str) -> None:
    p = Path(path)
    if format == "binary":
        with open(p, "wb") as f:
            _save_binary(value, kind, f)
    elif format == "tabular":
        with open(p, "w", encoding="utf-8", newline="") as f:
            _save_tabular(value, kind, f)
    else:
        raise ValueError(f"unknown format {format!r}; use 'binary' or 'tabular'")


def _load(path, want_kind: int | None):
    p = Path(path)
    data = p.read_bytes()
    if data[:1] == b"#":
        lines = data.decode("utf-8").splitlines()
        kind, value = _load_tabular(lines, str(p))
    else:
        kind, value = _load_binary(_Reader(data, str(p)))
    if want_kind is not None and kind != want_kind:
        raise FormatMismatchError(
            f"{p}: holds a {_KIND_NAMES[kind]}, expected a {_KIND_NAMES[want_kind]}"
        )
    return value


def save_yet(yet: YearEventTable, path, format: str = "binary") -> None:
    _save(yet, KIND_YET, path, format)


def save_elt(elt: EventLossTable, path, format: str = "binary") -> None:
    _save(elt, KIND_ELT, path, format)


def save_layer(layer: Layer, path, format: str = "binary") -> None:
    _save(layer, KIND_LAYER, path, format)


def save_ylt(ylt: YearLossTable, path, format: str = "binary") -> None:
    _save(ylt, KIND_YLT, path, format)


def load_yet(path) -> YearEventTable:
    return _load(path, KIND_YET)


def load_elt(path) -> EventLossTable:
    return _load(path, KIND_ELT)


def load_layer(path) -> Layer:
    return _load(path, KIND_LAYER)


def load_ylt(path) -> YearLossTable:
    return _load(path, KIND_YLT)


def load_any(path):
    """Load whatever the file holds; format and kind are sniffed."""
    return _load(path, None)


# --------------------------------------------------------------- dataset ---

_EXT = {"binary": "are1", "tabular": "csv"}


def save_dataset(
    directory,
    yet: YearEventTable,
    layers: Sequence[Layer],
    elts: Sequence[EventLossTable] = (),
    format: str = "binary",
) -> list[Path]:
    """Write one YET file, one file per layer, one per standalone ELT."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    ext = _EXT[format]
    written = []
    p = d / f"yet.{ext}"
    save_yet(yet, p, format)
    written.append(p)
    for i, elt in enumerate(elts):
        p = d / f"elt_{i:03d}.{ext}"
        save_elt(elt, p, format)
        written.append(p)
    for i, layer in enumerate(layers):
        p = d / f"layer_{i:03d}.{ext}"
        save_layer(layer, p, format)
        written.append(p)
    return written


def load_dataset(directory) -> tuple[YearEventTable, list[Layer]]:
    """Read back what an analysis run needs: the YET and every layer file."""
    d = Path(directory)
    yet_paths = sorted(d.glob("yet.*"))
    if not yet_paths:
        raise FileNotFoundError(f"no yet.* file in {d}")
    yet = load_yet(yet_paths[0])
    layers = [load_layer(p) for p in sorted(d.glob("layer_*.*"))]
    if not layers:
        raise FileNotFoundError(f"no layer_*.* files in {d}")
    return yet, layers
