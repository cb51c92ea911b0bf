"""File-system catalog of datasets, models, intents and xApp descriptors.

Layout::

    <root>/index.json
    <root>/{datasets,models,intents,xapps}/<id>

Entries are write-once and content addressed: the index records the SHA-256
of every stored file and reads verify it. ``created`` is a logical counter
rather than wall-clock time, so the same sequence of operations always
produces the same index bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from filelock import FileLock

from .ransim.kpmcsv import KPM_COLUMNS, KpmCsvError, iter_kpm_rows

KINDS = ("dataset", "model", "intent", "xapp")
_DIRS = {"dataset": "datasets", "model": "models", "intent": "intents", "xapp": "xapps"}
ID_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]{0,127}")
NUMERIC_COLUMNS = tuple(c for c in KPM_COLUMNS if c != "slice")


class CatalogError(Exception):
    code = "catalog_error"


class NotFound(CatalogError):
    code = "not_found"


class DigestMismatch(CatalogError):
    code = "digest_mismatch"


class WriteConflict(CatalogError):
    code = "write_conflict"


class BadId(CatalogError):
    code = "bad_id"


class SchemaError(CatalogError):
    code = "schema_error"

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    kind: str
    path: str  # relative to the catalog root, with forward slashes
    digest: str
    created: int
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def to_obj(self) -> dict[str, Any]:
        return {
            "id": self.id, "kind": self.kind, "path": self.path, "digest": self.digest,
            "created": self.created, "metadata": dict(self.metadata),
        }

    @classmethod
    def from_obj(cls, o: Mapping[str, Any]) -> "CatalogEntry":
        return cls(o["id"], o["kind"], o["path"], o["digest"], o["created"], o.get("metadata", {}))


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    csv_path: Path
    bounds: Mapping[str, tuple[float, float]]
    row_count: int
    source_digest: str | None
    digest: str


def _check(kind: str, entry_id: str) -> None:
    if kind not in KINDS:
        raise CatalogError(f"unknown kind {kind!r}")
    if not ID_RE.fullmatch(entry_id):
        raise BadId(f"invalid id {entry_id!r}")


def _canonical_index(obj: Any) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n").encode("utf-8")


class Catalog:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.index_path = self.root / "index.json"
        self._lock = FileLock(str(self.root / ".index.lock"))

    # ------------------------------------------------------------- index
    def _read_index(self) -> dict[str, Any]:
        try:
            return json.loads(self.index_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return {"counter": 0, "entries": {}}

    def _write_index(self, index: dict[str, Any]) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".index.", suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(_canonical_index(index))
        os.replace(tmp, self.index_path)

    # ----------------------------------------------------------- entries
    def put(self, kind: str, entry_id: str, data: bytes, metadata: Mapping[str, Any] | None = None) -> CatalogEntry:
        """Store ``data``. Re-putting identical bytes is a no-op; different bytes fail."""
        _check(kind, entry_id)
        digest = sha256_hex(data)
        self.root.mkdir(parents=True, exist_ok=True)
        with self._lock:
            index = self._read_index()
            key = f"{kind}/{entry_id}"
            if key in index["entries"]:
                existing = CatalogEntry.from_obj(index["entries"][key])
                if existing.digest != digest:
                    raise WriteConflict(f"{key} already stored with a different digest")
                return existing
            rel = f"{_DIRS[kind]}/{entry_id}"
            target = self.root / rel
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
            index["counter"] += 1
            entry = CatalogEntry(entry_id, kind, rel, digest, index["counter"], dict(metadata or {}))
            index["entries"][key] = entry.to_obj()
            self._write_index(index)
            return entry

    def entry(self, kind: str, entry_id: str) -> CatalogEntry:
        _check(kind, entry_id)
        raw = self._read_index()["entries"].get(f"{kind}/{entry_id}")
        if raw is None:
            raise NotFound(f"no {kind} named {entry_id!r}")
        return CatalogEntry.from_obj(raw)

    def path(self, kind: str, entry_id: str) -> Path:
        return self.root / self.entry(kind, entry_id).path

    def get(self, kind: str, entry_id: str) -> bytes:
        entry = self.entry(kind, entry_id)
        try:
            data = (self.root / entry.path).read_bytes()
        except FileNotFoundError:
            raise NotFound(f"{kind} {entry_id!r} is indexed but its file is missing") from None
        if sha256_hex(data) != entry.digest:
            raise DigestMismatch(f"{kind} {entry_id!r} does not match its recorded digest")
        return data

    def exists(self, kind: str, entry_id: str) -> bool:
        try:
            self.entry(kind, entry_id)
        except NotFound:
            return False
        return True

    def list(
        self,
        kind: str | None = None,
        where: Mapping[str, Any] | Callable[[CatalogEntry], bool] | None = None,
    ) -> list[CatalogEntry]:
        """Entries sorted by id (then kind); ``where`` filters on metadata values or a predicate."""
        out = []
        for raw in self._read_index()["entries"].values():
            e = CatalogEntry.from_obj(raw)
            if kind is not None and e.kind != kind:
                continue
            if callable(where):
                if not where(e):
                    continue
            elif where and any(e.metadata.get(k) != v for k, v in where.items()):
                continue
            out.append(e)
        return sorted(out, key=lambda e: (e.id, e.kind))

    # ---------------------------------------------------------- datasets
    def ingest_dataset(
        self,
        csv_path: str | Path,
        dataset_id: str,
        metadata: Mapping[str, Any] | None = None,
    ) -> DatasetRecord:
        """Validate a KPM CSV, compute per-column bounds, and store it."""
        data = Path(csv_path).read_bytes()
        bounds, rows = _csv_bounds(data)
        meta = dict(metadata or {})
        meta["bounds"] = {k: list(v) for k, v in bounds.items()}
        meta["row_count"] = rows
        entry = self.put("dataset", dataset_id, data, meta)
        return self.dataset_record(entry.id)

    def dataset_record(self, dataset_id: str) -> DatasetRecord:
        e = self.entry("dataset", dataset_id)
        m = e.metadata
        return DatasetRecord(
            id=e.id,
            csv_path=self.root / e.path,
            bounds={k: (float(v[0]), float(v[1])) for k, v in m["bounds"].items()},
            row_count=int(m["row_count"]),
            source_digest=m.get("source_digest"),
            digest=e.digest,
        )


def _csv_bounds(data: bytes) -> tuple[dict[str, tuple[float, float]], int]:
    lo = {c: float("inf") for c in NUMERIC_COLUMNS}
    hi = {c: float("-inf") for c in NUMERIC_COLUMNS}
    rows = 0
    try:
        text = data.decode("utf-8")
        for sample in iter_kpm_rows(text):
            rows += 1
            values = (sample.window_end, sample.dl_buffer, sample.dl_brate, sample.dl_tx_pkts,
                      sample.granted_prbs, sample.requested_prbs)
            for c, v in zip(NUMERIC_COLUMNS, values):
                lo[c] = min(lo[c], v)
                hi[c] = max(hi[c], v)
    except KpmCsvError as exc:
        raise SchemaError(str(exc), exc.row, exc.column) from None
    except UnicodeDecodeError as exc:
        raise SchemaError(f"dataset is not UTF-8: {exc}") from None
    if rows == 0:
        raise SchemaError("dataset has no rows")
    return {c: (lo[c], hi[c]) for c in NUMERIC_COLUMNS}, rows
