"""File-backed performance store with an append-only index.

Layout under the store root:

    index.log            one JSON line per committed record, append-only
    perfs/<id>/meta.json sidecar metadata exactly as the interchange format
    perfs/<id>/events.csv
    perfs/<id>/<cache>   derived artifacts (audio/trace), version-keyed names
    tmp/                 staging area for in-flight writes

A put stages the record directory under tmp/, fsyncs it, renames it into
perfs/ and only then appends the index line (also fsynced). Visibility is
defined by the index: a record directory without an index line was never
acknowledged and is ignored at startup, so a crash anywhere leaves every
acknowledged record fully readable and every unacknowledged one invisible.
The perfs/ tree doubles as an analyzable corpus directory.
"""

from __future__ import annotations

import bisect
import json
import os
import secrets
import shutil
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from .model import (
    ChainError,
    InvalidPerformanceError,
    LayeredPerformance,
    TinyPerformance,
    isoformat_utc,
    metadata_to_json,
    parse_events_csv,
    performance_from_metadata,
    serialize_performance_csv,
    validate,
)

__all__ = [
    "JamStore",
    "StoreRecord",
    "NotFoundError",
    "ParentNotFoundError",
    "DuplicateIdError",
]


class NotFoundError(KeyError):
    """No record with that id exists."""


class ParentNotFoundError(ValueError):
    """The referenced parent performance is not in the store."""


class DuplicateIdError(ValueError):
    """A record with that id already exists."""


@dataclass(frozen=True)
class StoreRecord:
    """Index entry for one stored performance."""

    id: str
    performer: str
    instrument: str
    date: str
    parent_id: str | None
    created_at: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "performer": self.performer,
            "instrument": self.instrument,
            "date": self.date,
            "parent_id": self.parent_id,
            "created_at": self.created_at,
        }


def _fsync_file(path: Path) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


def _fsync_dir(path: Path) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


class JamStore:
    """Durable performance storage plus the reply graph.

    Mutations serialize through one writer lock; readers work from the
    in-memory index snapshot and immutable on-disk files, so they never
    observe a partial write.
    """

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)
        self.perfs_dir = self.root / "perfs"
        self.tmp_dir = self.root / "tmp"
        self.index_path = self.root / "index.log"
        self.perfs_dir.mkdir(parents=True, exist_ok=True)
        self.tmp_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._records: dict[str, StoreRecord] = {}
        self._children: dict[str, list[str]] = {}
        self._order: list[tuple[str, str]] = []  # (created_at, id), ascending
        self._replay()

    # -- startup ---------------------------------------------------------

    def _replay(self) -> None:
        if not self.index_path.exists():
            return
        for raw in self.index_path.read_text(encoding="utf-8").splitlines():
            raw = raw.strip()
            if not raw:
                continue
            try:
                entry = json.loads(raw)
                record = StoreRecord(
                    id=str(entry["id"]),
                    performer=str(entry["performer"]),
                    instrument=str(entry["instrument"]),
                    date=str(entry["date"]),
                    parent_id=entry.get("parent_id"),
                    created_at=str(entry["created_at"]),
                )
            except (ValueError, KeyError, TypeError):
                continue  # torn tail line from a crash mid-append
            if record.id in self._records:
                continue
            if not (self.perfs_dir / record.id / "meta.json").exists():
                continue  # index line without its data; never acknowledged
            self._admit(record)

    def _admit(self, record: StoreRecord) -> None:
        self._records[record.id] = record
        if record.parent_id is not None:
            self._children.setdefault(record.parent_id, []).append(record.id)
        bisect.insort(self._order, (record.created_at, record.id))

    # -- writes ----------------------------------------------------------

    def put(
        self,
        perf: TinyPerformance,
        *,
        perf_id: str | None = None,
        created_at: str | None = None,
    ) -> str:
        """Validate and durably store a performance; returns the stored id.

        Ids are generated server-side (128-bit random hex); ``perf_id`` and
        ``created_at`` exist for trusted writers that need reproducible
        stores (e.g. corpus generation), not for API clients.
        """
        violations = validate(perf)
        if violations:
            raise InvalidPerformanceError(violations)
        with self._lock:
            if perf.parent_id is not None and perf.parent_id not in self._records:
                raise ParentNotFoundError(f"parent {perf.parent_id!r} not in store")
            new_id = perf_id if perf_id is not None else secrets.token_hex(16)
            if new_id in self._records or (self.perfs_dir / new_id).exists():
                raise DuplicateIdError(f"record {new_id!r} already exists")
            stamp = created_at if created_at is not None else isoformat_utc(
                datetime.now(timezone.utc)
            )
            stored = TinyPerformance(
                id=new_id,
                performer=perf.performer,
                instrument=perf.instrument,
                date=perf.date,
                parent_id=perf.parent_id,
                events=perf.events,
            )

            staging = self.tmp_dir / new_id
            if staging.exists():
                shutil.rmtree(staging)
            staging.mkdir()
            (staging / "meta.json").write_text(metadata_to_json(stored), encoding="utf-8")
            (staging / "events.csv").write_text(
                serialize_performance_csv(stored), encoding="utf-8"
            )
            _fsync_file(staging / "meta.json")
            _fsync_file(staging / "events.csv")
            os.rename(staging, self.perfs_dir / new_id)
            _fsync_dir(self.perfs_dir)

            record = StoreRecord(
                id=new_id,
                performer=stored.performer,
                instrument=stored.instrument,
                date=isoformat_utc(stored.date),
                parent_id=stored.parent_id,
                created_at=stamp,
            )
            line = json.dumps(record.to_dict()) + "\n"
            with open(self.index_path, "a", encoding="utf-8") as index:
                index.write(line)
                index.flush()
                os.fsync(index.fileno())

            self._admit(record)
            return new_id

    # -- reads -----------------------------------------------------------

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def __contains__(self, perf_id: str) -> bool:
        with self._lock:
            return perf_id in self._records

    def get_record(self, perf_id: str) -> StoreRecord:
        with self._lock:
            record = self._records.get(perf_id)
        if record is None:
            raise NotFoundError(perf_id)
        return record

    def get(self, perf_id: str) -> TinyPerformance:
        self.get_record(perf_id)
        perf_dir = self.perfs_dir / perf_id
        meta = json.loads((perf_dir / "meta.json").read_text(encoding="utf-8"))
        events = parse_events_csv((perf_dir / "events.csv").read_text(encoding="utf-8"))
        return performance_from_metadata(meta, events)

    def list_page(self, page: int = 1, page_size: int = 20) -> tuple[list[StoreRecord], int]:
        """Newest-first metadata page (1-based); returns (records, total)."""
        if page < 1 or page_size < 1:
            raise ValueError("page and page_size must be positive")
        with self._lock:
            ordered = list(reversed(self._order))
            total = len(ordered)
            window = ordered[(page - 1) * page_size : page * page_size]
            return [self._records[perf_id] for _, perf_id in window], total

    def children(self, perf_id: str) -> list[str]:
        self.get_record(perf_id)
        with self._lock:
            return list(self._children.get(perf_id, ()))

    def chain(self, perf_id: str) -> LayeredPerformance:
        """Reply chain from the root down to ``perf_id``, root first."""
        chain_ids: list[str] = []
        cursor: str | None = perf_id
        first = True
        while cursor is not None:
            try:
                record = self.get_record(cursor)
            except NotFoundError:
                if first:
                    raise
                raise ChainError(f"broken parent link at {cursor!r}") from None
            if cursor in chain_ids:
                raise ChainError(f"reply chain cycles at {cursor!r}")
            chain_ids.append(cursor)
            cursor = record.parent_id
            first = False
        layers = tuple(self.get(cid) for cid in reversed(chain_ids))
        return LayeredPerformance(layers)

    def all_performances(self) -> list[TinyPerformance]:
        with self._lock:
            ids = [perf_id for _, perf_id in self._order]
        return [self.get(perf_id) for perf_id in ids]

    # -- cached artifacts --------------------------------------------------

    def read_cache(self, perf_id: str, name: str) -> bytes | None:
        path = self.perfs_dir / perf_id / name
        try:
            return path.read_bytes()
        except FileNotFoundError:
            return None

    def write_cache(self, perf_id: str, name: str, data: bytes) -> None:
        self.get_record(perf_id)
        target = self.perfs_dir / perf_id / name
        staging = self.tmp_dir / f"cache-{perf_id}-{name}"
        staging.write_bytes(data)
        os.replace(staging, target)
