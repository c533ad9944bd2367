"""File-backed papeo persistence with optimistic concurrency.

One JSON file per document under the store root, wrapped as
``{"revision": n, "papeo": {...}}``; an append-only ``<id>.events.jsonl``
holds the interaction log. Every write goes through a temp file and an
atomic rename, so readers always see either the old or the new revision,
never a torn document. Writes are serialized per document id; reads are
lock-free.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .errors import Conflict, Invalid, NotFound
from .evaluation import ActionEvent
from .model import PapeoDoc, from_dict, to_dict, validate

__all__ = ["Store", "StoredDoc"]


@dataclass(frozen=True)
class StoredDoc:
    id: str
    revision: int
    doc: PapeoDoc


class Store:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # -- paths ------------------------------------------------------------

    def _doc_path(self, doc_id: str) -> Path:
        return self.root / f"{doc_id}.json"

    def _events_path(self, doc_id: str) -> Path:
        return self.root / f"{doc_id}.events.jsonl"

    def _lock(self, doc_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(doc_id, threading.Lock())

    # -- io ---------------------------------------------------------------

    def _write(self, doc_id: str, revision: int, doc: PapeoDoc) -> None:
        payload = json.dumps(
            {"revision": revision, "papeo": to_dict(doc)},
            ensure_ascii=False, indent=2,
        )
        target = self._doc_path(doc_id)
        tmp = target.with_suffix(f".tmp-{uuid.uuid4().hex}")
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, target)

    def _read(self, doc_id: str) -> StoredDoc:
        path = self._doc_path(doc_id)
        if not path.exists():
            raise NotFound(f"unknown papeo {doc_id!r}")
        wrapper = json.loads(path.read_text(encoding="utf-8"))
        return StoredDoc(id=doc_id, revision=wrapper["revision"],
                         doc=from_dict(wrapper["papeo"]))

    # -- crud ---------------------------------------------------------------

    def create(self, doc: PapeoDoc) -> StoredDoc:
        violations = validate(doc)
        if violations:
            raise Invalid("document is not valid", violations)
        doc_id = uuid.uuid4().hex[:12]
        with self._lock(doc_id):
            self._write(doc_id, 1, doc)
        return StoredDoc(id=doc_id, revision=1, doc=doc)

    def get(self, doc_id: str) -> StoredDoc:
        return self._read(doc_id)

    def list(self) -> list[dict]:
        out = []
        for path in sorted(self.root.glob("*.json")):
            doc_id = path.stem
            try:
                stored = self._read(doc_id)
            except (NotFound, KeyError, ValueError):
                continue
            out.append({
                "id": doc_id,
                "revision": stored.revision,
                "paper_id": stored.doc.paper.paper_id,
                "title": stored.doc.paper.title,
                "num_segments": len(stored.doc.segments),
                "num_links": len(stored.doc.links),
            })
        return out

    def delete(self, doc_id: str) -> None:
        with self._lock(doc_id):
            path = self._doc_path(doc_id)
            if not path.exists():
                raise NotFound(f"unknown papeo {doc_id!r}")
            path.unlink()
            events = self._events_path(doc_id)
            if events.exists():
                events.unlink()

    # -- mutation -----------------------------------------------------------

    def update(
        self,
        doc_id: str,
        base_revision: int,
        mutate: Callable[[PapeoDoc], PapeoDoc],
    ) -> StoredDoc:
        """Apply a functional mutation under the document lock.

        The stored revision must equal ``base_revision`` (else
        :class:`Conflict`); the mutated document is revalidated (violations
        raise :class:`Invalid` and nothing is written) and the revision
        bumps by one.
        """
        with self._lock(doc_id):
            stored = self._read(doc_id)
            if stored.revision != base_revision:
                raise Conflict(
                    f"revision {base_revision} is stale (now {stored.revision})"
                )
            new_doc = mutate(stored.doc)
            violations = validate(new_doc)
            if violations:
                raise Invalid("mutation violates document invariants", violations)
            revision = stored.revision + 1
            self._write(doc_id, revision, new_doc)
            return StoredDoc(id=doc_id, revision=revision, doc=new_doc)

    # -- events ---------------------------------------------------------------

    def append_events(self, doc_id: str, events: list[ActionEvent]) -> int:
        """Append a sorted batch to the per-document log; returns the count.

        Batches keep their internal order; concurrent batches interleave but
        never interleave *within* a batch (single buffered write under the
        document lock). No revision bump: logs are not part of the document.
        """
        if not self._doc_path(doc_id).exists():
            raise NotFound(f"unknown papeo {doc_id!r}")
        times = [e.t for e in events]
        if times != sorted(times):
            raise Invalid("event batch must be sorted by timestamp")
        if not events:
            return 0
        rows = [
            json.dumps({
                "t": e.t, "actor": e.actor, "kind": e.kind,
                "direction": e.direction, "payload": e.payload,
            }, ensure_ascii=False)
            for e in events
        ]
        with self._lock(doc_id):
            with open(self._events_path(doc_id), "a", encoding="utf-8") as fh:
                fh.write("\n".join(rows) + "\n")
        return len(events)

    def read_events(self, doc_id: str) -> list[ActionEvent]:
        path = self._events_path(doc_id)
        if not path.exists():
            return []
        out = []
        for raw in path.read_text(encoding="utf-8").splitlines():
            if not raw.strip():
                continue
            row = json.loads(raw)
            out.append(ActionEvent(
                t=row["t"], actor=row.get("actor", ""), kind=row.get("kind", ""),
                direction=row.get("direction"), payload=row.get("payload") or {},
            ))
        return out
