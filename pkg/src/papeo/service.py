"""HTTP+JSON API over the store, powering the authoring/reading webapp.

Endpoints (all JSON; times in milliseconds, matching ``papeo.json``):

    POST   /papeos                                create from layout+transcript
    GET    /papeos                                list
    GET    /papeos/{id}                           fetch doc + revision
    DELETE /papeos/{id}
    PUT    /papeos/{id}/segments/{sid}            upsert segment
    DELETE /papeos/{id}/segments/{sid}
    PUT    /papeos/{id}/links/{sid}               set link
    DELETE /papeos/{id}/links/{sid}               clear link
    POST   /papeos/{id}/sync-highlights           add highlight
    DELETE /papeos/{id}/sync-highlights/{hid}
    GET    /papeos/{id}/suggest/segments          sentence-group proposals
    GET    /papeos/{id}/suggest/links/{sid}?k=5   ranked passage suggestions
    POST   /papeos/{id}/events                    append interaction events

Mutations require an ``If-Match: <revision>`` header; a stale revision is a
409. Validation failures are 422 with the violation list. GETs under
``/app/`` and ``/media/`` serve static files when directories are
configured. Reads run concurrently; writes serialize per document in the
store.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from . import linking, model
from .errors import (Conflict, EmbedError, InputError, Invalid, NotFound,
                     ParseError, SchemaError, VersionError)
from .evaluation import ActionEvent
from .ingest import group_sentences, parse_layout, parse_transcript
from .store import Store

__all__ = ["PapeoService", "build_papeo", "serve"]

_MS = 1000.0


def build_papeo(layout_json, transcript_text, transcript_format, video: dict) -> model.PapeoDoc:
    """Assemble a fresh papeo (no segments yet) from raw author uploads."""
    paper = parse_layout(layout_json)
    lines = parse_transcript(transcript_text, transcript_format)
    if "duration_ms" not in video:
        raise SchemaError("missing required field $.video.duration_ms",
                          path="$.video.duration_ms")
    return model.PapeoDoc(
        paper=paper,
        video=model.VideoMeta(
            uri=video.get("uri", ""),
            duration_s=video["duration_ms"] / _MS,
            frame_rate=video.get("frame_rate"),
        ),
        transcript=tuple(lines),
    )


class PapeoService:
    """Request-independent application logic; the HTTP handler is a shim."""

    def __init__(
        self,
        store: Store,
        linker_cfg: linking.LinkerConfig = linking.LinkerConfig(),
        static_dir: Optional[Path] = None,
        media_dir: Optional[Path] = None,
    ):
        self.store = store
        self.linker_cfg = linker_cfg
        self.static_dir = Path(static_dir) if static_dir else None
        self.media_dir = Path(media_dir) if media_dir else None

    # -- document endpoints -------------------------------------------------

    def create(self, body: dict) -> tuple[int, dict]:
        for key in ("layout", "transcript", "video"):
            if key not in body:
                raise SchemaError(f"missing required field $.{key}", path=f"$.{key}")
        transcript = body["transcript"]
        doc = build_papeo(
            json.dumps(body["layout"]),
            transcript.get("content", ""),
            transcript.get("format", "vtt"),
            body["video"],
        )
        stored = self.store.create(doc)
        return 201, {"id": stored.id, "revision": stored.revision}

    def get(self, doc_id: str) -> tuple[int, dict]:
        stored = self.store.get(doc_id)
        return 200, {"id": stored.id, "revision": stored.revision,
                     "papeo": model.to_dict(stored.doc)}

    def list(self) -> tuple[int, dict]:
        return 200, {"papeos": self.store.list()}

    def delete(self, doc_id: str) -> tuple[int, Optional[dict]]:
        self.store.delete(doc_id)
        return 204, None

    # -- mutations ------------------------------------------------------------

    def upsert_segment(self, doc_id, sid, revision, body) -> tuple[int, dict]:
        segment = model.VideoSegment(
            id=sid,
            start_s=body["start_ms"] / _MS,
            end_s=body["end_ms"] / _MS,
            line_indices=tuple(body.get("line_indices", ())),
        )
        stored = self.store.update(doc_id, revision,
                                   lambda d: model.with_segment(d, segment))
        return 200, {"revision": stored.revision}

    def delete_segment(self, doc_id, sid, revision) -> tuple[int, dict]:
        self._need_segment(doc_id, sid)
        stored = self.store.update(doc_id, revision,
                                   lambda d: model.without_segment(d, sid))
        return 200, {"revision": stored.revision}

    def set_link(self, doc_id, sid, revision, body) -> tuple[int, dict]:
        self._need_segment(doc_id, sid)
        passage_ids = body.get("passage_ids", [])
        stored = self.store.update(doc_id, revision,
                                   lambda d: model.with_link(d, sid, passage_ids))
        return 200, {"revision": stored.revision}

    def clear_link(self, doc_id, sid, revision) -> tuple[int, dict]:
        self._need_segment(doc_id, sid)
        stored = self.store.update(doc_id, revision,
                                   lambda d: model.without_link(d, sid))
        return 200, {"revision": stored.revision}

    def add_highlight(self, doc_id, revision, body) -> tuple[int, dict]:
        n = len(self.store.get(doc_id).doc.sync_highlights)
        highlight = model.SyncHighlight(
            id=body.get("id", f"hl{n}-{doc_id[:4]}"),
            segment_id=body["segment_id"],
            passage_id=body["passage_id"],
            transcript_span=tuple(body["transcript_span"]),
            passage_span=tuple(body["passage_span"]),
        )
        stored = self.store.update(doc_id, revision,
                                   lambda d: model.with_highlight(d, highlight))
        return 200, {"revision": stored.revision, "highlight_id": highlight.id}

    def remove_highlight(self, doc_id, hid, revision) -> tuple[int, dict]:
        if all(h.id != hid for h in self.store.get(doc_id).doc.sync_highlights):
            raise NotFound(f"unknown sync highlight {hid!r}")
        stored = self.store.update(doc_id, revision,
                                   lambda d: model.without_highlight(d, hid))
        return 200, {"revision": stored.revision}

    def _need_segment(self, doc_id: str, sid: str) -> None:
        if self.store.get(doc_id).doc.segment_by_id(sid) is None:
            raise NotFound(f"unknown segment {sid!r}")

    # -- suggestions ------------------------------------------------------------

    def suggest_segments(self, doc_id: str) -> tuple[int, dict]:
        stored = self.store.get(doc_id)
        proposals = []
        for group in group_sentences(stored.doc.transcript):
            lines = [stored.doc.transcript[i] for i in group.line_indices]
            proposals.append({
                "start_ms": round(lines[0].start_s * _MS),
                "end_ms": round(lines[-1].end_s * _MS),
                "line_indices": list(group.line_indices),
                "text": group.text,
            })
        return 200, {"revision": stored.revision, "proposals": proposals}

    def suggest_links(self, doc_id: str, sid: str, k: Optional[int]) -> tuple[int, dict]:
        stored = self.store.get(doc_id)
        cfg = self.linker_cfg
        if k is not None:
            cfg = linking.LinkerConfig(
                p_forward=cfg.p_forward, top_k=k, embedder=cfg.embedder,
                endpoint=cfg.endpoint, rouge_only=cfg.rouge_only,
            )
        rouge_only = False
        try:
            suggestions = linking.suggest(stored.doc, sid, cfg)
        except EmbedError:
            # degraded mode: drop the embedding term rather than fail
            rouge_only = True
            fallback = linking.LinkerConfig(p_forward=cfg.p_forward,
                                            top_k=cfg.top_k, rouge_only=True)
            suggestions = linking.suggest(stored.doc, sid, fallback)
        return 200, {
            "revision": stored.revision,
            "rouge_only": rouge_only,
            "suggestions": [
                {"passage_id": s.passage_id, "score": s.score} for s in suggestions
            ],
        }

    # -- events ------------------------------------------------------------

    def ingest_events(self, doc_id: str, body: dict) -> tuple[int, dict]:
        events = [
            ActionEvent(
                t=row.get("t", 0.0), actor=row.get("actor", ""),
                kind=row.get("kind", ""), direction=row.get("direction"),
                payload=row.get("payload") or {},
            )
            for row in body.get("events", [])
        ]
        accepted = self.store.append_events(doc_id, events)
        return 200, {"accepted": accepted}


# ---------------------------------------------------------------------------
# HTTP plumbing

_ROUTES = [
    ("POST", re.compile(r"^/papeos$"), "create"),
    ("GET", re.compile(r"^/papeos$"), "list"),
    ("GET", re.compile(r"^/papeos/([^/]+)$"), "get"),
    ("DELETE", re.compile(r"^/papeos/([^/]+)$"), "delete"),
    ("PUT", re.compile(r"^/papeos/([^/]+)/segments/([^/]+)$"), "upsert_segment"),
    ("DELETE", re.compile(r"^/papeos/([^/]+)/segments/([^/]+)$"), "delete_segment"),
    ("PUT", re.compile(r"^/papeos/([^/]+)/links/([^/]+)$"), "set_link"),
    ("DELETE", re.compile(r"^/papeos/([^/]+)/links/([^/]+)$"), "clear_link"),
    ("POST", re.compile(r"^/papeos/([^/]+)/sync-highlights$"), "add_highlight"),
    ("DELETE", re.compile(r"^/papeos/([^/]+)/sync-highlights/([^/]+)$"), "remove_highlight"),
    ("GET", re.compile(r"^/papeos/([^/]+)/suggest/segments$"), "suggest_segments"),
    ("GET", re.compile(r"^/papeos/([^/]+)/suggest/links/([^/]+)$"), "suggest_links"),
    ("POST", re.compile(r"^/papeos/([^/]+)/events$"), "ingest_events"),
]

_NEEDS_REVISION = {"upsert_segment", "delete_segment", "set_link", "clear_link",
                   "add_highlight", "remove_highlight"}
_NEEDS_BODY = {"create", "upsert_segment", "set_link", "add_highlight",
               "ingest_events"}


class _Handler(BaseHTTPRequestHandler):
    service: PapeoService  # set by make_server
    protocol_version = "HTTP/1.1"

    def log_message(self, format, *args):  # silence per-request stderr noise
        pass

    def _send_json(self, status: int, obj: Optional[dict]) -> None:
        body = b"" if obj is None else json.dumps(obj, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            return json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ParseError(f"request body is not valid JSON: {e}") from e

    def _serve_static(self, root: Path, rel: str) -> None:
        target = (root / rel.lstrip("/")).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self._send_json(404, {"error": "not found"})
            return
        data = target.read_bytes()
        ctype = {
            ".html": "text/html", ".js": "text/javascript", ".css": "text/css",
            ".json": "application/json", ".png": "image/png",
            ".jpg": "image/jpeg", ".mp4": "video/mp4", ".vtt": "text/vtt",
        }.get(target.suffix, "application/octet-stream")
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _dispatch(self, method: str) -> None:
        parsed = urlparse(self.path)
        path = parsed.path.rstrip("/") or "/"
        query = parse_qs(parsed.query)

        if method == "GET" and self.service.static_dir and (
                path == "/" or path.startswith("/app")):
            rel = "index.html" if path in ("/", "/app") else path[len("/app/"):]
            self._serve_static(self.service.static_dir, rel)
            return
        if method == "GET" and self.service.media_dir and path.startswith("/media/"):
            self._serve_static(self.service.media_dir, path[len("/media/"):])
            return

        for verb, pattern, name in _ROUTES:
            if verb != method:
                continue
            m = pattern.match(path)
            if not m:
                continue
            try:
                args = list(m.groups())
                if name in _NEEDS_REVISION:
                    revision = self.headers.get("If-Match")
                    if revision is None or not revision.strip().isdigit():
                        self._send_json(428, {"error": "If-Match revision header required"})
                        return
                    args.append(int(revision.strip()))
                if name in _NEEDS_BODY:
                    args.append(self._read_body())
                if name == "suggest_links":
                    k = query.get("k", [None])[0]
                    args.append(int(k) if k is not None else None)
                status, obj = getattr(self.service, name)(*args)
                self._send_json(status, obj)
            except NotFound as e:
                self._send_json(404, {"error": str(e)})
            except Conflict as e:
                self._send_json(409, {"error": str(e)})
            except Invalid as e:
                self._send_json(422, {
                    "error": str(e),
                    "violations": [
                        {"type": v.type, "id": v.id, "rule": v.rule, "detail": v.detail}
                        for v in e.violations
                    ],
                })
            except (ParseError, SchemaError, VersionError, InputError,
                    KeyError, TypeError, ValueError) as e:
                self._send_json(400, {"error": f"{type(e).__name__}: {e}"})
            except EmbedError as e:
                self._send_json(502, {"error": str(e)})
            return
        self._send_json(404, {"error": f"no route for {method} {path}"})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def do_PUT(self):
        self._dispatch("PUT")

    def do_DELETE(self):
        self._dispatch("DELETE")


def make_server(service: PapeoService, host: str = "127.0.0.1",
                port: int = 0) -> ThreadingHTTPServer:
    handler = type("PapeoHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)


def serve(service: PapeoService, host: str = "127.0.0.1", port: int = 8750) -> None:
    """Run until interrupted."""
    server = make_server(service, host, port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
