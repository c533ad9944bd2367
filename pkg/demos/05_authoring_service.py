#!/usr/bin/env python3
"""Drive the HTTP authoring API end to end against a throwaway store:
upload a paper+talk, accept the suggested segments, ask for link
suggestions, save a link and a sync highlight, and batch interaction events."""

import json
import tempfile
import threading
import urllib.request
from pathlib import Path

from papeo.service import PapeoService, make_server
from papeo.store import Store

SAMPLE = Path(__file__).resolve().parent.parent / "data" / "sample"


def call(base, method, path, body=None, revision=None):
    headers = {"Content-Type": "application/json"}
    if revision is not None:
        headers["If-Match"] = str(revision)
    req = urllib.request.Request(
        base + path, data=json.dumps(body).encode() if body is not None else None,
        headers=headers, method=method)
    with urllib.request.urlopen(req, timeout=10) as resp:
        payload = resp.read()
        return resp.status, json.loads(payload) if payload else None


with tempfile.TemporaryDirectory() as root:
    httpd = make_server(PapeoService(Store(root)), port=0)
    threading.Thread(target=httpd.serve_forever, daemon=True).start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    print(f"service on {base}, store in {root}")

    status, created = call(base, "POST", "/papeos", {
        "layout": json.loads((SAMPLE / "layout.json").read_text()),
        "transcript": {"format": "vtt",
                       "content": (SAMPLE / "talk.vtt").read_text()},
        "video": {"uri": "media/talk.mp4", "duration_ms": 62_000},
    })
    doc_id = created["id"]
    print(f"POST /papeos -> {status} id={doc_id} revision={created['revision']}")

    status, proposals = call(base, "GET", f"/papeos/{doc_id}/suggest/segments")
    print(f"GET suggest/segments -> {len(proposals['proposals'])} proposals")

    revision = proposals["revision"]
    for i, proposal in enumerate(proposals["proposals"][:3]):
        status, out = call(
            base, "PUT", f"/papeos/{doc_id}/segments/seg{i}",
            {"start_ms": proposal["start_ms"], "end_ms": proposal["end_ms"],
             "line_indices": proposal["line_indices"]},
            revision=revision)
        revision = out["revision"]
        print(f"PUT segments/seg{i} [{proposal['start_ms']}..{proposal['end_ms']}ms]"
              f" -> revision {revision}")

    status, suggested = call(base, "GET",
                             f"/papeos/{doc_id}/suggest/links/seg1?k=5")
    print("GET suggest/links/seg1 ->",
          [s["passage_id"] for s in suggested["suggestions"]])

    top1 = suggested["suggestions"][0]["passage_id"]
    status, out = call(base, "PUT", f"/papeos/{doc_id}/links/seg1",
                       {"passage_ids": [top1]}, revision=revision)
    revision = out["revision"]
    print(f"PUT links/seg1 -> linked {top1}, revision {revision}")

    status, out = call(base, "POST", f"/papeos/{doc_id}/sync-highlights",
                       {"segment_id": "seg1", "passage_id": top1,
                        "transcript_span": [2, 0, 3], "passage_span": [0, 4]},
                       revision=revision)
    revision = out["revision"]
    print(f"POST sync-highlights -> {out['highlight_id']}, revision {revision}")

    events = [{"t": float(i), "actor": "demo", "kind": k,
               "direction": "down" if k == "scroll" else None}
              for i, k in enumerate(["scroll", "scroll", "play", "pause", "scroll"])]
    status, out = call(base, "POST", f"/papeos/{doc_id}/events",
                       {"events": events})
    print(f"POST events -> accepted {out['accepted']}")

    status, final = call(base, "GET", f"/papeos/{doc_id}")
    doc = final["papeo"]
    print(f"\nfinal document: revision {final['revision']}, "
          f"{len(doc['segments'])} segments, {len(doc['links'])} links, "
          f"{len(doc['sync_highlights'])} sync highlights")

    httpd.shutdown()
    httpd.server_close()
