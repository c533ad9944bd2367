"""Batch entry points: one binary, one subcommand per pipeline stage.

    papeo ingest --layout l.json --transcript t.vtt --video-uri v.mp4 \
                 --duration-s 180 -o doc.json
    papeo segment --method punctuation doc.json -o doc.json
    papeo link doc.json --top-k 5 -o doc.json
    papeo export doc.json -o out.papeo.json
    papeo evaluate --dataset manifest.json --task linking --json
    papeo grid-search --dataset manifest.json --task segmentation \
                      --method hsv --grid "threshold=20,40,60;min_segment_s=0"
    papeo stats doc.json / papeo stats --events log.jsonl
    papeo serve --root ./store --port 8750

Defaults come from a plain-text ``key = value`` config file named by
``--config`` or the ``PAPEO_CONFIG`` environment variable; explicit flags
win over the file. ``--json`` switches stdout to machine-readable JSON;
exit codes: 0 ok, 1 usage error, 2 data error, 3 embedding-provider error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import evaluation, linking, model, segmentation, service
from .errors import EmbedError, InputError, PapeoError, ParseError
from .frames import load_frames_manifest
from .ingest import parse_layout, parse_transcript
from .store import Store

USAGE_EXIT, DATA_EXIT, PROVIDER_EXIT = 1, 2, 3

CONFIG_KEYS = {
    "min_segment_s": float,
    "hsv_threshold": float,
    "template_threshold": float,
    "punctuation": str,
    "p_forward": float,
    "top_k": int,
    "embedder": str,
    "endpoint": str,
    "tolerance_s": float,
    "betas": "floats",
    "k_values": "ints",
    "folds": int,
    "train_fraction": float,
    "seed": int,
}


def load_config(path: str | None) -> dict:
    """Parse the flat ``key = value`` config format (# starts a comment)."""
    if path is None:
        path = os.environ.get("PAPEO_CONFIG")
    if not path:
        return {}
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ParseError(f"config line {lineno}: unknown key {key!r}")
        kind = CONFIG_KEYS[key]
        if kind == "floats":
            values[key] = tuple(float(v) for v in value.split(","))
        elif kind == "ints":
            values[key] = tuple(int(v) for v in value.split(","))
        else:
            values[key] = kind(value)
    return values


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _cfg(args, config, key, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    return config.get(key, default)


def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False, sort_keys=True))
    else:
        print(human)


def _read_doc(path: str) -> model.PapeoDoc:
    return model.deserialize(Path(path).read_bytes())


def _write_doc(path: str, doc: model.PapeoDoc) -> None:
    Path(path).write_bytes(model.serialize(doc))


# ---------------------------------------------------------------------------
# subcommands

def cmd_ingest(args, config):
    layout = parse_layout(Path(args.layout).read_bytes())
    fmt = args.format or ("srt" if args.transcript.endswith(".srt") else "vtt")
    lines = parse_transcript(Path(args.transcript).read_bytes(), fmt)
    duration = args.duration_s if args.duration_s is not None else (
        lines[-1].end_s if lines else 0.0)
    doc = model.PapeoDoc(
        paper=layout,
        video=model.VideoMeta(uri=args.video_uri, duration_s=duration,
                              frame_rate=args.frame_rate),
        transcript=tuple(lines),
    )
    _write_doc(args.output, doc)
    _emit(args, {"output": args.output, "passages": len(layout.passages),
                 "lines": len(lines), "duration_s": duration},
          f"wrote {args.output}: {len(layout.passages)} passages, "
          f"{len(lines)} transcript lines")
    return 0


def _load_segment_input(args, config):
    """The segment subcommand accepts a papeo doc, a transcript, or frames."""
    path = args.input
    if path.endswith((".vtt", ".srt")):
        fmt = "srt" if path.endswith(".srt") else "vtt"
        return None, parse_transcript(Path(path).read_bytes(), fmt), None
    if path.endswith(".jsonl"):
        return None, None, load_frames_manifest(path)
    doc = _read_doc(path)
    frames = load_frames_manifest(args.frames) if args.frames else None
    return doc, list(doc.transcript), frames


def cmd_segment(args, config):
    doc, lines, frames = _load_segment_input(args, config)
    method = args.method
    if method == "punctuation":
        if lines is None:
            raise InputError("punctuation segmentation needs a transcript")
        boundaries = segmentation.segment_by_punctuation(
            lines, _cfg(args, config, "punctuation", segmentation.TERMINAL_PUNCTUATION))
    else:
        if frames is None:
            raise InputError(f"{method} segmentation needs --frames (or a .jsonl input)")
        threshold_key = "hsv_threshold" if method == "hsv" else "template_threshold"
        default = 30.0 if method == "hsv" else 0.9
        threshold = args.threshold
        if threshold is None:
            threshold = config.get(threshold_key, default)
        seg_cfg = segmentation.SegmenterConfig(
            threshold=threshold,
            min_segment_s=_cfg(args, config, "min_segment_s", 0.0),
        )
        fn = (segmentation.segment_by_hsv if method == "hsv"
              else segmentation.segment_by_template)
        boundaries = fn(frames, seg_cfg)

    if doc is not None and args.output:
        segments = segmentation.boundaries_to_segments(
            boundaries, doc.video.duration_s, doc.transcript)
        new_doc = dataclasses.replace(doc, segments=tuple(segments),
                                      links=(), sync_highlights=())
        _write_doc(args.output, new_doc)
        _emit(args, {"method": method, "boundaries_s": boundaries,
                     "segments": len(segments), "output": args.output},
              f"{method}: {len(boundaries)} boundaries -> "
              f"{len(segments)} segments -> {args.output}")
    else:
        _emit(args, {"method": method, "boundaries_s": boundaries},
              f"{method}: " + ", ".join(f"{b:.3f}" for b in boundaries))
    return 0


def cmd_link(args, config):
    doc = _read_doc(args.input)
    cfg = linking.LinkerConfig(
        p_forward=_cfg(args, config, "p_forward", 0.6),
        top_k=_cfg(args, config, "top_k", 5),
        embedder=_cfg(args, config, "embedder", "builtin"),
        endpoint=_cfg(args, config, "endpoint", None),
    )
    suggestions = linking.suggest_all(doc, cfg)
    payload = {
        sid: [{"passage_id": s.passage_id, "score": s.score} for s in ranked]
        for sid, ranked in suggestions.items()
    }
    if args.output:
        new_doc = doc
        for segment in doc.segments:
            ranked = suggestions.get(segment.id)
            if ranked:
                new_doc = model.with_link(new_doc, segment.id,
                                          [ranked[0].passage_id])
        _write_doc(args.output, new_doc)
        _emit(args, {"suggestions": payload, "linked": len(suggestions),
                     "output": args.output},
              f"linked {len(suggestions)} segments (top-1 applied) -> {args.output}")
    else:
        human = "\n".join(
            f"{sid}: " + " ".join(s["passage_id"] for s in ranked)
            for sid, ranked in payload.items()
        )
        _emit(args, {"suggestions": payload}, human)
    return 0


def cmd_export(args, config):
    doc = _read_doc(args.input)
    violations = model.validate(doc)
    if violations:
        for v in violations:
            print(f"violation: {v.type} {v.id}: {v.rule} {v.detail}".rstrip(),
                  file=sys.stderr)
        return DATA_EXIT
    Path(args.output).write_bytes(model.serialize(doc))
    stats = model.papeo_stats(doc)
    _emit(args, {"output": args.output, "stats": stats},
          f"exported valid papeo to {args.output} "
          f"({stats['num_links']} links, {len(doc.segments)} segments)")
    return 0


def _eval_config(args, config):
    return evaluation.EvalConfig(
        tolerance_s=_cfg(args, config, "tolerance_s", 3.0),
        betas=tuple(_cfg(args, config, "betas", (1.0, 2.0, 3.0))),
        k_values=tuple(_cfg(args, config, "k_values", (1, 5))),
        folds=_cfg(args, config, "folds", 4),
        train_fraction=_cfg(args, config, "train_fraction", 0.25),
    )


def _parallel_map(jobs, fn, items):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def cmd_evaluate(args, config):
    cfg = _eval_config(args, config)
    pairs = evaluation.load_dataset(args.dataset)
    seed = _cfg(args, config, "seed", 0)
    rows = []
    results = {}

    if args.task in ("segmentation", "both"):
        methods = [args.method] if args.method else list(evaluation.SEGMENTATION_METHODS)
        if not any(p.frames for p in pairs):
            methods = [m for m in methods if m == "punctuation"]
        for m in methods:
            params = {"threshold": args.threshold
                      if args.threshold is not None
                      else (config.get("hsv_threshold", 30.0) if m == "hsv"
                            else config.get("template_threshold", 0.9)),
                      "min_segment_s": _cfg(args, config, "min_segment_s", 0.0)}
            per_pair = _parallel_map(
                args.jobs,
                lambda p: evaluation.evaluate_segmentation_pair(p, m, params, cfg),
                pairs)
            results[f"segmentation/{m}"] = evaluation.macro_average(per_pair)

    if args.task in ("linking", "both"):
        algorithms = ([args.algorithm] if args.algorithm
                      else list(evaluation.LINKING_ALGORITHMS))
        for a in algorithms:
            params = {"p_forward": _cfg(args, config, "p_forward", 0.6)}
            per_pair = _parallel_map(
                args.jobs,
                lambda p: evaluation.evaluate_linking_pair(p, a, params, cfg, seed=seed),
                pairs)
            results[f"linking/{a}"] = evaluation.macro_average(per_pair)

    if args.json:
        print(json.dumps({"pairs": len(pairs), "results": results},
                         ensure_ascii=False, sort_keys=True))
        return 0
    seg_rows = [(name.split("/", 1)[1], *metrics.values())
                for name, metrics in results.items() if name.startswith("segmentation/")]
    if seg_rows:
        headers = ["Algorithm", "Precision", "Recall",
                   *(f"F{b:g}" for b in cfg.betas)]
        print(evaluation.format_table(headers, seg_rows))
    link_rows = [(name.split("/", 1)[1], *metrics.values())
                 for name, metrics in results.items() if name.startswith("linking/")]
    if link_rows:
        if seg_rows:
            print()
        headers = ["Algorithm", *(f"Top-{k}" for k in cfg.k_values)]
        print(evaluation.format_table(headers, link_rows))
    return 0


def _parse_grid(spec: str) -> dict:
    grid = {}
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        name, _, values = part.partition("=")
        if not values:
            raise InputError(f"bad grid component {part!r}")
        parsed = []
        for v in values.split(","):
            v = v.strip()
            try:
                parsed.append(int(v) if v.isdigit() else float(v))
            except ValueError:
                parsed.append(v)
        grid[name.strip()] = parsed
    if not grid:
        raise InputError("empty hyperparameter grid")
    return grid


def cmd_grid_search(args, config):
    cfg = _eval_config(args, config)
    pairs = evaluation.load_dataset(args.dataset)
    grid = _parse_grid(args.grid)
    seed = _cfg(args, config, "seed", 0)

    if args.task == "segmentation":
        method = args.method or "hsv"
        target = args.target or f"f{cfg.betas[-1]:g}"

        def evaluate_pair(pair, params):
            return evaluation.evaluate_segmentation_pair(pair, method, params, cfg)
    else:
        target = args.target or f"top{cfg.k_values[0]}"

        def evaluate_pair(pair, params):
            return evaluation.evaluate_linking_pair(pair, "viterbi", params, cfg,
                                                    seed=seed)

    result = evaluation.grid_search_cv(pairs, grid, evaluate_pair, target, cfg,
                                       seed=seed)
    folds_payload = [
        {"fold": f.fold, "best_params": f.best_params,
         "train_score": f.train_score, "test_metrics": f.test_metrics}
        for f in result.folds
    ]
    if args.json:
        print(json.dumps({"target": target, "folds": folds_payload},
                         ensure_ascii=False, sort_keys=True))
        return 0
    headers = ["Fold", *sorted(grid), f"train {target}",
               *sorted(result.folds[0].test_metrics)]
    rows = [
        (f.fold, *(f.best_params[k] for k in sorted(grid)), f.train_score,
         *(f.test_metrics[k] for k in sorted(f.test_metrics)))
        for f in result.folds
    ]
    print(evaluation.format_table(headers, rows))
    return 0


def cmd_stats(args, config):
    if args.events:
        events = []
        for raw in Path(args.events).read_text(encoding="utf-8").splitlines():
            if raw.strip():
                row = json.loads(raw)
                events.append(evaluation.ActionEvent(
                    t=row["t"], actor=row.get("actor", ""),
                    kind=row.get("kind", ""), direction=row.get("direction"),
                    payload=row.get("payload") or {},
                ))
        payload = {
            "sessions": evaluation.session_stats(events),
            "interactions": evaluation.count_interactions(events),
        }
        _emit(args, payload, json.dumps(payload, indent=2, sort_keys=True))
        return 0
    if not args.input:
        raise InputError("stats needs a papeo document or --events")
    doc = _read_doc(args.input)
    stats = model.papeo_stats(doc)
    human = "\n".join(f"{k}: {v}" for k, v in stats.items())
    _emit(args, stats, human)
    return 0


def cmd_serve(args, config):
    store = Store(args.root)
    cfg = linking.LinkerConfig(
        p_forward=_cfg(args, config, "p_forward", 0.6),
        top_k=_cfg(args, config, "top_k", 5),
        embedder=_cfg(args, config, "embedder", "builtin"),
        endpoint=_cfg(args, config, "endpoint", None),
    )
    svc = service.PapeoService(store, cfg, static_dir=args.static,
                               media_dir=args.media)
    print(f"serving on http://{args.host}:{args.port} (store: {args.root})",
          file=sys.stderr)
    service.serve(svc, args.host, args.port)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="papeo", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="key = value config file "
                        "(or set PAPEO_CONFIG)")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable JSON on stdout")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker threads for evaluation grids")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a papeo skeleton from layout + transcript")
    p.add_argument("--layout", required=True)
    p.add_argument("--transcript", required=True)
    p.add_argument("--format", choices=["srt", "vtt"])
    p.add_argument("--video-uri", default="")
    p.add_argument("--duration-s", type=float)
    p.add_argument("--frame-rate", type=float)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("segment", help="propose segment boundaries")
    p.add_argument("input", help="papeo doc, transcript (.vtt/.srt), or frames manifest (.jsonl)")
    p.add_argument("--method", choices=list(evaluation.SEGMENTATION_METHODS),
                   default="punctuation")
    p.add_argument("--frames", help="frames manifest for hsv/template on a papeo doc")
    p.add_argument("--threshold", type=float)
    p.add_argument("--min-segment-s", dest="min_segment_s", type=float)
    p.add_argument("--punctuation", dest="punctuation")
    p.add_argument("-o", "--output", help="write the doc with segments applied")

    p = sub.add_parser("link", help="suggest passage links per segment")
    p.add_argument("input")
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--p-forward", dest="p_forward", type=float)
    p.add_argument("--embedder", dest="embedder", choices=["builtin", "http"])
    p.add_argument("--endpoint", dest="endpoint")
    p.add_argument("-o", "--output", help="write the doc with top-1 links applied")

    p = sub.add_parser("export", help="validate and write final papeo.json")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("evaluate", help="score suggestion quality on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--task", choices=["segmentation", "linking", "both"],
                   default="both")
    p.add_argument("--method", choices=list(evaluation.SEGMENTATION_METHODS))
    p.add_argument("--algorithm", choices=list(evaluation.LINKING_ALGORITHMS))
    p.add_argument("--threshold", type=float)
    p.add_argument("--min-segment-s", dest="min_segment_s", type=float)
    p.add_argument("--beta", dest="betas", type=float, action="append")
    p.add_argument("--k", dest="k_values", type=int, action="append")
    p.add_argument("--tolerance-s", dest="tolerance_s", type=float)
    p.add_argument("--p-forward", dest="p_forward", type=float)
    p.add_argument("--seed", dest="seed", type=int)

    p = sub.add_parser("grid-search", help="cross-validated hyperparameter search")
    p.add_argument("--dataset", required=True)
    p.add_argument("--task", choices=["segmentation", "linking"], required=True)
    p.add_argument("--method", choices=["hsv", "template"])
    p.add_argument("--grid", required=True,
                   help='e.g. "threshold=20,40;min_segment_s=0,2"')
    p.add_argument("--target", help="metric to maximize (default: f3 / top1)")
    p.add_argument("--folds", dest="folds", type=int)
    p.add_argument("--tolerance-s", dest="tolerance_s", type=float)
    p.add_argument("--seed", dest="seed", type=int)

    p = sub.add_parser("stats", help="papeo characteristics or session analytics")
    p.add_argument("input", nargs="?")
    p.add_argument("--events", help="interaction-log JSONL")

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--root", default="./papeo-store")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8750)
    p.add_argument("--static", help="webapp bundle directory")
    p.add_argument("--media", help="media directory")

    return parser


COMMANDS = {
    "ingest": cmd_ingest,
    "segment": cmd_segment,
    "link": cmd_link,
    "export": cmd_export,
    "evaluate": cmd_evaluate,
    "grid-search": cmd_grid_search,
    "stats": cmd_stats,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except SystemExit:
        raise
    except EmbedError as e:
        print(f"error: {e}", file=sys.stderr)
        return PROVIDER_EXIT
    except (PapeoError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
