/** In-memory API mock mirroring the server's revision and validation
 * semantics, plus a tick-driven fake player. */

import { PapeoApi } from "../src/api.js";
import {
  ActionEvent,
  ConflictError,
  FetchedPapeo,
  InvalidError,
  LinkSuggestions,
  PapeoDoc,
  SegmentProposals,
  VideoSegment,
} from "../src/types.js";

export function makeDoc(): PapeoDoc {
  const passage = (
    id: string, kind: "paragraph" | "figure" | "heading", section: string,
    page: number, y: number, text: string,
  ) => ({
    id, kind, section_path: [section], page,
    bbox: { x: 72, y, w: 450, h: 60 }, text,
  });
  return {
    schema_version: "1",
    paper: {
      paper_id: "demo",
      title: "Demo paper",
      source: "fixture",
      passages: [
        passage("h1", "heading", "1 Introduction", 1, 80, "1 Introduction"),
        passage("p1", "paragraph", "1 Introduction", 1, 120, "alpha bravo charlie delta"),
        passage("p2", "paragraph", "1 Introduction", 1, 260, "echo foxtrot golf hotel"),
        passage("h2", "heading", "2 Design", 2, 80, "2 Design"),
        passage("p3", "paragraph", "2 Design", 2, 120, "india juliet kilo lima"),
        passage("p4", "paragraph", "2 Design", 2, 300, "mike november oscar papa"),
        passage("fig1", "figure", "2 Design", 2, 480, ""),
        passage("p5", "paragraph", "3 Results", 3, 120, "quebec romeo sierra tango"),
      ],
    },
    video: { uri: "talk.mp4", duration_ms: 60_000, frame_rate: null },
    transcript: [
      { index: 0, start_ms: 0, end_ms: 4_000, text: "alpha bravo" },
      { index: 1, start_ms: 4_000, end_ms: 10_000, text: "charlie delta." },
      { index: 2, start_ms: 10_000, end_ms: 16_000, text: "echo foxtrot golf." },
      { index: 3, start_ms: 16_000, end_ms: 24_000, text: "india juliet" },
      { index: 4, start_ms: 24_000, end_ms: 30_000, text: "kilo lima." },
      { index: 5, start_ms: 30_000, end_ms: 42_000, text: "mike november oscar." },
      { index: 6, start_ms: 42_000, end_ms: 55_000, text: "quebec romeo sierra." },
    ],
    segments: [
      { id: "s1", start_ms: 0, end_ms: 10_000, line_indices: [0, 1] },
      { id: "s2", start_ms: 10_000, end_ms: 30_000, line_indices: [2, 3, 4] },
      { id: "s3", start_ms: 30_000, end_ms: 55_000, line_indices: [5, 6] },
    ],
    links: [
      { segment_id: "s1", passage_ids: ["p1"] },
      { segment_id: "s2", passage_ids: ["p2", "p3"] },
      { segment_id: "s3", passage_ids: ["p5"] },
    ],
    sync_highlights: [],
  };
}

export class MockApi implements PapeoApi {
  doc: PapeoDoc;
  revision = 1;
  calls: string[] = [];
  postedEvents: ActionEvent[][] = [];
  failNextPost = false;
  /** Ranked suggestions served per segment id. */
  cannedSuggestions = new Map<string, { passage_id: string; score: number }[]>();

  constructor(doc: PapeoDoc = makeDoc(), public docId = "doc1") {
    this.doc = structuredClone(doc);
  }

  /** A competing author bumps the revision out from under the controller. */
  interfere(): void {
    this.revision += 1;
  }

  private checkRevision(revision: number): void {
    if (revision !== this.revision) throw new ConflictError();
  }

  async getPapeo(): Promise<FetchedPapeo> {
    this.calls.push("get");
    return { id: this.docId, revision: this.revision, papeo: structuredClone(this.doc) };
  }

  async upsertSegment(_id: string, revision: number, segment: VideoSegment): Promise<number> {
    this.calls.push(`upsertSegment:${segment.id}`);
    this.checkRevision(revision);
    const rest = this.doc.segments.filter((s) => s.id !== segment.id);
    for (const other of rest) {
      if (segment.start_ms < other.end_ms && other.start_ms < segment.end_ms) {
        throw new InvalidError("segment-overlap", [{ rule: "segment-overlap" }]);
      }
    }
    rest.push(structuredClone(segment));
    rest.sort((a, b) => a.start_ms - b.start_ms);
    this.doc.segments = rest;
    return ++this.revision;
  }

  async deleteSegment(_id: string, revision: number, segmentId: string): Promise<number> {
    this.calls.push(`deleteSegment:${segmentId}`);
    this.checkRevision(revision);
    this.doc.segments = this.doc.segments.filter((s) => s.id !== segmentId);
    this.doc.links = this.doc.links.filter((l) => l.segment_id !== segmentId);
    return ++this.revision;
  }

  async setLink(_id: string, revision: number, segmentId: string, passageIds: string[]): Promise<number> {
    this.calls.push(`setLink:${segmentId}=${passageIds.join(",")}`);
    this.checkRevision(revision);
    const known = new Set(this.doc.paper.passages.map((p) => p.id));
    if (!passageIds.length || passageIds.some((p) => !known.has(p))) {
      throw new InvalidError("dangling-reference", [{ rule: "dangling-reference" }]);
    }
    this.doc.links = this.doc.links.filter((l) => l.segment_id !== segmentId);
    this.doc.links.push({ segment_id: segmentId, passage_ids: [...passageIds] });
    return ++this.revision;
  }

  async clearLink(_id: string, revision: number, segmentId: string): Promise<number> {
    this.calls.push(`clearLink:${segmentId}`);
    this.checkRevision(revision);
    this.doc.links = this.doc.links.filter((l) => l.segment_id !== segmentId);
    return ++this.revision;
  }

  async addSyncHighlight(
    _id: string,
    revision: number,
    highlight: {
      segment_id: string;
      passage_id: string;
      transcript_span: [number, number, number];
      passage_span: [number, number];
    },
  ): Promise<{ revision: number; highlight_id: string }> {
    this.calls.push(`addSyncHighlight:${highlight.segment_id}`);
    this.checkRevision(revision);
    const id = `hl${this.doc.sync_highlights.length}`;
    this.doc.sync_highlights.push({ id, ...highlight });
    return { revision: ++this.revision, highlight_id: id };
  }

  async suggestSegments(): Promise<SegmentProposals> {
    this.calls.push("suggestSegments");
    // sentence-level grouping of the fixture transcript: groups close on
    // lines ending with terminal punctuation
    const proposals = [];
    let current: number[] = [];
    for (const line of this.doc.transcript) {
      current.push(line.index);
      if (/[.!?]["')\]]*$/.test(line.text.trimEnd())) {
        const lines = current.map((i) => this.doc.transcript[i]!);
        proposals.push({
          start_ms: lines[0]!.start_ms,
          end_ms: lines[lines.length - 1]!.end_ms,
          line_indices: [...current],
          text: lines.map((l) => l.text).join(" "),
        });
        current = [];
      }
    }
    return { revision: this.revision, proposals };
  }

  async suggestLinks(_id: string, segmentId: string): Promise<LinkSuggestions> {
    this.calls.push(`suggestLinks:${segmentId}`);
    const canned = this.cannedSuggestions.get(segmentId) ?? [
      { passage_id: "p1", score: -1.0 },
      { passage_id: "p2", score: -1.5 },
      { passage_id: "p3", score: -2.0 },
      { passage_id: "p4", score: -2.5 },
      { passage_id: "p5", score: -3.0 },
    ];
    return { revision: this.revision, rouge_only: false, suggestions: canned };
  }

  async postEvents(_id: string, events: ActionEvent[]): Promise<number> {
    if (this.failNextPost) {
      this.failNextPost = false;
      throw new Error("network down");
    }
    this.postedEvents.push(events);
    return events.length;
  }
}

/** Deterministic player driven by test ticks. */
export class FakePlayer {
  currentTimeMs = 0;
  playing = false;
  private listener: ((ms: number) => void) | null = null;

  play(): void {
    this.playing = true;
  }

  pause(): void {
    this.playing = false;
  }

  seek(ms: number): void {
    this.currentTimeMs = ms;
  }

  onTimeUpdate(cb: (ms: number) => void): void {
    this.listener = cb;
  }

  /** Advance wall clock; emits a time update while playing. */
  tick(dtMs: number): void {
    if (!this.playing) return;
    this.currentTimeMs += dtMs;
    this.listener?.(this.currentTimeMs);
  }

  /** Run ticks until the player pauses itself (or the budget runs out). */
  run(dtMs: number, budgetMs: number): void {
    let spent = 0;
    while (this.playing && spent < budgetMs) {
      this.tick(dtMs);
      spent += dtMs;
    }
  }
}
