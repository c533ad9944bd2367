/**
 * Reader-side state machine: video notes in the margin, color-coded
 * highlight bars, single-active-note playback that never bleeds into the
 * next segment, autoplay with note-centric scrolling (the active note owns
 * a fixed viewport slot while the paper moves), and the segmented timeline.
 */

import { PapeoDoc, Passage, VideoSegment } from "./types.js";

/** Minimal player surface the reader drives; tests supply a fake. */
export interface SegmentPlayer {
  readonly currentTimeMs: number;
  readonly playing: boolean;
  play(): void;
  pause(): void;
  seek(ms: number): void;
  /** Registers the single time-update subscriber. */
  onTimeUpdate(cb: (ms: number) => void): void;
}

export interface HighlightBar {
  segmentId: string;
  passageId: string;
  color: string;
}

export interface TimelineBlock {
  segmentId: string;
  startMs: number;
  endMs: number;
  color: string;
  current: boolean;
  watched: boolean;
  /** Title of the (sub)section the note's first linked passage sits in. */
  sectionTitle: string;
}

export interface NotePlacement {
  segmentId: string;
  /** Note anchor in paper coordinates (next to its first linked passage). */
  anchorY: number;
  /** Where the note renders in the viewport after scrolling. */
  viewportY: number;
}

const PALETTE = [
  "#e6572b", "#2b7de6", "#2bb24c", "#d9a520", "#8e44ad", "#17a2b8",
  "#e0529c", "#6b8e23",
];

const PAGE_HEIGHT_PT = 792;
const NOTE_HEIGHT = 120;

export function segmentColor(index: number): string {
  return PALETTE[index % PALETTE.length]!;
}

/** One bar per (segment, passage) link, color keyed to the segment. */
export function renderHighlightBars(doc: PapeoDoc): HighlightBar[] {
  const colorBySegment = new Map<string, string>();
  doc.segments.forEach((s, i) => colorBySegment.set(s.id, segmentColor(i)));
  const bars: HighlightBar[] = [];
  for (const link of doc.links) {
    const color = colorBySegment.get(link.segment_id);
    if (color === undefined) continue;
    for (const passageId of link.passage_ids) {
      bars.push({ segmentId: link.segment_id, passageId, color });
    }
  }
  return bars;
}

/** Paper-coordinate anchor of a passage (pages stacked vertically). */
export function passageAnchorY(passage: Passage): number {
  return (passage.page - 1) * PAGE_HEIGHT_PT + passage.bbox.y;
}

function sectionTitleOf(doc: PapeoDoc, segmentId: string): string {
  const link = doc.links.find((l) => l.segment_id === segmentId);
  const first = link?.passage_ids[0];
  const passage = doc.paper.passages.find((p) => p.id === first);
  const path = passage?.section_path ?? [];
  return path.length ? path[path.length - 1]! : "";
}

/** Frame timestamps (1 fps) previewed while scrubbing over a highlight bar. */
export function scrubPreviewTimes(segment: VideoSegment): number[] {
  const times: number[] = [];
  for (let t = segment.start_ms; t < segment.end_ms; t += 1000) times.push(t);
  return times;
}

export type PlaybackState = "idle" | "playing" | "ended";

export interface ReaderEventSink {
  (kind: string, payload?: Record<string, unknown>): void;
}

export class ReaderController {
  private activeNote: string | null = null;
  private playback: PlaybackState = "idle";
  private watched = new Set<string>();
  autoplay = false;
  /** Viewport slot the active note occupies; fixed across autoplay advances. */
  private slotY: number | null = null;
  private paperScrollY = 0;

  constructor(
    private doc: PapeoDoc,
    private player: SegmentPlayer,
    private emit: ReaderEventSink = () => {},
  ) {
    this.player.onTimeUpdate((ms) => this.handleTimeUpdate(ms));
  }

  get activeNoteId(): string | null {
    return this.activeNote;
  }

  get playbackState(): PlaybackState {
    return this.playback;
  }

  get watchedSegments(): ReadonlySet<string> {
    return this.watched;
  }

  get paperScroll(): number {
    return this.paperScrollY;
  }

  private segment(id: string): VideoSegment {
    const found = this.doc.segments.find((s) => s.id === id);
    if (!found) throw new Error(`unknown segment ${id}`);
    return found;
  }

  private noteAnchorY(segmentId: string): number {
    const link = this.doc.links.find((l) => l.segment_id === segmentId);
    const ids = link ? link.passage_ids : [];
    const anchors = this.doc.paper.passages
      .filter((p) => ids.includes(p.id))
      .map(passageAnchorY);
    if (!anchors.length) return 0;
    return Math.min(...anchors);
  }

  /**
   * Activate one video note: any other note deactivates, playback starts at
   * the segment start, and the note claims the viewport slot (on first
   * activation, wherever its anchor already is).
   */
  activateNote(segmentId: string): void {
    const segment = this.segment(segmentId);
    if (this.activeNote !== null && this.activeNote !== segmentId) {
      this.player.pause();
    }
    this.activeNote = segmentId;
    this.playback = "playing";
    if (this.slotY === null) {
      this.slotY = this.noteAnchorY(segmentId) - this.paperScrollY;
    }
    this.scrollPaperToActive();
    this.player.seek(segment.start_ms);
    this.player.play();
    this.emit("note-activate", { segment_id: segmentId });
  }

  /** Pause and drop the active note (clicking outside the note). */
  deactivate(): void {
    if (this.activeNote === null) return;
    this.player.pause();
    this.playback = "idle";
    this.activeNote = null;
    this.emit("pause");
  }

  /** Restart the segment that just ended. */
  rewatch(): void {
    if (this.activeNote === null) return;
    this.activateNote(this.activeNote);
  }

  /** Jump to the next note (the end-of-segment option and autoplay step). */
  next(): boolean {
    if (this.activeNote === null) return false;
    const at = this.doc.segments.findIndex((s) => s.id === this.activeNote);
    const following = this.doc.segments[at + 1];
    if (!following) return false;
    this.activateNote(following.id);
    return true;
  }

  private scrollPaperToActive(): void {
    if (this.activeNote === null || this.slotY === null) return;
    // note-centric scrolling: the note keeps its slot, the paper moves so
    // the linked passages sit next to it
    this.paperScrollY = this.noteAnchorY(this.activeNote) - this.slotY;
  }

  /** Viewport position of a note given the current scroll. */
  notePlacement(segmentId: string): NotePlacement {
    const anchorY = this.noteAnchorY(segmentId);
    let viewportY = anchorY - this.paperScrollY;
    if (segmentId === this.activeNote && this.slotY !== null) {
      viewportY = this.slotY;
    }
    return { segmentId, anchorY, viewportY };
  }

  /**
   * Margin layout for every note: anchored next to linked passages, the
   * active note exactly at its bar, neighbors pushed away if they overlap.
   */
  layoutNotes(): NotePlacement[] {
    const placements = this.doc.segments.map((s) => this.notePlacement(s.id));
    placements.sort((a, b) => a.anchorY - b.anchorY || a.segmentId.localeCompare(b.segmentId));
    const activeAt = placements.findIndex((p) => p.segmentId === this.activeNote);
    if (activeAt >= 0) {
      for (let i = activeAt + 1; i < placements.length; i++) {
        const prev = placements[i - 1]!;
        const cur = placements[i]!;
        if (cur.viewportY < prev.viewportY + NOTE_HEIGHT) {
          cur.viewportY = prev.viewportY + NOTE_HEIGHT;
        }
      }
      for (let i = activeAt - 1; i >= 0; i--) {
        const nxt = placements[i + 1]!;
        const cur = placements[i]!;
        if (cur.viewportY > nxt.viewportY - NOTE_HEIGHT) {
          cur.viewportY = nxt.viewportY - NOTE_HEIGHT;
        }
      }
    }
    return placements;
  }

  /** Transcript line indices of the active segment spoken up to now. */
  highlightedLines(): number[] {
    if (this.activeNote === null) return [];
    const segment = this.segment(this.activeNote);
    const t = this.player.currentTimeMs;
    return segment.line_indices.filter((i) => {
      const line = this.doc.transcript[i];
      return line !== undefined && line.start_ms <= t;
    });
  }

  /** Segmented timeline over the whole video, one block per note. */
  timeline(): TimelineBlock[] {
    return this.doc.segments.map((s, i) => ({
      segmentId: s.id,
      startMs: s.start_ms,
      endMs: s.end_ms,
      color: segmentColor(i),
      current: s.id === this.activeNote,
      watched: this.watched.has(s.id),
      sectionTitle: sectionTitleOf(this.doc, s.id),
    }));
  }

  /** Clicking a timeline block navigates via note-centric scrolling. */
  clickTimelineBlock(segmentId: string): void {
    this.activateNote(segmentId);
  }

  private handleTimeUpdate(ms: number): void {
    if (this.activeNote === null || this.playback !== "playing") return;
    const segment = this.segment(this.activeNote);
    if (ms < segment.end_ms) return;
    // each note streams exactly one segment: halt instead of bleeding over
    this.player.pause();
    this.player.seek(segment.end_ms);
    this.playback = "ended";
    this.watched.add(segment.id);
    this.emit("pause", { at_ms: segment.end_ms });
    if (this.autoplay && !this.next()) {
      this.autoplay = false;
    }
  }
}
