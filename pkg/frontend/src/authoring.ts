/**
 * Mixed-initiative authoring flow: sentence-group segment suggestions,
 * thumb dragging, clickable passage targets, a top-5 suggestion cursor, and
 * sync-highlight capture. Every mutation goes through the API with the
 * revision it was computed against; on conflict the controller refetches
 * and replays the pending change. Accepted suggestions are counted
 * separately from manual links to measure how often suggestions get used.
 */

import { PapeoApi } from "./api.js";
import {
  ConflictError,
  LinkSuggestion,
  PapeoDoc,
  SegmentProposal,
  VideoSegment,
} from "./types.js";

export interface DraftSegment {
  id: string;
  startMs: number;
  endMs: number;
  lineIndices: number[];
}

export interface SuggestionUsage {
  accepted: number;
  linkedSegments: number;
}

export class AuthoringController {
  private doc!: PapeoDoc;
  private revision = 0;
  private proposals: SegmentProposal[] = [];
  draft: DraftSegment | null = null;

  /** Ranked suggestions for the segment just created, cursor 1-based. */
  private suggestions: LinkSuggestion[] = [];
  private cursor = 0;
  private suggestionsFor: string | null = null;

  /** Pending manual passage selection (clickable targets). */
  selectedPassageIds: string[] = [];

  private usage: SuggestionUsage = { accepted: 0, linkedSegments: 0 };
  private nextSegmentSerial = 0;

  constructor(private api: PapeoApi, private docId: string) {}

  async load(): Promise<void> {
    const fetched = await this.api.getPapeo(this.docId);
    this.doc = fetched.papeo;
    this.revision = fetched.revision;
    const proposed = await this.api.suggestSegments(this.docId);
    this.proposals = proposed.proposals;
  }

  get document(): PapeoDoc {
    return this.doc;
  }

  get currentRevision(): number {
    return this.revision;
  }

  get segmentProposals(): SegmentProposal[] {
    return this.proposals;
  }

  get suggestionUsage(): SuggestionUsage {
    return { ...this.usage };
  }

  // -- segment drafting ---------------------------------------------------

  /**
   * Clicking a sentence group selects a segment containing all of the
   * group's lines.
   */
  clickSentenceGroup(groupIndex: number): DraftSegment {
    const group = this.proposals[groupIndex];
    if (!group) throw new Error(`no sentence group ${groupIndex}`);
    this.draft = {
      id: `seg-${this.nextSegmentSerial++}`,
      startMs: group.start_ms,
      endMs: group.end_ms,
      lineIndices: [...group.line_indices],
    };
    return this.draft;
  }

  /** Clicking the timeline creates an initial one-second draft. */
  clickTimeline(atMs: number): DraftSegment {
    this.draft = {
      id: `seg-${this.nextSegmentSerial++}`,
      startMs: atMs,
      endMs: Math.min(atMs + 1000, this.doc.video.duration_ms),
      lineIndices: [],
    };
    return this.draft;
  }

  /** Select or de-select one transcript line to correct a suggestion. */
  toggleLine(lineIndex: number): void {
    if (!this.draft) throw new Error("no draft segment");
    const at = this.draft.lineIndices.indexOf(lineIndex);
    if (at >= 0) this.draft.lineIndices.splice(at, 1);
    else {
      this.draft.lineIndices.push(lineIndex);
      this.draft.lineIndices.sort((a, b) => a - b);
    }
    const lines = this.draft.lineIndices
      .map((i) => this.doc.transcript[i])
      .filter((l) => l !== undefined);
    if (lines.length) {
      this.draft.startMs = Math.min(...lines.map((l) => l.start_ms));
      this.draft.endMs = Math.max(...lines.map((l) => l.end_ms));
    }
  }

  /** Drag the start/end thumbs to fine-tune the range. */
  dragThumbs(startMs: number, endMs: number): void {
    if (!this.draft) throw new Error("no draft segment");
    this.draft.startMs = Math.max(0, startMs);
    this.draft.endMs = Math.min(endMs, this.doc.video.duration_ms);
  }

  /**
   * Persist the draft; on success the paper-side suggestion pass runs and
   * the top-1 suggestion is preselected for review.
   */
  async commitSegment(): Promise<VideoSegment> {
    if (!this.draft) throw new Error("no draft segment");
    const segment: VideoSegment = {
      id: this.draft.id,
      start_ms: this.draft.startMs,
      end_ms: this.draft.endMs,
      line_indices: [...this.draft.lineIndices],
    };
    await this.mutate((revision) =>
      this.api.upsertSegment(this.docId, revision, segment));
    this.draft = null;
    const ranked = await this.api.suggestLinks(this.docId, segment.id, 5);
    this.suggestions = ranked.suggestions;
    this.suggestionsFor = segment.id;
    this.cursor = this.suggestions.length ? 1 : 0;
    return segment;
  }

  // -- link suggestions -----------------------------------------------------

  get suggestionCursor(): number {
    return this.cursor;
  }

  get currentSuggestion(): LinkSuggestion | null {
    return this.cursor ? this.suggestions[this.cursor - 1] ?? null : null;
  }

  get suggestionCount(): number {
    return this.suggestions.length;
  }

  /** The navigation bar cycles through the top suggestions. */
  cycleSuggestion(step = 1): LinkSuggestion | null {
    if (!this.suggestions.length) return null;
    const n = this.suggestions.length;
    this.cursor = ((this.cursor - 1 + step) % n + n) % n + 1;
    return this.currentSuggestion;
  }

  /** Scroll target for review: the passage of the suggestion under cursor. */
  reviewTargetPassage(): string | null {
    return this.currentSuggestion?.passage_id ?? null;
  }

  /**
   * Accept the suggestion under the cursor: the stored link equals the
   * suggestion payload, and only this path counts toward suggestion usage.
   */
  async acceptSuggestion(): Promise<void> {
    const suggestion = this.currentSuggestion;
    if (!suggestion || !this.suggestionsFor) throw new Error("no suggestion selected");
    const segmentId = this.suggestionsFor;
    await this.mutate((revision) =>
      this.api.setLink(this.docId, revision, segmentId, [suggestion.passage_id]));
    this.usage.accepted += 1;
    this.usage.linkedSegments += 1;
    this.suggestions = [];
    this.cursor = 0;
    this.suggestionsFor = null;
  }

  // -- manual linking ---------------------------------------------------------

  /** Passages render as clickable targets; clicking toggles selection. */
  clickPassage(passageId: string): void {
    const at = this.selectedPassageIds.indexOf(passageId);
    if (at >= 0) this.selectedPassageIds.splice(at, 1);
    else this.selectedPassageIds.push(passageId);
  }

  /** Drag over the paper to select every passage the region touches. */
  dragSelectRegion(page: number, x0: number, y0: number, x1: number, y1: number): string[] {
    const [left, right] = x0 <= x1 ? [x0, x1] : [x1, x0];
    const [top, bottom] = y0 <= y1 ? [y0, y1] : [y1, y0];
    const hit = this.doc.paper.passages.filter((p) => {
      if (p.page !== page) return false;
      const b = p.bbox;
      return b.x < right && b.x + b.w > left && b.y < bottom && b.y + b.h > top;
    });
    this.selectedPassageIds = hit.map((p) => p.id);
    return [...this.selectedPassageIds];
  }

  /** Link the manually selected passages (does not count as suggestion use). */
  async saveManualLink(segmentId: string): Promise<void> {
    if (!this.selectedPassageIds.length) throw new Error("no passages selected");
    const passageIds = [...this.selectedPassageIds];
    await this.mutate((revision) =>
      this.api.setLink(this.docId, revision, segmentId, passageIds));
    this.usage.linkedSegments += 1;
    this.selectedPassageIds = [];
    if (this.suggestionsFor === segmentId) {
      this.suggestions = [];
      this.cursor = 0;
      this.suggestionsFor = null;
    }
  }

  // -- sync highlights -----------------------------------------------------

  async saveSyncHighlight(
    segmentId: string,
    passageId: string,
    transcriptSpan: [number, number, number],
    passageSpan: [number, number],
  ): Promise<string> {
    let highlightId = "";
    await this.mutate(async (revision) => {
      const out = await this.api.addSyncHighlight(this.docId, revision, {
        segment_id: segmentId,
        passage_id: passageId,
        transcript_span: transcriptSpan,
        passage_span: passageSpan,
      });
      highlightId = out.highlight_id;
      return out.revision;
    });
    return highlightId;
  }

  // -- plumbing ------------------------------------------------------------

  /**
   * Run one mutation against the current revision; on 409 refetch the
   * document and replay once.
   */
  private async mutate(op: (revision: number) => Promise<number>): Promise<void> {
    try {
      this.revision = await op(this.revision);
    } catch (error) {
      if (!(error instanceof ConflictError)) throw error;
      const fetched = await this.api.getPapeo(this.docId);
      this.doc = fetched.papeo;
      this.revision = fetched.revision;
      this.revision = await op(this.revision);
    }
    const fetched = await this.api.getPapeo(this.docId);
    this.doc = fetched.papeo;
    this.revision = fetched.revision;
  }
}
