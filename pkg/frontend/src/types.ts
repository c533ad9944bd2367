/**
 * Wire types for papeo documents and the HTTP API.
 * Field names and the millisecond time encoding match papeo.json exactly.
 */

export type PassageKind = "paragraph" | "figure" | "table" | "caption" | "heading";

export interface BBox {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface Passage {
  id: string;
  kind: PassageKind;
  section_path: string[];
  page: number;
  bbox: BBox;
  text: string;
}

export interface PaperDoc {
  paper_id: string;
  title: string;
  source: string;
  passages: Passage[];
}

export interface VideoMeta {
  uri: string;
  duration_ms: number;
  frame_rate: number | null;
}

export interface TranscriptLine {
  index: number;
  start_ms: number;
  end_ms: number;
  text: string;
}

export interface VideoSegment {
  id: string;
  start_ms: number;
  end_ms: number;
  line_indices: number[];
}

export interface PassageLink {
  segment_id: string;
  passage_ids: string[];
}

export interface SyncHighlight {
  id: string;
  segment_id: string;
  passage_id: string;
  transcript_span: [number, number, number];
  passage_span: [number, number];
}

export interface PapeoDoc {
  schema_version: string;
  paper: PaperDoc;
  video: VideoMeta;
  transcript: TranscriptLine[];
  segments: VideoSegment[];
  links: PassageLink[];
  sync_highlights: SyncHighlight[];
}

// -- API payloads -------------------------------------------------------------

export interface FetchedPapeo {
  id: string;
  revision: number;
  papeo: PapeoDoc;
}

export interface SegmentProposal {
  start_ms: number;
  end_ms: number;
  line_indices: number[];
  text: string;
}

export interface SegmentProposals {
  revision: number;
  proposals: SegmentProposal[];
}

export interface LinkSuggestion {
  passage_id: string;
  score: number;
}

export interface LinkSuggestions {
  revision: number;
  rouge_only: boolean;
  suggestions: LinkSuggestion[];
}

export interface ActionEvent {
  t: number;
  actor: string;
  kind: string;
  direction?: string | null;
  payload?: Record<string, unknown>;
}

/** Revision conflict (HTTP 409): refetch and replay. */
export class ConflictError extends Error {
  constructor(message = "stale revision") {
    super(message);
    this.name = "ConflictError";
  }
}

/** Document invariant violation (HTTP 422). */
export class InvalidError extends Error {
  constructor(message: string, public violations: unknown[] = []) {
    super(message);
    this.name = "InvalidError";
  }
}
