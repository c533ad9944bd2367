/**
 * Typed client for the papeo HTTP API. Every mutation carries the revision
 * it was computed against in an If-Match header; 409 responses surface as
 * ConflictError so controllers can refetch and replay.
 */

import {
  ActionEvent,
  ConflictError,
  FetchedPapeo,
  InvalidError,
  LinkSuggestions,
  SegmentProposals,
  VideoSegment,
} from "./types.js";

/** The slice of the HTTP API the UI needs; mock this in tests. */
export interface PapeoApi {
  getPapeo(id: string): Promise<FetchedPapeo>;
  upsertSegment(id: string, revision: number, segment: VideoSegment): Promise<number>;
  deleteSegment(id: string, revision: number, segmentId: string): Promise<number>;
  setLink(id: string, revision: number, segmentId: string, passageIds: string[]): Promise<number>;
  clearLink(id: string, revision: number, segmentId: string): Promise<number>;
  addSyncHighlight(
    id: string,
    revision: number,
    highlight: {
      segment_id: string;
      passage_id: string;
      transcript_span: [number, number, number];
      passage_span: [number, number];
    },
  ): Promise<{ revision: number; highlight_id: string }>;
  suggestSegments(id: string): Promise<SegmentProposals>;
  suggestLinks(id: string, segmentId: string, k?: number): Promise<LinkSuggestions>;
  postEvents(id: string, events: ActionEvent[]): Promise<number>;
}

export class HttpPapeoApi implements PapeoApi {
  constructor(private base: string, private fetchImpl: typeof fetch = fetch) {}

  private async call<T>(
    method: string,
    path: string,
    body?: unknown,
    revision?: number,
  ): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (revision !== undefined) headers["If-Match"] = String(revision);
    const resp = await this.fetchImpl(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (resp.status === 409) throw new ConflictError();
    if (resp.status === 422) {
      const payload = await resp.json();
      throw new InvalidError(payload.error ?? "invalid", payload.violations ?? []);
    }
    if (!resp.ok) throw new Error(`${method} ${path} -> ${resp.status}`);
    if (resp.status === 204) return undefined as T;
    return (await resp.json()) as T;
  }

  getPapeo(id: string): Promise<FetchedPapeo> {
    return this.call("GET", `/papeos/${id}`);
  }

  async upsertSegment(id: string, revision: number, segment: VideoSegment): Promise<number> {
    const out = await this.call<{ revision: number }>(
      "PUT",
      `/papeos/${id}/segments/${segment.id}`,
      { start_ms: segment.start_ms, end_ms: segment.end_ms, line_indices: segment.line_indices },
      revision,
    );
    return out.revision;
  }

  async deleteSegment(id: string, revision: number, segmentId: string): Promise<number> {
    const out = await this.call<{ revision: number }>(
      "DELETE", `/papeos/${id}/segments/${segmentId}`, undefined, revision);
    return out.revision;
  }

  async setLink(id: string, revision: number, segmentId: string, passageIds: string[]): Promise<number> {
    const out = await this.call<{ revision: number }>(
      "PUT", `/papeos/${id}/links/${segmentId}`, { passage_ids: passageIds }, revision);
    return out.revision;
  }

  async clearLink(id: string, revision: number, segmentId: string): Promise<number> {
    const out = await this.call<{ revision: number }>(
      "DELETE", `/papeos/${id}/links/${segmentId}`, undefined, revision);
    return out.revision;
  }

  addSyncHighlight(
    id: string,
    revision: number,
    highlight: {
      segment_id: string;
      passage_id: string;
      transcript_span: [number, number, number];
      passage_span: [number, number];
    },
  ): Promise<{ revision: number; highlight_id: string }> {
    return this.call("POST", `/papeos/${id}/sync-highlights`, highlight, revision);
  }

  suggestSegments(id: string): Promise<SegmentProposals> {
    return this.call("GET", `/papeos/${id}/suggest/segments`);
  }

  suggestLinks(id: string, segmentId: string, k = 5): Promise<LinkSuggestions> {
    return this.call("GET", `/papeos/${id}/suggest/links/${segmentId}?k=${k}`);
  }

  async postEvents(id: string, events: ActionEvent[]): Promise<number> {
    const out = await this.call<{ accepted: number }>(
      "POST", `/papeos/${id}/events`, { events });
    return out.accepted;
  }
}
