/**
 * Interaction-event batching: the reader and authoring surfaces record
 * actions locally and flush them to the events endpoint every five seconds
 * (or on demand), keeping batches sorted the way the API requires.
 */

import { PapeoApi } from "./api.js";
import { ActionEvent } from "./types.js";

export type Scheduler = (cb: () => void, everyMs: number) => () => void;

const intervalScheduler: Scheduler = (cb, everyMs) => {
  const handle = setInterval(cb, everyMs);
  return () => clearInterval(handle);
};

export class EventBatcher {
  private pending: ActionEvent[] = [];
  private stop: (() => void) | null = null;

  constructor(
    private api: PapeoApi,
    private docId: string,
    private actor: string,
    private now: () => number = () => Date.now() / 1000,
    private scheduler: Scheduler = intervalScheduler,
    private flushEveryMs = 5000,
  ) {}

  start(): void {
    if (this.stop) return;
    this.stop = this.scheduler(() => void this.flush(), this.flushEveryMs);
  }

  halt(): void {
    this.stop?.();
    this.stop = null;
  }

  record(kind: string, payload: Record<string, unknown> = {}, direction?: string): void {
    this.pending.push({
      t: this.now(),
      actor: this.actor,
      kind,
      direction: direction ?? null,
      payload,
    });
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  /** Send everything recorded so far; returns the accepted count. */
  async flush(): Promise<number> {
    if (!this.pending.length) return 0;
    const batch = this.pending;
    this.pending = [];
    batch.sort((a, b) => a.t - b.t);
    try {
      return await this.api.postEvents(this.docId, batch);
    } catch (error) {
      // put the batch back so a transient failure loses nothing
      this.pending = batch.concat(this.pending);
      throw error;
    }
  }
}
