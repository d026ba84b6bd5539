/**
 * Resumable ndjson event stream client.
 *
 * One line per EventEnvelope; reconnects with ?since=<last seq> after a
 * drop and surfaces connection state so the shell can show a stale banner.
 */

import type { EventEnvelope } from "./types.js";

/** Incremental line splitter: feed chunks, get complete parsed envelopes. */
export class NdjsonBuffer {
  private pending = "";

  push(chunk: string): EventEnvelope[] {
    this.pending += chunk;
    const out: EventEnvelope[] = [];
    let index: number;
    while ((index = this.pending.indexOf("\n")) >= 0) {
      const line = this.pending.slice(0, index).trim();
      this.pending = this.pending.slice(index + 1);
      if (!line) continue;
      try {
        out.push(JSON.parse(line) as EventEnvelope);
      } catch {
        // half-written or garbled line: drop it, the stream resumes by seq
      }
    }
    return out;
  }
}

export interface StreamCallbacks {
  onEvent: (envelope: EventEnvelope) => void;
  onStatus: (status: "connecting" | "live" | "stale") => void;
}

export class EventStream {
  private cursor = 0;
  private stopped = false;
  private backoffMs = 500;

  constructor(
    private readonly baseUrl: string,
    private readonly callbacks: StreamCallbacks,
  ) {}

  get lastSeq(): number {
    return this.cursor;
  }

  stop(): void {
    this.stopped = true;
  }

  async run(): Promise<void> {
    while (!this.stopped) {
      this.callbacks.onStatus("connecting");
      try {
        await this.consumeOnce();
      } catch {
        // fall through to retry
      }
      if (this.stopped) return;
      this.callbacks.onStatus("stale");
      await sleep(this.backoffMs);
      this.backoffMs = Math.min(this.backoffMs * 2, 10_000);
    }
  }

  private async consumeOnce(): Promise<void> {
    const url = `${this.baseUrl}/api/v1/events?since=${this.cursor}`;
    const response = await fetch(url);
    if (!response.ok || !response.body) {
      throw new Error(`stream failed: ${response.status}`);
    }
    this.callbacks.onStatus("live");
    this.backoffMs = 500;
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const buffer = new NdjsonBuffer();
    for (;;) {
      const { done, value } = await reader.read();
      if (this.stopped) {
        await reader.cancel();
        return;
      }
      if (done) return;
      for (const envelope of buffer.push(decoder.decode(value, { stream: true }))) {
        if (envelope.seq > 0) this.cursor = envelope.seq;
        this.callbacks.onEvent(envelope);
      }
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
