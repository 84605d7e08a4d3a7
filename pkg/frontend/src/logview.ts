// Append-only log model fed by the SSE stream. Sequence numbers are
// monotone per run, so replays after a reconnect are dropped by seq.

import { SseEvent } from "./sse.js";

export interface LogLine {
  seq: number;
  event: string;
  detail: Record<string, unknown>;
  raw: string;
}

export class LogModel {
  readonly lines: LogLine[] = [];
  lastSeq = -1;
  dropped = 0;

  /** Returns the appended line, or null for replays and junk. */
  push(ev: SseEvent): LogLine | null {
    let doc: Record<string, unknown>;
    try {
      doc = JSON.parse(ev.data) as Record<string, unknown>;
    } catch {
      this.dropped += 1;
      return null;
    }
    const seq = typeof doc.seq === "number" ? doc.seq : Number(ev.id);
    if (!Number.isFinite(seq) || seq <= this.lastSeq) {
      this.dropped += 1;
      return null;
    }
    const line: LogLine = {
      seq,
      event: typeof doc.event === "string" ? doc.event : "?",
      detail: doc,
      raw: ev.data,
    };
    this.lastSeq = seq;
    this.lines.push(line);
    return line;
  }
}

/** One-line human rendering of a log record. */
export function formatLine(line: LogLine): string {
  const skip = new Set(["seq", "ts", "event"]);
  const parts = Object.entries(line.detail)
    .filter(([k]) => !skip.has(k))
    .map(([k, v]) => `${k}=${JSON.stringify(v)}`);
  return `#${line.seq} ${line.event}${parts.length ? " " + parts.join(" ") : ""}`;
}
