// Debounced single-flight render scheduler. A gesture may fire dozens of
// camera updates per second; the server should see at most one request in
// flight, always for the newest state, and a frame that arrives after a
// newer one has been applied must be discarded.

import { RenderBody } from "./types.js";

export type SendFn = (body: RenderBody, seq: number) => Promise<Uint8Array>;
export type FrameFn = (bytes: Uint8Array, seq: number) => void;

export interface RenderLoopOptions {
  debounceMs?: number;
  /** >1 only makes sense for transports that may reorder; default 1. */
  maxInFlight?: number;
}

export class RenderLoop {
  readonly stats = { issued: 0, applied: 0, discarded: 0, failed: 0 };
  private readonly debounceMs: number;
  private readonly maxInFlight: number;
  private seq = 0;
  private appliedSeq = 0;
  private inFlight = 0;
  private pending: RenderBody | null = null;
  private queued: RenderBody | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly send: SendFn,
    private readonly onFrame: FrameFn,
    opts: RenderLoopOptions = {},
  ) {
    this.debounceMs = opts.debounceMs ?? 100;
    this.maxInFlight = opts.maxInFlight ?? 1;
  }

  /** Latest gesture state; (re)arms the trailing-edge debounce timer. */
  request(body: RenderBody): void {
    this.pending = body;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.takePending();
    }, this.debounceMs);
  }

  /** Gesture released: skip the remaining debounce delay. */
  flush(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.takePending();
  }

  /** Bypass the debounce entirely (buttons, trajectory playback). */
  requestNow(body: RenderBody): void {
    this.pending = body;
    this.flush();
  }

  get inFlightCount(): number {
    return this.inFlight;
  }

  private takePending(): void {
    if (this.pending === null) return;
    const body = this.pending;
    this.pending = null;
    this.issue(body);
  }

  private issue(body: RenderBody): void {
    if (this.inFlight >= this.maxInFlight) {
      this.queued = body; // newest wins; older queued state is obsolete
      return;
    }
    const seq = ++this.seq;
    this.inFlight += 1;
    this.stats.issued += 1;
    this.send(body, seq).then(
      (bytes) => {
        this.settle();
        this.accept(seq, bytes);
      },
      () => {
        this.settle();
        this.stats.failed += 1;
      },
    );
  }

  private settle(): void {
    this.inFlight -= 1;
    const next = this.queued;
    this.queued = null;
    if (next !== null) this.issue(next);
  }

  private accept(seq: number, bytes: Uint8Array): void {
    if (seq <= this.appliedSeq) {
      this.stats.discarded += 1;
      return;
    }
    this.appliedSeq = seq;
    this.stats.applied += 1;
    this.onFrame(bytes, seq);
  }
}
