// Incremental Server-Sent Events parser over fetch response bodies.
// EventSource would do the job in a browser, but a hand parser also runs
// under node for tests and gives us the raw id field without ceremony.

export interface SseEvent {
  id: string;
  event: string;
  data: string;
}

export class SseParser {
  private buf = "";
  private id = "";
  private event = "";
  private data: string[] = [];

  /** Feed a text chunk; returns every event completed by it. */
  feed(chunk: string): SseEvent[] {
    this.buf += chunk;
    const out: SseEvent[] = [];
    for (;;) {
      const nl = this.buf.indexOf("\n");
      if (nl < 0) break;
      let line = this.buf.slice(0, nl);
      this.buf = this.buf.slice(nl + 1);
      if (line.endsWith("\r")) line = line.slice(0, -1);
      const ev = this.line(line);
      if (ev) out.push(ev);
    }
    return out;
  }

  private line(line: string): SseEvent | null {
    if (line === "") return this.dispatch();
    if (line.startsWith(":")) return null; // comment / keep-alive
    const colon = line.indexOf(":");
    const field = colon < 0 ? line : line.slice(0, colon);
    let value = colon < 0 ? "" : line.slice(colon + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "id") this.id = value;
    else if (field === "event") this.event = value;
    else if (field === "data") this.data.push(value);
    return null;
  }

  private dispatch(): SseEvent | null {
    if (this.data.length === 0 && this.event === "") return null;
    const ev = {
      id: this.id,
      event: this.event || "message",
      data: this.data.join("\n"),
    };
    this.event = "";
    this.data = [];
    return ev;
  }
}

/** Drain a streaming body through the parser, one callback per event. */
export async function readSseStream(
  body: ReadableStream<Uint8Array>,
  onEvent: (ev: SseEvent) => void,
  signal?: AbortSignal,
): Promise<void> {
  const parser = new SseParser();
  const decoder = new TextDecoder();
  const reader = body.getReader();
  try {
    for (;;) {
      if (signal?.aborted) return;
      const { done, value } = await reader.read();
      if (done) return;
      for (const ev of parser.feed(decoder.decode(value, { stream: true }))) {
        onEvent(ev);
      }
    }
  } finally {
    reader.releaseLock();
  }
}
