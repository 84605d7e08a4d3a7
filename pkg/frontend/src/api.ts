// Thin client over the service. Bytes pass through untouched: frames and
// artifacts are returned exactly as received so byte-level comparisons
// against the server's files stay meaningful.

import { readSseStream, SseEvent } from "./sse.js";
import { RenderBody, RunHandle } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function fail(res: Response): Promise<never> {
  let detail = res.statusText;
  try {
    const doc = (await res.json()) as { detail?: unknown };
    if (doc.detail !== undefined) detail = JSON.stringify(doc.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(res.status, detail);
}

export class ApiClient {
  readonly base: string;

  constructor(base: string) {
    this.base = base.endsWith("/") ? base.slice(0, -1) : base;
  }

  private url(path: string): string {
    return this.base + path;
  }

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.url(path));
    if (!res.ok) await fail(res);
    return (await res.json()) as T;
  }

  async listRuns(): Promise<RunHandle[]> {
    const doc = await this.getJson<{ runs: RunHandle[] }>("/runs");
    return doc.runs;
  }

  async getRun(id: string): Promise<RunHandle> {
    return this.getJson<RunHandle>(`/runs/${id}`);
  }

  async startRun(
    input: string,
    meta: string,
    config?: Record<string, unknown>,
  ): Promise<RunHandle> {
    const res = await fetch(this.url("/runs"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ input, meta, config: config ?? {} }),
    });
    if (!res.ok) await fail(res);
    return (await res.json()) as RunHandle;
  }

  async listArtifacts(id: string): Promise<string[]> {
    const doc = await this.getJson<{ artifacts: string[] }>(
      `/runs/${id}/artifacts`,
    );
    return doc.artifacts;
  }

  artifactUrl(id: string, name: string): string {
    return this.url(`/runs/${id}/artifacts/${name}`);
  }

  async artifact(id: string, name: string): Promise<Uint8Array> {
    const res = await fetch(this.artifactUrl(id, name));
    if (!res.ok) await fail(res);
    return new Uint8Array(await res.arrayBuffer());
  }

  async artifactJson<T>(id: string, name: string): Promise<T> {
    return this.getJson<T>(`/runs/${id}/artifacts/${name}`);
  }

  async render(id: string, body: RenderBody): Promise<Uint8Array> {
    const res = await fetch(this.url(`/runs/${id}/render`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) await fail(res);
    return new Uint8Array(await res.arrayBuffer());
  }

  /** Stream the run log; resolves when the server sends its end event. */
  async streamLog(
    id: string,
    onEvent: (ev: SseEvent) => void,
    signal?: AbortSignal,
  ): Promise<void> {
    const res = await fetch(this.url(`/runs/${id}/log`), { signal });
    if (!res.ok) await fail(res);
    if (!res.body) throw new ApiError(0, "log stream has no body");
    let ended = false;
    await readSseStream(
      res.body,
      (ev) => {
        if (ev.event === "end") {
          ended = true;
          return;
        }
        if (!ended) onEvent(ev);
      },
      signal,
    );
  }
}
