// Explorer shell: run list + launch form, live log stream, orbit viewport
// backed by the rerender endpoint, TF editor, trajectory playback. All
// pipeline numbers shown here come from fetched artifacts.

import { ApiClient, ApiError } from "./api.js";
import { LogModel, formatLine } from "./logview.js";
import { OrbitCamera } from "./orbit.js";
import { RenderLoop } from "./renderLoop.js";
import { TfEditor } from "./tf.js";
import { TrajectoryPlayer } from "./trajectory.js";
import {
  RenderBody,
  RunDoc,
  RunHandle,
  TrajectoryDoc,
  ViewsDoc,
} from "./types.js";

const PREVIEW_RESOLUTION = 256;
const DRAG_RADIANS_PER_PIXEL = 0.008;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function apiBase(): string {
  const q = new URLSearchParams(window.location.search).get("api");
  return q ?? window.location.origin;
}

class Explorer {
  readonly api = new ApiClient(apiBase());
  private runId: string | null = null;
  private runDoc: RunDoc | null = null;
  private views: ViewsDoc | null = null;
  private camera: OrbitCamera | null = null;
  private tf: TfEditor | null = null;
  private player: TrajectoryPlayer | null = null;
  private loop: RenderLoop | null = null;
  private logAbort: AbortController | null = null;
  private playTimer: ReturnType<typeof setInterval> | null = null;
  private frameUrl: string | null = null;

  private readonly runList = el<HTMLUListElement>("run-list");
  private readonly logBox = el<HTMLPreElement>("log-box");
  private readonly viewport = el<HTMLImageElement>("viewport");
  private readonly statusBar = el<HTMLDivElement>("status-bar");
  private readonly tfRows = el<HTMLDivElement>("tf-rows");

  async start(): Promise<void> {
    el<HTMLSpanElement>("api-base").textContent = this.api.base;
    el<HTMLButtonElement>("refresh").onclick = () => void this.refreshRuns();
    el<HTMLButtonElement>("launch").onclick = () => void this.launch();
    el<HTMLButtonElement>("tf-reset").onclick = () => this.resetTf();
    el<HTMLButtonElement>("agent-view").onclick = () => this.identityRender();
    el<HTMLButtonElement>("play").onclick = () => this.togglePlay();
    el<HTMLInputElement>("traj-pos").oninput = (ev) => {
      const target = ev.target as HTMLInputElement;
      this.seekTrajectory(Number(target.value));
    };
    this.bindViewport();
    await this.refreshRuns();
  }

  private status(text: string): void {
    this.statusBar.textContent = text;
  }

  async refreshRuns(): Promise<void> {
    try {
      const runs = await this.api.listRuns();
      this.runList.replaceChildren(
        ...runs.map((run) => this.runRow(run)),
      );
      this.status(`${runs.length} run(s)`);
    } catch (err) {
      this.status(`cannot list runs: ${String(err)}`);
    }
  }

  private runRow(run: RunHandle): HTMLLIElement {
    const li = document.createElement("li");
    li.textContent = `${run.run_id}  [${run.state}]`;
    li.classList.toggle("active", run.run_id === this.runId);
    li.onclick = () => void this.open(run.run_id);
    return li;
  }

  private async launch(): Promise<void> {
    const input = el<HTMLInputElement>("launch-input").value.trim();
    const meta = el<HTMLInputElement>("launch-meta").value.trim();
    const rawCfg = el<HTMLTextAreaElement>("launch-config").value.trim();
    let config: Record<string, unknown> = {};
    if (rawCfg) {
      try {
        config = JSON.parse(rawCfg) as Record<string, unknown>;
      } catch {
        this.status("config is not valid JSON");
        return;
      }
    }
    try {
      const handle = await this.api.startRun(input, meta, config);
      this.status(`started ${handle.run_id}`);
      await this.refreshRuns();
      await this.open(handle.run_id);
    } catch (err) {
      this.status(
        err instanceof ApiError ? err.message : `launch failed: ${String(err)}`,
      );
    }
  }

  private async open(runId: string): Promise<void> {
    this.closeRun();
    this.runId = runId;
    this.status(`opening ${runId}`);
    this.followLog(runId);
    await this.waitAndLoad(runId);
    await this.refreshRuns();
  }

  private closeRun(): void {
    this.logAbort?.abort();
    this.logAbort = null;
    if (this.playTimer !== null) clearInterval(this.playTimer);
    this.playTimer = null;
    this.logBox.textContent = "";
    this.runDoc = null;
    this.views = null;
    this.camera = null;
    this.tf = null;
    this.player = null;
    this.loop = null;
  }

  private followLog(runId: string): void {
    const model = new LogModel();
    this.logAbort = new AbortController();
    void this.api
      .streamLog(
        runId,
        (ev) => {
          const line = model.push(ev);
          if (!line) return;
          this.logBox.textContent += formatLine(line) + "\n";
          this.logBox.scrollTop = this.logBox.scrollHeight;
        },
        this.logAbort.signal,
      )
      .catch(() => undefined); // aborted on run switch
  }

  private async waitAndLoad(runId: string): Promise<void> {
    for (;;) {
      const handle = await this.api.getRun(runId);
      if (["done", "degraded", "failed"].includes(handle.state)) {
        if (handle.state === "failed") {
          this.status(`${runId} failed: ${handle.error ?? "?"}`);
          return;
        }
        break;
      }
      this.status(`${runId}: ${handle.state}`);
      await new Promise((resolve) => setTimeout(resolve, 500));
    }
    await this.loadArtifacts(runId);
  }

  private async loadArtifacts(runId: string): Promise<void> {
    const run = await this.api.artifactJson<RunDoc>(runId, "run.json");
    const views = await this.api.artifactJson<ViewsDoc>(runId, "views.json");
    const trajectory = await this.api.artifactJson<TrajectoryDoc>(
      runId,
      "trajectory.json",
    );
    const tfBytes = await this.api.artifact(runId, "tf.json");
    this.runDoc = run;
    this.views = views;
    this.tf = new TfEditor(tfBytes);
    this.player = new TrajectoryPlayer(trajectory);
    const vp = views.lattice[run.final_view_index];
    if (vp) {
      this.camera = OrbitCamera.fromViewpoint(views.sphere.center, vp);
    }
    this.loop = new RenderLoop(
      (body) => this.api.render(runId, body),
      (bytes) => this.showFrame(bytes),
    );
    this.renderTfRows();
    this.identityRender();
    const traj = el<HTMLInputElement>("traj-pos");
    traj.max = String(this.player.length - 1);
    traj.value = "0";
    const extras = run.degradations.length
      ? `  degraded: ${run.degradations.join(", ")}`
      : "";
    this.status(
      `${runId}: ${run.status}, ${run.census.chats} chats${extras}`,
    );
  }

  private showFrame(bytes: Uint8Array): void {
    const old = this.frameUrl;
    const copy = new Uint8Array(bytes); // detach from any shared buffer
    this.frameUrl = URL.createObjectURL(
      new Blob([copy.buffer], { type: "image/png" }),
    );
    this.viewport.src = this.frameUrl;
    if (old) URL.revokeObjectURL(old);
  }

  /** Exact agent rendering: no camera or TF override, full resolution. */
  private identityRender(): void {
    if (!this.loop || !this.runDoc) return;
    const resolution = Number(this.runDoc.config.output_resolution ?? 256);
    this.loop.requestNow({ resolution });
  }

  private gestureBody(): RenderBody {
    const body: RenderBody = {
      camera: this.camera!.toCameraDict(),
      resolution: PREVIEW_RESOLUTION,
    };
    const tfOverride = this.tf?.renderOverride();
    if (tfOverride) body.tf = tfOverride;
    return body;
  }

  private bindViewport(): void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    this.viewport.onpointerdown = (ev) => {
      if (!this.camera) return;
      dragging = true;
      lastX = ev.clientX;
      lastY = ev.clientY;
      this.viewport.setPointerCapture(ev.pointerId);
    };
    this.viewport.onpointermove = (ev) => {
      if (!dragging || !this.camera || !this.loop) return;
      const dx = ev.clientX - lastX;
      const dy = ev.clientY - lastY;
      lastX = ev.clientX;
      lastY = ev.clientY;
      this.camera.drag(
        -dx * DRAG_RADIANS_PER_PIXEL,
        dy * DRAG_RADIANS_PER_PIXEL,
      );
      this.loop.request(this.gestureBody());
    };
    this.viewport.onpointerup = (ev) => {
      if (!dragging) return;
      dragging = false;
      this.viewport.releasePointerCapture(ev.pointerId);
      this.loop?.flush();
    };
    this.viewport.onwheel = (ev) => {
      if (!this.camera || !this.loop) return;
      ev.preventDefault();
      this.camera.zoom(ev.deltaY > 0 ? 1.1 : 1 / 1.1);
      this.loop.request(this.gestureBody());
    };
  }

  private renderTfRows(): void {
    if (!this.tf) return;
    const rows = this.tf.points.map((pt, i) => {
      const row = document.createElement("div");
      row.className = "tf-row";
      const value = document.createElement("input");
      value.type = "number";
      value.step = "0.01";
      value.value = pt.value.toFixed(4);
      value.onchange = () => {
        value.value = this.tf!.moveValue(i, Number(value.value)).toFixed(4);
        this.pushTfRender();
      };
      const color = document.createElement("input");
      color.type = "color";
      color.value = rgbToHex(pt.color);
      color.oninput = () => {
        this.tf!.setColor(i, hexToRgb(color.value));
        this.pushTfRender();
      };
      const opacity = document.createElement("input");
      opacity.type = "range";
      opacity.min = "0";
      opacity.max = "1";
      opacity.step = "0.01";
      opacity.value = String(pt.opacity);
      opacity.oninput = () => {
        this.tf!.setOpacity(i, Number(opacity.value));
        this.pushTfRender();
      };
      row.append(value, color, opacity);
      return row;
    });
    this.tfRows.replaceChildren(...rows);
  }

  private pushTfRender(): void {
    if (!this.loop || !this.camera) return;
    this.loop.request(this.gestureBody());
    this.loop.flush();
  }

  private resetTf(): void {
    if (!this.tf) return;
    this.tf.reset();
    this.renderTfRows();
    // pristine editor: next render carries no tf override at all
    this.identityRender();
  }

  private togglePlay(): void {
    if (!this.player || !this.loop) return;
    if (this.playTimer !== null) {
      clearInterval(this.playTimer);
      this.playTimer = null;
      el<HTMLButtonElement>("play").textContent = "Play";
      return;
    }
    el<HTMLButtonElement>("play").textContent = "Pause";
    this.playTimer = setInterval(() => {
      if (!this.player || !this.loop) return;
      const cam = this.player.step();
      el<HTMLInputElement>("traj-pos").value = String(this.player.position);
      this.loop.requestNow({ camera: cam, resolution: PREVIEW_RESOLUTION });
    }, 250);
  }

  private seekTrajectory(i: number): void {
    if (!this.player || !this.loop) return;
    const cam = this.player.seek(i);
    this.loop.requestNow({ camera: cam, resolution: PREVIEW_RESOLUTION });
  }
}

function rgbToHex(rgb: [number, number, number]): string {
  const part = (x: number) =>
    Math.round(Math.min(1, Math.max(0, x)) * 255)
      .toString(16)
      .padStart(2, "0");
  return `#${part(rgb[0])}${part(rgb[1])}${part(rgb[2])}`;
}

function hexToRgb(hex: string): [number, number, number] {
  const n = parseInt(hex.slice(1), 16);
  return [((n >> 16) & 255) / 255, ((n >> 8) & 255) / 255, (n & 255) / 255];
}

window.addEventListener("DOMContentLoaded", () => {
  void new Explorer().start();
});
