// Working copy of the agent's transfer function. The fetched tf.json
// bytes are kept verbatim: reset discards every edit, and a pristine
// editor contributes no tf override to render requests, so the server
// renders from its own saved file. Either way "reset" means byte-equal
// to what the agent published.

import { TfControlPoint, TfDict, Vec3 } from "./types.js";

function clamp01(x: number): number {
  return Math.min(1, Math.max(0, x));
}

function parse(bytes: Uint8Array): TfDict {
  const doc = JSON.parse(new TextDecoder().decode(bytes)) as TfDict;
  if (!Array.isArray(doc.control_points)) {
    throw new TypeError("tf document has no control_points");
  }
  return doc;
}

export class TfEditor {
  private readonly originalBytes: Uint8Array;
  private working: TfDict;
  private dirty = false;

  constructor(bytes: Uint8Array) {
    this.originalBytes = bytes.slice();
    this.working = parse(this.originalBytes);
  }

  get mode(): string {
    return this.working.mode;
  }

  get points(): readonly TfControlPoint[] {
    return this.working.control_points;
  }

  get isDirty(): boolean {
    return this.dirty;
  }

  /** The agent's tf.json exactly as fetched. */
  agentBytes(): Uint8Array {
    return this.originalBytes.slice();
  }

  /**
   * Move a control point's scalar value, clamped to its neighbors so
   * the point ordering is preserved.
   */
  moveValue(i: number, value: number): number {
    const pts = this.working.control_points;
    const pt = pts[i];
    if (!pt) throw new RangeError(`no control point ${i}`);
    const lo = i > 0 ? pts[i - 1]!.value : -Infinity;
    const hi = i < pts.length - 1 ? pts[i + 1]!.value : Infinity;
    const v = Math.min(hi, Math.max(lo, value));
    if (v !== pt.value) {
      pt.value = v;
      this.dirty = true;
    }
    return v;
  }

  setOpacity(i: number, opacity: number): void {
    const pt = this.working.control_points[i];
    if (!pt) throw new RangeError(`no control point ${i}`);
    const o = clamp01(opacity);
    if (o !== pt.opacity) {
      pt.opacity = o;
      this.dirty = true;
    }
  }

  setColor(i: number, color: Vec3): void {
    const pt = this.working.control_points[i];
    if (!pt) throw new RangeError(`no control point ${i}`);
    pt.color = [clamp01(color[0]), clamp01(color[1]), clamp01(color[2])];
    this.dirty = true;
  }

  /** Discard all edits; the working copy reparses the original bytes. */
  reset(): void {
    this.working = parse(this.originalBytes);
    this.dirty = false;
  }

  /**
   * TF override for a render body: undefined while pristine, so the
   * server uses its own tf.json and the result matches the agent's
   * rendering exactly.
   */
  renderOverride(): TfDict | undefined {
    return this.dirty ? structuredClone(this.working) : undefined;
  }
}
