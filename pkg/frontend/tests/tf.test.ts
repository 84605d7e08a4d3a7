import { describe, expect, it } from "vitest";

import { TfEditor } from "../src/tf.js";

// Formatting (key order, spacing, float text) is deliberately quirky:
// byte equality must come from keeping the fetched bytes, not reserializing.
const TF_TEXT = `{
  "control_points": [
    {"value": 0.20, "color": [1.0, 0.0, 0.0], "opacity": 0.15},
    {"value": 0.50, "color": [0.0, 1.0, 0.0], "opacity": 0.3100},
    {"value": 0.80, "color": [0.0, 0.0, 1.0], "opacity": 0.47}
  ],
  "width": 0.0,
  "mode": "continuous",
  "schema_version": 1
}
`;

function bytes(): Uint8Array {
  return new TextEncoder().encode(TF_TEXT);
}

describe("TfEditor", () => {
  it("starts pristine: no render override, agent bytes preserved", () => {
    const ed = new TfEditor(bytes());
    expect(ed.isDirty).toBe(false);
    expect(ed.renderOverride()).toBeUndefined();
    expect(ed.agentBytes()).toEqual(bytes());
    expect(ed.points.map((p) => p.value)).toEqual([0.2, 0.5, 0.8]);
  });

  it("edits mark it dirty and show up in the render override", () => {
    const ed = new TfEditor(bytes());
    ed.setOpacity(1, 0.9);
    expect(ed.isDirty).toBe(true);
    const override = ed.renderOverride();
    expect(override?.control_points[1]?.opacity).toBe(0.9);
    // the override is a copy; mutating it does not touch the editor
    override!.control_points[1]!.opacity = 0.1;
    expect(ed.points[1]?.opacity).toBe(0.9);
  });

  it("clamps opacity and color channels to [0, 1]", () => {
    const ed = new TfEditor(bytes());
    ed.setOpacity(0, 7);
    ed.setColor(2, [2, -1, 0.5]);
    expect(ed.points[0]?.opacity).toBe(1);
    expect(ed.points[2]?.color).toEqual([1, 0, 0.5]);
  });

  it("moveValue clamps to the neighbors, preserving ordering", () => {
    const ed = new TfEditor(bytes());
    expect(ed.moveValue(1, 0.95)).toBe(0.8); // cannot pass the next point
    expect(ed.moveValue(1, 0.01)).toBe(0.2); // nor the previous one
    expect(ed.moveValue(1, 0.6)).toBe(0.6);
    const values = ed.points.map((p) => p.value);
    expect([...values].sort((a, b) => a - b)).toEqual(values);
  });

  it("reset restores the agent TF byte-equal and drops the override", () => {
    const ed = new TfEditor(bytes());
    ed.setOpacity(0, 0.99);
    ed.moveValue(2, 0.6);
    ed.setColor(1, [0.1, 0.2, 0.3]);
    ed.reset();
    expect(ed.isDirty).toBe(false);
    expect(ed.renderOverride()).toBeUndefined();
    expect(Array.from(ed.agentBytes())).toEqual(Array.from(bytes()));
    expect(ed.points.map((p) => p.opacity)).toEqual([0.15, 0.31, 0.47]);
  });

  it("rejects documents without control points and bad indices", () => {
    const enc = new TextEncoder();
    expect(() => new TfEditor(enc.encode('{"mode": "x"}'))).toThrow(TypeError);
    const ed = new TfEditor(bytes());
    expect(() => ed.setOpacity(9, 0.5)).toThrow(RangeError);
    expect(() => ed.moveValue(-1, 0.5)).toThrow(RangeError);
  });
});
