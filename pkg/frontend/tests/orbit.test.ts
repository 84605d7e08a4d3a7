import { describe, expect, it } from "vitest";

import { OrbitCamera } from "../src/orbit.js";
import { Vec3, ViewpointDict } from "../src/types.js";

const CENTER: Vec3 = [4, -3, 11];
const RADIUS = 7.5;

function vp(direction: Vec3, index = 0): ViewpointDict {
  const n = Math.hypot(...direction);
  const d: Vec3 = [direction[0] / n, direction[1] / n, direction[2] / n];
  return {
    index,
    direction: d,
    position: [
      CENTER[0] + RADIUS * d[0],
      CENTER[1] + RADIUS * d[1],
      CENTER[2] + RADIUS * d[2],
    ],
  };
}

describe("OrbitCamera", () => {
  it("round-trips a lattice viewpoint pose exactly", () => {
    const point = vp([0.36, -0.8, 0.48]);
    const cam = OrbitCamera.fromViewpoint(CENTER, point);
    const dict = cam.toCameraDict();
    expect(dict.position).toEqual(point.position); // bitwise, no recompute
    expect(dict.look_at).toEqual(CENTER);
    expect(dict.up).toEqual([0, 0, 1]);
    expect(dict.vertical_fov).toBe(45.0);
  });

  it("uses the +y up fallback near the poles, as the server does", () => {
    const cam = OrbitCamera.fromViewpoint(CENTER, vp([0.01, 0.01, 1]));
    expect(cam.toCameraDict().up).toEqual([0, 1, 0]);
  });

  it("drag keeps the eye on the sphere", () => {
    const cam = OrbitCamera.fromViewpoint(CENTER, vp([1, 0, 0]));
    cam.drag(0.3, -0.2);
    const p = cam.toCameraDict().position;
    const r = Math.hypot(p[0] - CENTER[0], p[1] - CENTER[1], p[2] - CENTER[2]);
    expect(Math.abs(r - RADIUS)).toBeLessThan(1e-9 * RADIUS);
  });

  it("drag clamps short of the poles so up never degenerates", () => {
    const cam = OrbitCamera.fromViewpoint(CENTER, vp([1, 0, 0]));
    cam.drag(0, 99); // absurd elevation gesture
    const dict = cam.toCameraDict();
    const d = [
      (dict.position[0] - CENTER[0]) / RADIUS,
      (dict.position[1] - CENTER[1]) / RADIUS,
      (dict.position[2] - CENTER[2]) / RADIUS,
    ];
    expect(Math.abs(d[2]!)).toBeLessThanOrEqual(0.999 + 1e-12);
    // a second drag still works from the clamped state
    cam.drag(0.1, 0.1);
    expect(cam.toCameraDict().up).toHaveLength(3);
  });

  it("zoom scales the radius and stays strictly positive", () => {
    const cam = OrbitCamera.fromViewpoint(CENTER, vp([0, 1, 0]));
    cam.zoom(0.5);
    expect(cam.currentRadius).toBeCloseTo(RADIUS / 2, 12);
    cam.zoom(4);
    expect(cam.currentRadius).toBeCloseTo(RADIUS * 2, 12);
    expect(() => cam.zoom(0)).toThrow(RangeError);
    expect(() => cam.zoom(-1)).toThrow(RangeError);
  });

  it("rejects a degenerate construction", () => {
    expect(() => new OrbitCamera(CENTER, [1, 0, 0], 0)).toThrow(RangeError);
    expect(() => new OrbitCamera(CENTER, [0, 0, 0], 1)).toThrow(RangeError);
  });

  it("azimuth drags compose: a full turn returns near the start", () => {
    const cam = OrbitCamera.fromViewpoint(CENTER, vp([1, 0, 0]));
    const before = cam.toCameraDict().position;
    for (let i = 0; i < 8; i++) cam.drag(Math.PI / 4, 0);
    const after = cam.toCameraDict().position;
    for (let k = 0; k < 3; k++) {
      expect(after[k]).toBeCloseTo(before[k]!, 9);
    }
  });
});
