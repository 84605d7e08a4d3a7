import { describe, expect, it } from "vitest";

import { TrajectoryPlayer } from "../src/trajectory.js";
import { CameraDict, TrajectoryDoc } from "../src/types.js";

function doc(poses: number, spg = 4): TrajectoryDoc {
  const dense: CameraDict[] = Array.from({ length: poses }, (_, i) => ({
    position: [i, 0, 0],
    look_at: [0, 0, 0],
    up: [0, 0, 1],
    vertical_fov: 45,
  }));
  return {
    schema_version: 1,
    anchor_indices: [0, 2],
    anchors: [],
    samples_per_segment: spg,
    dense_path: dense,
  };
}

describe("TrajectoryPlayer", () => {
  it("steps through poses and wraps at the end", () => {
    const p = new TrajectoryPlayer(doc(9));
    expect(p.length).toBe(9);
    expect(p.current().position[0]).toBe(0);
    for (let i = 1; i <= 8; i++) expect(p.step().position[0]).toBe(i);
    expect(p.step().position[0]).toBe(0); // wrapped
  });

  it("seek clamps into range with modular arithmetic", () => {
    const p = new TrajectoryPlayer(doc(9));
    expect(p.seek(11).position[0]).toBe(2);
    expect(p.seek(-1).position[0]).toBe(8);
  });

  it("honors a frame stride", () => {
    const p = new TrajectoryPlayer(doc(9), 3);
    expect(p.step().position[0]).toBe(3);
    expect(p.step().position[0]).toBe(6);
  });

  it("anchor poses land on segment boundaries", () => {
    const p = new TrajectoryPlayer(doc(9));
    expect(p.anchorPose(0)).toBe(0);
    expect(p.anchorPose(2)).toBe(8);
  });

  it("rejects an empty path or bad stride", () => {
    expect(() => new TrajectoryPlayer(doc(0))).toThrow(RangeError);
    expect(() => new TrajectoryPlayer(doc(5), 0)).toThrow(RangeError);
  });
});
