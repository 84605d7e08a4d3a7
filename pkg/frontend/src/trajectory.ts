// Trajectory playback over the saved dense camera path. Playback only
// picks poses out of trajectory.json; every frame comes from the server.

import { CameraDict, TrajectoryDoc } from "./types.js";

export class TrajectoryPlayer {
  private index = 0;
  playing = false;

  constructor(
    readonly doc: TrajectoryDoc,
    readonly frameStride = 1,
  ) {
    if (doc.dense_path.length === 0) throw new RangeError("empty trajectory");
    if (frameStride < 1) throw new RangeError("frameStride must be >= 1");
  }

  get length(): number {
    return this.doc.dense_path.length;
  }

  get position(): number {
    return this.index;
  }

  current(): CameraDict {
    return this.doc.dense_path[this.index]!;
  }

  seek(i: number): CameraDict {
    const n = this.length;
    this.index = ((i % n) + n) % n;
    return this.current();
  }

  /** Advance by the stride, wrapping at the end. */
  step(delta = 1): CameraDict {
    return this.seek(this.index + delta * this.frameStride);
  }

  /** Pose index of anchor k (anchors sit on segment boundaries). */
  anchorPose(k: number): number {
    return k * this.doc.samples_per_segment;
  }
}
