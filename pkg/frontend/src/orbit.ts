// Spherical orbit about the run's view-sphere center, matching the server
// camera conventions (look at center, +z up with a +y fallback near the
// poles, 45 degree vertical fov). A camera seeded from a lattice viewpoint
// round-trips its pose exactly until the first gesture modifies it.

import { CameraDict, Vec3, ViewpointDict } from "./types.js";

const POLE_LIMIT = 0.999; // keep gestures clear of the exact poles

function norm(v: Vec3): number {
  return Math.hypot(v[0], v[1], v[2]);
}

function scale(v: Vec3, s: number): Vec3 {
  return [v[0] * s, v[1] * s, v[2] * s];
}

export class OrbitCamera {
  readonly center: Vec3;
  private direction: Vec3; // unit, center -> eye
  private radius: number;
  private exact: ViewpointDict | null;

  constructor(center: Vec3, direction: Vec3, radius: number) {
    if (!(radius > 0)) throw new RangeError(`radius ${radius} must be > 0`);
    const n = norm(direction);
    if (!(n > 0)) throw new RangeError("direction must be nonzero");
    this.center = [...center];
    this.direction = scale(direction, 1 / n);
    this.radius = radius;
    this.exact = null;
  }

  /** Seed from a lattice viewpoint; pose round-trips byte-exactly. */
  static fromViewpoint(center: Vec3, vp: ViewpointDict): OrbitCamera {
    const offset: Vec3 = [
      vp.position[0] - center[0],
      vp.position[1] - center[1],
      vp.position[2] - center[2],
    ];
    const cam = new OrbitCamera(center, vp.direction, norm(offset));
    cam.exact = vp;
    return cam;
  }

  get currentRadius(): number {
    return this.radius;
  }

  position(): Vec3 {
    if (this.exact) return [...this.exact.position];
    return [
      this.center[0] + this.radius * this.direction[0],
      this.center[1] + this.radius * this.direction[1],
      this.center[2] + this.radius * this.direction[2],
    ];
  }

  /**
   * Rotate by azimuth (about +z through the center) and elevation
   * radians. Elevation clamps short of the poles so the up vector
   * never degenerates mid-drag.
   */
  drag(azimuth: number, elevation: number): void {
    const d = this.exact ? this.exact.direction : this.direction;
    const phi = Math.atan2(d[1], d[0]) + azimuth;
    const limit = Math.acos(POLE_LIMIT);
    const theta = Math.acos(Math.min(1, Math.max(-1, d[2])));
    const t = Math.min(Math.PI - limit, Math.max(limit, theta - elevation));
    const z = Math.cos(t);
    const planar = Math.sin(t);
    this.direction = [planar * Math.cos(phi), planar * Math.sin(phi), z];
    this.exact = null;
  }

  /** Multiplicative zoom; radius stays strictly positive. */
  zoom(factor: number): void {
    if (!(factor > 0)) throw new RangeError(`zoom factor ${factor} must be > 0`);
    if (this.exact) {
      this.direction = scale(
        this.exact.direction,
        1 / norm(this.exact.direction),
      );
      this.radius = norm([
        this.exact.position[0] - this.center[0],
        this.exact.position[1] - this.center[1],
        this.exact.position[2] - this.center[2],
      ]);
      this.exact = null;
    }
    this.radius *= factor;
  }

  toCameraDict(): CameraDict {
    const dir = this.exact ? this.exact.direction : this.direction;
    const up: Vec3 = Math.abs(dir[2]) > 0.99 ? [0, 1, 0] : [0, 0, 1];
    return {
      position: this.position(),
      look_at: [...this.center],
      up,
      vertical_fov: 45.0,
    };
  }
}
