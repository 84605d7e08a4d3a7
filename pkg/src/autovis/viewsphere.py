"""View-sphere sampling and camera path densification.

Candidate viewpoints are spread over a sphere enclosing the volume with
a Fibonacci lattice; ordered anchor viewpoints become a smooth camera
path through centripetal Catmull-Rom interpolation re-projected onto
the sphere.  Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TooFewAnchors
from .render import Camera
from .volume import Volume

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class Viewpoint:
    """A sample on the view sphere: unit direction from the center."""

    index: int
    direction: tuple[float, float, float]
    position: tuple[float, float, float]

    def to_dict(self) -> dict:
        return {"index": self.index, "direction": list(self.direction),
                "position": list(self.position)}

    @classmethod
    def from_dict(cls, d: dict) -> "Viewpoint":
        return cls(index=int(d["index"]), direction=tuple(d["direction"]),
                   position=tuple(d["position"]))


@dataclass(frozen=True)
class Trajectory:
    """Ordered anchors plus the densified open camera path through them."""

    anchors: tuple[Viewpoint, ...]
    dense_path: tuple[Camera, ...]
    samples_per_segment: int

    def to_dict(self) -> dict:
        return {
            "anchor_indices": [a.index for a in self.anchors],
            "anchors": [a.to_dict() for a in self.anchors],
            "samples_per_segment": self.samples_per_segment,
            "dense_path": [c.to_dict() for c in self.dense_path],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trajectory":
        return cls(
            anchors=tuple(Viewpoint.from_dict(a) for a in d["anchors"]),
            dense_path=tuple(Camera.from_dict(c) for c in d["dense_path"]),
            samples_per_segment=int(d["samples_per_segment"]),
        )


def view_sphere(v: Volume) -> tuple[tuple[float, float, float], float]:
    """Center and radius of the enclosing view sphere.

    Radius is 1.5x the volume's half-diagonal so candidate renders frame
    the whole volume.
    """
    return tuple(v.centroid), 1.5 * v.world_diagonal / 2.0


def fibonacci_lattice(k: int, center, radius: float) -> list[Viewpoint]:
    """k near-uniform viewpoints on the sphere, ordered by spiral index.

    z_i = 1 - 2(i+0.5)/k with azimuth advancing by the golden angle.
    """
    if k < 1:
        raise ConfigError(f"lattice size {k} < 1")
    if radius <= 0:
        raise ConfigError(f"sphere radius {radius} <= 0")
    cx, cy, cz = (float(c) for c in center)
    pts = []
    for i in range(k):
        z = 1.0 - 2.0 * (i + 0.5) / k
        rho = math.sqrt(max(0.0, 1.0 - z * z))
        az = 2.0 * math.pi * i / GOLDEN_RATIO
        d = (rho * math.cos(az), rho * math.sin(az), z)
        pos = (cx + radius * d[0], cy + radius * d[1], cz + radius * d[2])
        pts.append(Viewpoint(index=i, direction=d, position=pos))
    return pts


def camera_for(vp: Viewpoint, center) -> Camera:
    """Camera at a viewpoint, aimed at the sphere center.

    Up is +z, falling back to +y for near-polar directions where +z
    would be parallel to the view axis.
    """
    up = (0.0, 0.0, 1.0)
    if abs(vp.direction[2]) > 0.99:
        up = (0.0, 1.0, 0.0)
    return Camera(position=vp.position,
                  look_at=tuple(float(c) for c in center), up=up)


def _catmull_rom_point(p0, p1, p2, p3, t0, t1, t2, t3, u):
    a1 = (t1 - u) / (t1 - t0) * p0 + (u - t0) / (t1 - t0) * p1
    a2 = (t2 - u) / (t2 - t1) * p1 + (u - t1) / (t2 - t1) * p2
    a3 = (t3 - u) / (t3 - t2) * p2 + (u - t2) / (t3 - t2) * p3
    b1 = (t2 - u) / (t2 - t0) * a1 + (u - t0) / (t2 - t0) * a2
    b2 = (t3 - u) / (t3 - t1) * a2 + (u - t1) / (t3 - t1) * a3
    return (t2 - u) / (t2 - t1) * b1 + (u - t1) / (t2 - t1) * b2


def _dense_positions(ctrl: np.ndarray, samples_per_segment: int,
                     closed: bool) -> np.ndarray:
    """Centripetal Catmull-Rom samples through ctrl[1:-1] (open) control rows.

    ``ctrl`` already includes the two phantom/wrap rows at each end.
    """
    n_seg = ctrl.shape[0] - 3
    out = []
    for s in range(n_seg):
        p0, p1, p2, p3 = ctrl[s], ctrl[s + 1], ctrl[s + 2], ctrl[s + 3]
        t0 = 0.0
        t1 = t0 + max(math.sqrt(np.linalg.norm(p1 - p0)), 1e-12)
        t2 = t1 + max(math.sqrt(np.linalg.norm(p2 - p1)), 1e-12)
        t3 = t2 + max(math.sqrt(np.linalg.norm(p3 - p2)), 1e-12)
        for j in range(samples_per_segment):
            u = t1 + (t2 - t1) * j / samples_per_segment
            out.append(_catmull_rom_point(p0, p1, p2, p3, t0, t1, t2, t3, u))
    if not closed:
        out.append(ctrl[-2].copy())
    return np.asarray(out)


def catmull_rom_path(anchors: list[Viewpoint], samples_per_segment: int,
                     center, radius: float, closed: bool = False) -> Trajectory:
    """Densify ordered anchors into an on-sphere camera path.

    Open paths use reflected phantom endpoints and emit
    samples_per_segment*(n-1)+1 poses; closed paths wrap the control
    points and emit samples_per_segment*n poses (the first pose is not
    repeated at the end).  Every dense sample is re-projected onto the
    sphere.
    """
    if len(anchors) < 2:
        raise TooFewAnchors(f"need >= 2 anchors, got {len(anchors)}")
    if samples_per_segment < 1:
        raise ConfigError(f"samples_per_segment {samples_per_segment} < 1")
    c = np.asarray([float(x) for x in center])
    pts = np.asarray([a.position for a in anchors], dtype=np.float64)
    if closed:
        ctrl = np.vstack([pts[-1], pts, pts[0], pts[1]])
    else:
        ctrl = np.vstack([2.0 * pts[0] - pts[1], pts, 2.0 * pts[-1] - pts[-2]])
    dense = _dense_positions(ctrl, samples_per_segment, closed)
    rel = dense - c
    norms = np.linalg.norm(rel, axis=1, keepdims=True)
    norms[norms < 1e-300] = 1.0
    dense = c + radius * rel / norms
    cams = []
    for p in dense:
        d = (p - c) / radius
        vp = Viewpoint(index=-1, direction=tuple(d), position=tuple(p))
        cams.append(camera_for(vp, tuple(c)))
    return Trajectory(anchors=tuple(anchors), dense_path=tuple(cams),
                      samples_per_segment=samples_per_segment)
