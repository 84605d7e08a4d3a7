"""Opacity/color transfer functions: the ramp family, value sampling, builders, export.

Two TF modes exist.  Continuous TFs interpolate color and opacity
piecewise-linearly between control points and clamp outside them.
Discrete TFs are zero-opacity everywhere except inside step bands of
half-width ``width`` centered on accepted control values.
"""

from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateRange, EmptyRecords
from .records import IsovalueRecord
from .volume import Volume

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RampOpacity:
    """Linear opacity ramp that is zero below its starting value ``rsv``."""

    rsv: float
    v_min: float
    v_max: float

    def __post_init__(self):
        if not (self.v_min <= self.rsv < self.v_max):
            raise ConfigError(
                f"ramp start {self.rsv} outside [{self.v_min}, {self.v_max})")


def ramp_opacity(ramp: RampOpacity, v):
    """Opacity of the ramp at ``v``: 0 below rsv, linear to 1 at v_max, clamped above.

    Accepts scalars or numpy arrays.
    """
    arr = np.asarray(v, dtype=np.float64)
    out = np.clip((arr - ramp.rsv) / (ramp.v_max - ramp.rsv), 0.0, 1.0)
    out = np.where(arr < ramp.rsv, 0.0, out)
    if np.isscalar(v) or getattr(v, "ndim", 1) == 0:
        return float(out)
    return out


def sample_rsvs(v_min: float, v_max: float, n: int) -> list[float]:
    """n evenly spaced ramp starting values: v_min + i*range/n, all below v_max."""
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not v_min < v_max:
        raise DegenerateRange(f"need v_min < v_max, got [{v_min}, {v_max}]")
    span = v_max - v_min
    return [v_min + i * span / n for i in range(n)]


def sample_isovalues(v_min: float, v_max: float, m: int) -> list[float]:
    """m uniform interior samples with spacing d = range/(m+1); endpoints excluded."""
    if m < 1:
        raise ConfigError(f"m must be >= 1, got {m}")
    if not v_min < v_max:
        raise DegenerateRange(f"need v_min < v_max, got [{v_min}, {v_max}]")
    d = (v_max - v_min) / (m + 1)
    return [v_min + i * d for i in range(1, m + 1)]


def label_isovalues(v: Volume, exclude_background: bool = True) -> list[float]:
    """Sorted distinct values present in a label volume.

    Value 0 is treated as background and excluded by default.
    """
    if v.meta.value_kind != "label":
        raise ConfigError("label_isovalues requires a label-kind volume")
    uniq = np.unique(v.values)
    if exclude_background:
        uniq = uniq[uniq != 0]
    return [float(x) for x in uniq]


@dataclass(frozen=True)
class TransferFunction:
    """Scalar value -> (rgb, opacity), continuous or discrete.

    ``control_points`` is an ordered list of (value, (r, g, b), opacity)
    with strictly increasing values; ``width`` is the band half-width in
    discrete mode (ignored otherwise).
    """

    mode: str  # "continuous" | "discrete"
    control_points: tuple = ()
    width: float = 0.0

    def __post_init__(self):
        if self.mode not in ("continuous", "discrete"):
            raise ConfigError(f"unknown TF mode {self.mode!r}")
        pts = []
        for value, color, opacity in self.control_points:
            color = tuple(float(c) for c in color)
            if len(color) != 3 or any(not 0.0 <= c <= 1.0 for c in color):
                raise ConfigError(f"color {color} outside [0,1]^3")
            if not 0.0 <= opacity <= 1.0:
                raise ConfigError(f"opacity {opacity} outside [0,1]")
            pts.append((float(value), color, float(opacity)))
        values = [p[0] for p in pts]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigError("control point values must be strictly increasing")
        object.__setattr__(self, "control_points", tuple(pts))
        if self.mode == "continuous" and not pts:
            raise EmptyRecords("continuous TF needs at least one control point")
        if self.mode == "discrete" and self.width < 0:
            raise ConfigError("band width must be >= 0")

    # dense arrays for vectorized evaluation and render kernels
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        values = np.array([p[0] for p in self.control_points], dtype=np.float64)
        colors = np.array([p[1] for p in self.control_points], dtype=np.float64).reshape(-1, 3)
        opac = np.array([p[2] for p in self.control_points], dtype=np.float64)
        return values, colors, opac

    def evaluate_array(self, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized evaluation: returns (colors (n,3), opacities (n,))."""
        v = np.asarray(v, dtype=np.float64)
        values, colors, opac = self.arrays()
        if self.mode == "continuous":
            rgb = np.stack([np.interp(v, values, colors[:, c]) for c in range(3)], axis=-1)
            return rgb, np.interp(v, values, opac)
        rgb = np.zeros(v.shape + (3,), dtype=np.float64)
        alpha = np.zeros(v.shape, dtype=np.float64)
        unassigned = np.ones(v.shape, dtype=bool)
        for center, color, op in self.control_points:
            hit = unassigned & (v >= center - self.width) & (v <= center + self.width)
            rgb[hit] = color
            alpha[hit] = op
            unassigned &= ~hit
        return rgb, alpha


def evaluate_tf(tf: TransferFunction, v: float) -> tuple[tuple[float, float, float], float]:
    """Color and opacity of the TF at a single scalar value."""
    rgb, alpha = tf.evaluate_array(np.array([v]))
    return (float(rgb[0, 0]), float(rgb[0, 1]), float(rgb[0, 2])), float(alpha[0])


def build_continuous_tf(records: list[IsovalueRecord]) -> TransferFunction:
    """Piecewise-linear TF through each record's assigned color and opacity."""
    if not records:
        raise EmptyRecords("no records to build a TF from")
    records = sorted(records, key=lambda r: r.effective_isovalue)
    pts = [(r.effective_isovalue, r.assigned_color, r.assigned_opacity) for r in records]
    return TransferFunction(mode="continuous", control_points=tuple(pts))


def build_discrete_tf(records: list[IsovalueRecord], width: float) -> TransferFunction:
    """Step-band TF over the accepted records; rejected values map to opacity 0."""
    if not records:
        raise EmptyRecords("no records to build a TF from")
    accepted = sorted((r for r in records if r.accepted),
                      key=lambda r: r.effective_isovalue)
    pts = []
    last = None
    for r in accepted:
        value = r.effective_isovalue
        if last is not None and value <= last:
            continue  # tuning collisions: keep the first band
        pts.append((value, r.assigned_color, r.assigned_opacity))
        last = value
    return TransferFunction(mode="discrete", control_points=tuple(pts), width=width)


def default_band_width(v_min: float, v_max: float, m: int) -> float:
    """Quarter of the uniform sample spacing, so neighboring bands never merge."""
    return (v_max - v_min) / (m + 1) / 4.0


# -- serialization ------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def tf_to_dict(tf: TransferFunction) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": tf.mode,
        "width": tf.width,
        "control_points": [
            {"value": v, "color": list(c), "opacity": a}
            for v, c, a in tf.control_points
        ],
    }


def tf_from_dict(d: dict) -> TransferFunction:
    pts = tuple(
        (p["value"], tuple(p["color"]), p["opacity"]) for p in d["control_points"]
    )
    return TransferFunction(mode=d["mode"], control_points=pts, width=d.get("width", 0.0))


def export_tf(tf: TransferFunction, format: str) -> bytes:
    """Serialize a TF: ``ct`` is the XML color-table document, ``structured`` is JSON.

    Both round-trip through import_tf at 6 significant digits.
    """
    if format == "structured":
        return (json.dumps(tf_to_dict(tf), indent=2, sort_keys=True) + "\n").encode()
    if format != "ct":
        raise ConfigError(f"unknown TF export format {format!r}")
    root = ET.Element("ColorTable")
    root.set("points", str(len(tf.control_points)))
    root.set("mode", tf.mode)
    if tf.mode == "discrete":
        root.set("width", _fmt(tf.width))
    for value, color, opacity in tf.control_points:
        ET.SubElement(root, "ControlPoint", {
            "position": _fmt(value),
            "r": _fmt(color[0]),
            "g": _fmt(color[1]),
            "b": _fmt(color[2]),
            "a": _fmt(opacity),
        })
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def import_tf(data: bytes, format: str) -> TransferFunction:
    if format == "structured":
        return tf_from_dict(json.loads(data.decode()))
    if format != "ct":
        raise ConfigError(f"unknown TF import format {format!r}")
    root = ET.fromstring(data)
    if root.tag != "ColorTable":
        raise ConfigError(f"expected ColorTable root, got {root.tag!r}")
    pts = []
    for el in root.findall("ControlPoint"):
        pts.append((
            float(el.get("position")),
            (float(el.get("r")), float(el.get("g")), float(el.get("b"))),
            float(el.get("a")),
        ))
    return TransferFunction(
        mode=root.get("mode", "continuous"),
        control_points=tuple(pts),
        width=float(root.get("width", 0.0)),
    )
