"""Raw volumetric scalar fields: loading, pooling, normalization, statistics.

A volume is a dense 3D scalar grid stored together with its sidecar
metadata.  Values are kept as float32 indexed ``[x, y, z]``; the on-disk
raw format is headerless, x-fastest (x varies quickest, then y, then z).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, FileSizeMismatch, IoFailure, UnsupportedScalarKind

SCALAR_KINDS = {
    "unsigned8": ("u1", 1),
    "unsigned16": ("u2", 2),
    "float32": ("f4", 4),
}

BYTE_ORDERS = {"little": "<", "big": ">"}

META_KEYS = ("dims", "spacing", "origin", "scalar_kind", "value_kind", "byte_order")


@dataclass(frozen=True)
class VolumeMeta:
    """Sidecar description of a headerless raw volume file."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    scalar_kind: str
    value_kind: str = "continuous"
    byte_order: str = "little"

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        if len(self.dims) != 3 or any(d < 1 for d in self.dims):
            raise ConfigError(f"dims must be 3 positive integers, got {self.dims}")
        if len(self.spacing) != 3 or any(s <= 0 for s in self.spacing):
            raise ConfigError(f"spacing must be 3 positive reals, got {self.spacing}")
        if len(self.origin) != 3:
            raise ConfigError(f"origin must be 3 reals, got {self.origin}")
        if self.scalar_kind not in SCALAR_KINDS:
            raise UnsupportedScalarKind(f"unsupported scalar_kind {self.scalar_kind!r}")
        if self.value_kind not in ("continuous", "label"):
            raise ConfigError(f"value_kind must be continuous or label, got {self.value_kind!r}")
        if self.byte_order not in BYTE_ORDERS:
            raise ConfigError(f"byte_order must be little or big, got {self.byte_order!r}")

    @property
    def bytes_per_scalar(self) -> int:
        return SCALAR_KINDS[self.scalar_kind][1]

    @property
    def byte_length(self) -> int:
        return self.dims[0] * self.dims[1] * self.dims[2] * self.bytes_per_scalar

    @property
    def dtype(self) -> np.dtype:
        code, _ = SCALAR_KINDS[self.scalar_kind]
        return np.dtype(BYTE_ORDERS[self.byte_order] + code)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "spacing": list(self.spacing),
            "origin": list(self.origin),
            "scalar_kind": self.scalar_kind,
            "value_kind": self.value_kind,
            "byte_order": self.byte_order,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VolumeMeta":
        unknown = set(data) - set(META_KEYS)
        if unknown:
            raise ConfigError(f"unknown metadata keys: {sorted(unknown)}")
        missing = {"dims", "spacing", "origin", "scalar_kind"} - set(data)
        if missing:
            raise ConfigError(f"missing metadata keys: {sorted(missing)}")
        return cls(**data)


def load_meta(path: str | os.PathLike) -> VolumeMeta:
    """Read a JSON sidecar metadata document.  Unknown keys are rejected."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read metadata {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"metadata {path} is not valid JSON: {exc}") from exc
    return VolumeMeta.from_dict(data)


def save_meta(meta: VolumeMeta, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(meta.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass(frozen=True)
class Volume:
    """Dense scalar field with per-axis metadata and exact value bounds.

    ``values`` is float32, shape ``meta.dims``, indexed ``[x, y, z]``.
    """

    meta: VolumeMeta
    values: np.ndarray
    v_min: float
    v_max: float

    @classmethod
    def from_values(cls, meta: VolumeMeta, values: np.ndarray) -> "Volume":
        values = np.ascontiguousarray(values, dtype=np.float32)
        if values.shape != meta.dims:
            raise ConfigError(f"values shape {values.shape} != dims {meta.dims}")
        return cls(meta=meta, values=values,
                   v_min=float(values.min()), v_max=float(values.max()))

    @property
    def world_min(self) -> np.ndarray:
        return np.asarray(self.meta.origin, dtype=np.float64)

    @property
    def world_max(self) -> np.ndarray:
        d = np.asarray(self.meta.dims, dtype=np.float64) - 1.0
        return self.world_min + d * np.asarray(self.meta.spacing, dtype=np.float64)

    @property
    def centroid(self) -> np.ndarray:
        return 0.5 * (self.world_min + self.world_max)

    @property
    def world_diagonal(self) -> float:
        return float(np.linalg.norm(self.world_max - self.world_min))


def load_raw(path: str | os.PathLike, meta: VolumeMeta) -> Volume:
    """Decode a headerless raw file (x-fastest scan order) into a Volume."""
    try:
        size = os.path.getsize(path)
    except OSError as exc:
        raise IoFailure(f"cannot stat {path}: {exc}") from exc
    if size != meta.byte_length:
        raise FileSizeMismatch(
            f"{path}: file is {size} bytes, metadata declares {meta.byte_length}")
    try:
        flat = np.fromfile(path, dtype=meta.dtype)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    nx, ny, nz = meta.dims
    # x-fastest stream -> index [x, y, z]
    values = flat.reshape((nz, ny, nx)).transpose(2, 1, 0)
    return Volume.from_values(meta, values)


def encode_raw(v: Volume) -> bytes:
    """Re-encode Volume values to the raw byte stream described by its meta.

    Inverse of load_raw: decoding then encoding is bit-exact for every
    supported scalar kind.
    """
    return v.values.astype(v.meta.dtype).ravel(order="F").tobytes()


def save_raw(v: Volume, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_raw(v))


def value_range(v: Volume) -> tuple[float, float]:
    """Stored (v_min, v_max)."""
    return (v.v_min, v.v_max)


def _box_mean(values: np.ndarray, strides: tuple[int, int, int]) -> np.ndarray:
    out = values.astype(np.float64)
    for axis, s in enumerate(strides):
        if s == 1:
            continue
        starts = np.arange(0, out.shape[axis], s)
        sums = np.add.reduceat(out, starts, axis=axis)
        counts = np.diff(np.append(starts, out.shape[axis]))
        shape = [1, 1, 1]
        shape[axis] = -1
        out = sums / counts.reshape(shape)
    return out.astype(np.float32)


def _box_majority(values: np.ndarray, strides: tuple[int, int, int]) -> np.ndarray:
    """Most frequent value per stride box; ties resolved to the smallest value."""
    labels, inverse = np.unique(values, return_inverse=True)
    ids = inverse.reshape(values.shape).astype(np.int32)
    sx, sy, sz = strides
    out_dims = tuple(-(-d // s) for d, s in zip(values.shape, strides))
    ox, oy, oz = out_dims
    out = np.empty(out_dims, dtype=np.float32)

    cy = (np.arange(values.shape[1]) // sy).astype(np.int64)
    cz = (np.arange(values.shape[2]) // sz).astype(np.int64)
    yz = (cy[:, None] * oz + cz[None, :])  # cell index within an x-slab

    # process one output x-slab at a time to bound the counts matrix
    for cx in range(ox):
        slab = ids[cx * sx: (cx + 1) * sx]
        counts = np.zeros((oy * oz, len(labels)), dtype=np.int64)
        flat_cell = np.broadcast_to(yz, slab.shape).ravel()
        np.add.at(counts, (flat_cell, slab.ravel()), 1)
        out[cx] = labels[np.argmax(counts, axis=1)].reshape(oy, oz)
    return out


def downsample(v: Volume, target: int) -> Volume:
    """Reduce each axis to at most ``target`` voxels by integer-stride pooling.

    The stride per axis is ceil(dim/target); continuous volumes are
    box-mean pooled, label volumes take the box majority so values stay
    exact integers.  Spacing scales by the stride.  Identity when every
    dim already fits.
    """
    if target < 1:
        raise ConfigError(f"target must be >= 1, got {target}")
    strides = tuple(-(-d // target) for d in v.meta.dims)
    if all(s == 1 for s in strides):
        return v
    if v.meta.value_kind == "label":
        pooled = _box_majority(v.values, strides)
    else:
        pooled = _box_mean(v.values, strides)
    meta = replace(
        v.meta,
        dims=pooled.shape,
        spacing=tuple(sp * st for sp, st in zip(v.meta.spacing, strides)),
    )
    return Volume.from_values(meta, pooled)


def normalize(v: Volume) -> Volume:
    """Map values linearly so v_min -> 0 and v_max -> 1.

    A constant volume maps to all zeros (downstream stages treat that as
    empty content rather than dividing by zero).
    """
    if v.v_max == v.v_min:
        values = np.zeros_like(v.values)
    else:
        lo = np.float32(v.v_min)
        span = np.float32(v.v_max) - lo
        values = (v.values - lo) / span
    return Volume.from_values(v.meta, values)


def is_constant(v: Volume) -> bool:
    return v.v_min == v.v_max


def synthetic_meta(n: int, value_kind: str = "continuous") -> VolumeMeta:
    """Unit-spacing float32 meta for an n-cubed volume (test/demo helper)."""
    return VolumeMeta(
        dims=(n, n, n),
        spacing=(1.0, 1.0, 1.0),
        origin=(0.0, 0.0, 0.0),
        scalar_kind="float32",
        value_kind=value_kind,
    )


def nested_shells(n: int = 64) -> Volume:
    """Empirical-style fixture: concentric spherical shells of distinct intensity."""
    ax = np.arange(n, dtype=np.float64)
    c = (n - 1) / 2.0
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
    r = np.sqrt((x - c) ** 2 + (y - c) ** 2 + (z - c) ** 2)
    values = np.zeros((n, n, n), dtype=np.float32)
    # outer shell faint, inner core bright: three plateaus with soft edges
    for radius, level in ((0.45 * n, 0.35), (0.30 * n, 0.65), (0.15 * n, 1.0)):
        values += level * (1.0 / (1.0 + np.exp((r - radius) / (0.015 * n)))).astype(np.float32)
    return Volume.from_values(synthetic_meta(n), values)


def gaussian_blob(n: int = 64) -> Volume:
    """Simulated-style fixture: smooth anisotropic Gaussian density."""
    ax = np.arange(n, dtype=np.float64)
    c = (n - 1) / 2.0
    x, y, z = np.meshgrid(ax, ax, ax, indexing="ij")
    values = np.exp(
        -((x - c) ** 2 / (2 * (0.22 * n) ** 2)
          + (y - c) ** 2 / (2 * (0.16 * n) ** 2)
          + (z - c) ** 2 / (2 * (0.28 * n) ** 2))
    ).astype(np.float32)
    return Volume.from_values(synthetic_meta(n), values)
