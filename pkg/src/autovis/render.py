"""Deterministic CPU rendering: ray-cast DVR, isosurface meshes, canonical cameras.

All renders are pure functions of their inputs.  The DVR ray marcher is
parallelized over horizontal pixel bands; every pixel is computed
independently, so output bytes are identical for any worker count.
"""

from __future__ import annotations

import hashlib
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit
from PIL import Image as PILImage
from skimage import measure

from .errors import ConfigError
from .transfer import RampOpacity, TransferFunction
from .volume import Volume

# shading constants: fixed ambient + Lambertian headlight at the camera
AMBIENT = 0.2
DIFFUSE = 0.8
# accumulated-alpha threshold for early ray termination
OPACITY_CUTOFF = 0.99
# ray-march step as a fraction of the smallest voxel spacing
STEP_SCALE = 0.5


@dataclass(frozen=True)
class Camera:
    """Pinhole camera with a vertical field of view in degrees."""

    position: tuple[float, float, float]
    look_at: tuple[float, float, float]
    up: tuple[float, float, float]
    vertical_fov: float = 45.0

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(x) for x in self.position))
        object.__setattr__(self, "look_at", tuple(float(x) for x in self.look_at))
        object.__setattr__(self, "up", tuple(float(x) for x in self.up))
        pos = np.asarray(self.position)
        tgt = np.asarray(self.look_at)
        if np.allclose(pos, tgt):
            raise ConfigError("camera position equals look_at")
        if not 0.0 < self.vertical_fov < 180.0:
            raise ConfigError(f"fov {self.vertical_fov} outside (0, 180)")
        fwd = tgt - pos
        fwd = fwd / np.linalg.norm(fwd)
        upv = np.asarray(self.up, dtype=np.float64)
        if np.linalg.norm(np.cross(fwd, upv)) < 1e-9:
            raise ConfigError("up vector is parallel to the view direction")

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (right, up, forward) in world space."""
        pos = np.asarray(self.position, dtype=np.float64)
        fwd = np.asarray(self.look_at, dtype=np.float64) - pos
        fwd /= np.linalg.norm(fwd)
        right = np.cross(fwd, np.asarray(self.up, dtype=np.float64))
        right /= np.linalg.norm(right)
        up = np.cross(right, fwd)
        return right, up, fwd

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "look_at": list(self.look_at),
            "up": list(self.up),
            "vertical_fov": self.vertical_fov,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Camera":
        return cls(position=tuple(d["position"]), look_at=tuple(d["look_at"]),
                   up=tuple(d["up"]), vertical_fov=float(d.get("vertical_fov", 45.0)))


@dataclass(frozen=True)
class Image:
    """8-bit RGBA raster, row-major from the top-left."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width, 4) uint8

    @classmethod
    def from_pixels(cls, pixels: np.ndarray) -> "Image":
        pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
        h, w, c = pixels.shape
        if c != 4:
            raise ConfigError("pixels must be RGBA")
        return cls(width=w, height=h, pixels=pixels)

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        PILImage.fromarray(self.pixels, "RGBA").save(buf, format="PNG")
        return buf.getvalue()

    @classmethod
    def from_png_bytes(cls, data: bytes) -> "Image":
        arr = np.asarray(PILImage.open(io.BytesIO(data)).convert("RGBA"))
        return cls.from_pixels(arr)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_png_bytes())

    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.width}x{self.height}:".encode())
        h.update(self.pixels.tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class Mesh:
    """Indexed triangle mesh with per-vertex unit normals."""

    vertices: np.ndarray   # (n, 3) float64
    normals: np.ndarray    # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int32

    @classmethod
    def empty(cls) -> "Mesh":
        return cls(vertices=np.zeros((0, 3)), normals=np.zeros((0, 3)),
                   triangles=np.zeros((0, 3), dtype=np.int32))

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0


# -- compositing kernels -------------------------------------------------

@njit(cache=True, inline="always")
def _step_composite(acc_r, acc_g, acc_b, trans, r, g, b, alpha, step, ref_step):
    # opacity is per unit reference length; correct for the actual step
    a_step = 1.0 - (1.0 - alpha) ** (step / ref_step)
    w = trans * a_step
    return acc_r + w * r, acc_g + w * g, acc_b + w * b, trans * (1.0 - a_step)


@njit(cache=True, nogil=True)
def composite_ray(colors, alphas, step, ref_step):
    """Front-to-back compositing of one ray's samples.

    Returns premultiplied accumulated (r, g, b) and the remaining
    transmittance; callers blend the background with the latter.  Stops
    once accumulated alpha reaches the cutoff.
    """
    acc_r = 0.0
    acc_g = 0.0
    acc_b = 0.0
    trans = 1.0
    for k in range(alphas.shape[0]):
        a = alphas[k]
        if a > 0.0:
            acc_r, acc_g, acc_b, trans = _step_composite(
                acc_r, acc_g, acc_b, trans,
                colors[k, 0], colors[k, 1], colors[k, 2], a, step, ref_step)
            if 1.0 - trans >= OPACITY_CUTOFF:
                break
    return acc_r, acc_g, acc_b, trans


@njit(cache=True, inline="always")
def _trilinear(vol, x, y, z):
    nx, ny, nz = vol.shape
    x0 = int(np.floor(x))
    y0 = int(np.floor(y))
    z0 = int(np.floor(z))
    if x0 < 0:
        x0 = 0
    if y0 < 0:
        y0 = 0
    if z0 < 0:
        z0 = 0
    if x0 > nx - 2:
        x0 = nx - 2
    if y0 > ny - 2:
        y0 = ny - 2
    if z0 > nz - 2:
        z0 = nz - 2
    fx = min(max(x - x0, 0.0), 1.0)
    fy = min(max(y - y0, 0.0), 1.0)
    fz = min(max(z - z0, 0.0), 1.0)
    c00 = vol[x0, y0, z0] * (1 - fx) + vol[x0 + 1, y0, z0] * fx
    c10 = vol[x0, y0 + 1, z0] * (1 - fx) + vol[x0 + 1, y0 + 1, z0] * fx
    c01 = vol[x0, y0, z0 + 1] * (1 - fx) + vol[x0 + 1, y0, z0 + 1] * fx
    c11 = vol[x0, y0 + 1, z0 + 1] * (1 - fx) + vol[x0 + 1, y0 + 1, z0 + 1] * fx
    c0 = c00 * (1 - fy) + c10 * fy
    c1 = c01 * (1 - fy) + c11 * fy
    return c0 * (1 - fz) + c1 * fz


@njit(cache=True, inline="always")
def _tf_sample(mode, values, colors, opac, width, v):
    n = values.shape[0]
    if n == 0:
        return 0.0, 0.0, 0.0, 0.0
    if mode == 0:  # continuous, clamped piecewise-linear
        if v <= values[0]:
            return colors[0, 0], colors[0, 1], colors[0, 2], opac[0]
        if v >= values[n - 1]:
            return colors[n - 1, 0], colors[n - 1, 1], colors[n - 1, 2], opac[n - 1]
        lo = 0
        hi = n - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if values[mid] <= v:
                lo = mid
            else:
                hi = mid
        t = (v - values[lo]) / (values[hi] - values[lo])
        return (colors[lo, 0] + t * (colors[hi, 0] - colors[lo, 0]),
                colors[lo, 1] + t * (colors[hi, 1] - colors[lo, 1]),
                colors[lo, 2] + t * (colors[hi, 2] - colors[lo, 2]),
                opac[lo] + t * (opac[hi] - opac[lo]))
    for k in range(n):  # discrete: first band containing v wins
        if values[k] - width <= v <= values[k] + width:
            return colors[k, 0], colors[k, 1], colors[k, 2], opac[k]
    return 0.0, 0.0, 0.0, 0.0


@njit(cache=True, nogil=True)
def _dvr_rows(vol, origin, spacing, mode, tf_values, tf_colors, tf_opac, tf_width,
              cam_pos, right, up, fwd, tan_half, aspect, width, height,
              step, ref_step, row0, row1, out):
    nx, ny, nz = vol.shape
    bminx, bminy, bminz = origin[0], origin[1], origin[2]
    bmaxx = origin[0] + (nx - 1) * spacing[0]
    bmaxy = origin[1] + (ny - 1) * spacing[1]
    bmaxz = origin[2] + (nz - 1) * spacing[2]
    for j in range(row0, row1):
        v_ndc = (1.0 - 2.0 * (j + 0.5) / height) * tan_half
        for i in range(width):
            u_ndc = (2.0 * (i + 0.5) / width - 1.0) * tan_half * aspect
            dx = fwd[0] + u_ndc * right[0] + v_ndc * up[0]
            dy = fwd[1] + u_ndc * right[1] + v_ndc * up[1]
            dz = fwd[2] + u_ndc * right[2] + v_ndc * up[2]
            dlen = np.sqrt(dx * dx + dy * dy + dz * dz)
            dx /= dlen
            dy /= dlen
            dz /= dlen
            tmin = -1e300
            tmax = 1e300
            if dx != 0.0:
                t1 = (bminx - cam_pos[0]) / dx
                t2 = (bmaxx - cam_pos[0]) / dx
                if t1 > t2:
                    t1, t2 = t2, t1
                tmin = max(tmin, t1)
                tmax = min(tmax, t2)
            elif cam_pos[0] < bminx or cam_pos[0] > bmaxx:
                tmin = 1e300
            if dy != 0.0:
                t1 = (bminy - cam_pos[1]) / dy
                t2 = (bmaxy - cam_pos[1]) / dy
                if t1 > t2:
                    t1, t2 = t2, t1
                tmin = max(tmin, t1)
                tmax = min(tmax, t2)
            elif cam_pos[1] < bminy or cam_pos[1] > bmaxy:
                tmin = 1e300
            if dz != 0.0:
                t1 = (bminz - cam_pos[2]) / dz
                t2 = (bmaxz - cam_pos[2]) / dz
                if t1 > t2:
                    t1, t2 = t2, t1
                tmin = max(tmin, t1)
                tmax = min(tmax, t2)
            elif cam_pos[2] < bminz or cam_pos[2] > bmaxz:
                tmin = 1e300
            acc_r = 0.0
            acc_g = 0.0
            acc_b = 0.0
            trans = 1.0
            if tmin < tmax:
                if tmin < 0.0:
                    tmin = 0.0
                t = tmin + 0.5 * step
                while t < tmax:
                    px = cam_pos[0] + t * dx
                    py = cam_pos[1] + t * dy
                    pz = cam_pos[2] + t * dz
                    val = _trilinear(vol,
                                     (px - origin[0]) / spacing[0],
                                     (py - origin[1]) / spacing[1],
                                     (pz - origin[2]) / spacing[2])
                    r, g, b, a = _tf_sample(mode, tf_values, tf_colors, tf_opac,
                                            tf_width, val)
                    if a > 0.0:
                        acc_r, acc_g, acc_b, trans = _step_composite(
                            acc_r, acc_g, acc_b, trans, r, g, b, a, step, ref_step)
                        if 1.0 - trans >= OPACITY_CUTOFF:
                            break
                    t += step
            # blend over white background
            acc_r += trans
            acc_g += trans
            acc_b += trans
            out[j, i, 0] = np.uint8(min(max(acc_r, 0.0), 1.0) * 255.0 + 0.5)
            out[j, i, 1] = np.uint8(min(max(acc_g, 0.0), 1.0) * 255.0 + 0.5)
            out[j, i, 2] = np.uint8(min(max(acc_b, 0.0), 1.0) * 255.0 + 0.5)
            out[j, i, 3] = 255


def render_dvr(v: Volume, tf: TransferFunction, cam: Camera,
               width: int, height: int, workers: int = 1) -> Image:
    """Ray-cast direct volume rendering against a white background.

    Front-to-back compositing with early termination; opacity is
    interpreted per smallest-voxel length and corrected for the march
    step.  Output is bit-identical for any ``workers`` value.
    """
    right, up, fwd = cam.basis()
    cam_pos = np.asarray(cam.position, dtype=np.float64)
    origin = np.asarray(v.meta.origin, dtype=np.float64)
    spacing = np.asarray(v.meta.spacing, dtype=np.float64)
    ref_step = float(spacing.min())
    step = STEP_SCALE * ref_step
    tan_half = float(np.tan(np.radians(cam.vertical_fov) / 2.0))
    aspect = width / height
    tf_values, tf_colors, tf_opac = tf.arrays()
    mode = 0 if tf.mode == "continuous" else 1
    out = np.zeros((height, width, 4), dtype=np.uint8)

    def run(row0: int, row1: int) -> None:
        _dvr_rows(v.values, origin, spacing, mode, tf_values, tf_colors, tf_opac,
                  float(tf.width), cam_pos, right, up, fwd, tan_half, aspect,
                  width, height, step, ref_step, row0, row1, out)

    workers = max(1, int(workers))
    if workers == 1:
        run(0, height)
    else:
        bounds = np.linspace(0, height, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, int(a), int(b))
                       for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
            for f in futures:
                f.result()
    return Image.from_pixels(out)


# -- isosurfaces ---------------------------------------------------------

def _trilinear_grid(grid: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Vectorized trilinear interpolation of a 3D grid at index-space points."""
    dims = grid.shape
    idx0 = np.floor(pts).astype(np.int64)
    for ax in range(3):
        np.clip(idx0[:, ax], 0, dims[ax] - 2, out=idx0[:, ax])
    frac = np.clip(pts - idx0, 0.0, 1.0)
    out = np.zeros(len(pts), dtype=np.float64)
    for dx in (0, 1):
        wx = frac[:, 0] if dx else 1.0 - frac[:, 0]
        for dy in (0, 1):
            wy = frac[:, 1] if dy else 1.0 - frac[:, 1]
            for dz in (0, 1):
                wz = frac[:, 2] if dz else 1.0 - frac[:, 2]
                out += (wx * wy * wz) * grid[idx0[:, 0] + dx,
                                             idx0[:, 1] + dy,
                                             idx0[:, 2] + dz]
    return out


def extract_isosurface(v: Volume, isovalue: float) -> Mesh:
    """Marching-cubes triangulation of the level set at ``isovalue``.

    Per-vertex normals come from central-difference gradients and point
    toward decreasing scalar values.  Out-of-range isovalues yield an
    empty mesh.
    """
    if not (v.v_min < isovalue < v.v_max):
        return Mesh.empty()
    spacing = np.asarray(v.meta.spacing, dtype=np.float64)
    verts_idx, faces, _, _ = measure.marching_cubes(v.values, level=isovalue)
    if len(faces) == 0:
        return Mesh.empty()
    gx, gy, gz = np.gradient(v.values.astype(np.float64),
                             spacing[0], spacing[1], spacing[2])
    g = np.stack([_trilinear_grid(gx, verts_idx),
                  _trilinear_grid(gy, verts_idx),
                  _trilinear_grid(gz, verts_idx)], axis=1)
    norm = np.linalg.norm(g, axis=1, keepdims=True)
    norm[norm < 1e-300] = 1.0
    normals = -g / norm
    verts = verts_idx * spacing + np.asarray(v.meta.origin, dtype=np.float64)
    return Mesh(vertices=verts, normals=normals,
                triangles=np.ascontiguousarray(faces, dtype=np.int32))


@njit(cache=True, nogil=True)
def _raster_mesh(verts, normals, tris, cam_pos, right, up, fwd, tan_half, aspect,
                 width, height, depth_buf, shade_buf):
    n_tris = tris.shape[0]
    near = 1e-6
    for t in range(n_tris):
        ia, ib, ic = tris[t, 0], tris[t, 1], tris[t, 2]
        # camera-space coordinates (z = depth along the view direction)
        sx = np.empty(3)
        sy = np.empty(3)
        sz = np.empty(3)
        for k in range(3):
            vi = ia if k == 0 else (ib if k == 1 else ic)
            relx = verts[vi, 0] - cam_pos[0]
            rely = verts[vi, 1] - cam_pos[1]
            relz = verts[vi, 2] - cam_pos[2]
            cz = relx * fwd[0] + rely * fwd[1] + relz * fwd[2]
            cx = relx * right[0] + rely * right[1] + relz * right[2]
            cy = relx * up[0] + rely * up[1] + relz * up[2]
            sx[k] = cx
            sy[k] = cy
            sz[k] = cz
        if sz[0] < near or sz[1] < near or sz[2] < near:
            continue
        # project to pixel coordinates
        px = np.empty(3)
        py = np.empty(3)
        for k in range(3):
            u_ndc = sx[k] / (sz[k] * tan_half * aspect)
            v_ndc = sy[k] / (sz[k] * tan_half)
            px[k] = (u_ndc + 1.0) * 0.5 * width - 0.5
            py[k] = (1.0 - v_ndc) * 0.5 * height - 0.5
        x_min = int(np.floor(min(px[0], min(px[1], px[2]))))
        x_max = int(np.ceil(max(px[0], max(px[1], px[2]))))
        y_min = int(np.floor(min(py[0], min(py[1], py[2]))))
        y_max = int(np.ceil(max(py[0], max(py[1], py[2]))))
        if x_max < 0 or y_max < 0 or x_min >= width or y_min >= height:
            continue
        x_min = max(x_min, 0)
        y_min = max(y_min, 0)
        x_max = min(x_max, width - 1)
        y_max = min(y_max, height - 1)
        d12x = px[1] - px[0]
        d12y = py[1] - py[0]
        d13x = px[2] - px[0]
        d13y = py[2] - py[0]
        det = d12x * d13y - d13x * d12y
        if det == 0.0:
            continue
        inv_det = 1.0 / det
        for j in range(y_min, y_max + 1):
            for i in range(x_min, x_max + 1):
                qx = i - px[0]
                qy = j - py[0]
                b1 = (qx * d13y - d13x * qy) * inv_det
                b2 = (d12x * qy - qx * d12y) * inv_det
                b0 = 1.0 - b1 - b2
                if b0 < 0.0 or b1 < 0.0 or b2 < 0.0:
                    continue
                # perspective-correct interpolation weights
                w0 = b0 / sz[0]
                w1 = b1 / sz[1]
                w2 = b2 / sz[2]
                wsum = w0 + w1 + w2
                depth = 1.0 / wsum
                if depth >= depth_buf[j, i]:
                    continue
                w0 *= depth
                w1 *= depth
                w2 *= depth
                nx_ = w0 * normals[ia, 0] + w1 * normals[ib, 0] + w2 * normals[ic, 0]
                ny_ = w0 * normals[ia, 1] + w1 * normals[ib, 1] + w2 * normals[ic, 1]
                nz_ = w0 * normals[ia, 2] + w1 * normals[ib, 2] + w2 * normals[ic, 2]
                nlen = np.sqrt(nx_ * nx_ + ny_ * ny_ + nz_ * nz_)
                if nlen < 1e-12:
                    shade = AMBIENT
                else:
                    wx = w0 * verts[ia, 0] + w1 * verts[ib, 0] + w2 * verts[ic, 0]
                    wy = w0 * verts[ia, 1] + w1 * verts[ib, 1] + w2 * verts[ic, 1]
                    wz = w0 * verts[ia, 2] + w1 * verts[ib, 2] + w2 * verts[ic, 2]
                    lx = cam_pos[0] - wx
                    ly = cam_pos[1] - wy
                    lz = cam_pos[2] - wz
                    llen = np.sqrt(lx * lx + ly * ly + lz * lz)
                    # two-sided headlight: surfaces shade by |n . l|
                    lam = abs(nx_ * lx + ny_ * ly + nz_ * lz) / (nlen * llen)
                    shade = AMBIENT + DIFFUSE * lam
                    if shade > 1.0:
                        shade = 1.0
                depth_buf[j, i] = depth
                shade_buf[j, i] = shade


def render_mesh_layer(m: Mesh, cam: Camera, width: int, height: int
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Rasterize one mesh; returns (depth, shade) float buffers.

    Pixels the mesh does not cover keep depth = +inf and shade = 0.
    """
    depth = np.full((height, width), np.inf, dtype=np.float64)
    shade = np.zeros((height, width), dtype=np.float64)
    if m.is_empty:
        return depth, shade
    right, up, fwd = cam.basis()
    _raster_mesh(m.vertices, m.normals, m.triangles,
                 np.asarray(cam.position, dtype=np.float64), right, up, fwd,
                 float(np.tan(np.radians(cam.vertical_fov) / 2.0)), width / height,
                 width, height, depth, shade)
    return depth, shade


def quantize_rgb(rgb: np.ndarray) -> np.ndarray:
    """Clamp float channels to [0, 1] and round to 8 bits."""
    return (np.clip(rgb, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def render_mesh(m: Mesh, color: tuple[float, float, float], cam: Camera,
                width: int, height: int) -> Image:
    """Shaded opaque mesh render over a white background."""
    depth, shade = render_mesh_layer(m, cam, width, height)
    hit = np.isfinite(depth)
    rgb = np.ones((height, width, 3), dtype=np.float64)
    rgb[hit] = np.asarray(color, dtype=np.float64) * shade[hit][:, None]
    out = np.empty((height, width, 4), dtype=np.uint8)
    out[..., :3] = quantize_rgb(rgb)
    out[..., 3] = 255
    return Image.from_pixels(out)


def composite_mesh_layers(layers: list[tuple[np.ndarray, np.ndarray,
                                             tuple[float, float, float], float]],
                          width: int, height: int) -> Image:
    """Blend shaded surface layers nearest-first with per-surface opacity.

    Each layer is (depth, shade, color, opacity) as produced by
    render_mesh_layer plus its record's assignment.
    """
    if not layers:
        white = np.full((height, width, 4), 255, dtype=np.uint8)
        return Image.from_pixels(white)
    depths = np.stack([d for d, _, _, _ in layers])
    shades = np.stack([s for _, s, _, _ in layers])
    colors = np.array([c for _, _, c, _ in layers], dtype=np.float64)
    alphas = np.array([a for _, _, _, a in layers], dtype=np.float64)
    order = np.argsort(depths, axis=0, kind="stable")
    acc = np.zeros((height, width, 3), dtype=np.float64)
    trans = np.ones((height, width), dtype=np.float64)
    for rank in range(len(layers)):
        layer_idx = order[rank]
        d = np.take_along_axis(depths, layer_idx[None], axis=0)[0]
        s = np.take_along_axis(shades, layer_idx[None], axis=0)[0]
        hit = np.isfinite(d)
        a = alphas[layer_idx] * hit
        rgb = colors[layer_idx] * s[..., None]
        acc += (trans * a)[..., None] * rgb
        trans *= 1.0 - a
    acc += trans[..., None]  # white background
    out = np.empty((height, width, 4), dtype=np.uint8)
    out[..., :3] = quantize_rgb(acc)
    out[..., 3] = 255
    return Image.from_pixels(out)


# -- canonical cameras and the x-ray TF ----------------------------------

def _standoff_cameras(v: Volume, directions: list[tuple[float, float, float]],
                      ups: list[tuple[float, float, float]]) -> list[Camera]:
    center = v.centroid
    dist = 2.0 * v.world_diagonal
    cams = []
    for d, up in zip(directions, ups):
        d = np.asarray(d, dtype=np.float64)
        d /= np.linalg.norm(d)
        cams.append(Camera(position=tuple(center + dist * d),
                           look_at=tuple(center), up=up))
    return cams


def orthogonal_cameras(v: Volume) -> list[Camera]:
    """Six face-on cameras (+x, -x, +y, -y, +z, -z) aimed at the centroid.

    Standoff is twice the world diagonal; up is +y except for the ±y
    cameras, which use +z.
    """
    directions = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    ups = [(0, 1, 0), (0, 1, 0), (0, 0, 1), (0, 0, 1), (0, 1, 0), (0, 1, 0)]
    return _standoff_cameras(v, directions, ups)


def four_view_cameras(v: Volume) -> list[Camera]:
    """Front (+z), side (+x), top (+y), and diagonal cameras at equal standoff."""
    directions = [(0, 0, 1), (1, 0, 0), (0, 1, 0), (1, 1, 1)]
    ups = [(0, 1, 0), (0, 1, 0), (0, 0, 1), (0, 1, 0)]
    return _standoff_cameras(v, directions, ups)


def grayscale_xray_tf(ramp: RampOpacity) -> TransferFunction:
    """White-to-black continuous TF with the ramp's opacity profile.

    Color fades linearly from white at v_min to black at v_max,
    independent of the opacity ramp.
    """
    span = ramp.v_max - ramp.v_min

    def gray(v: float) -> tuple[float, float, float]:
        g = 1.0 - (v - ramp.v_min) / span
        return (g, g, g)

    pts = [(ramp.v_min, gray(ramp.v_min), 0.0)]
    if ramp.rsv > ramp.v_min:
        pts.append((ramp.rsv, gray(ramp.rsv), 0.0))
    pts.append((ramp.v_max, gray(ramp.v_max), 1.0))
    return TransferFunction(mode="continuous", control_points=tuple(pts))
