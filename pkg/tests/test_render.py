"""Rendering oracles: compositing recurrence, marching cubes, rasterizer."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from autovis.errors import ConfigError
from autovis.records import IsovalueRecord
from autovis.render import (AMBIENT, DIFFUSE, OPACITY_CUTOFF, Camera, Image,
                            composite_mesh_layers, composite_ray,
                            extract_isosurface, four_view_cameras,
                            grayscale_xray_tf, orthogonal_cameras, render_dvr,
                            render_mesh, render_mesh_layer)
from autovis.transfer import RampOpacity, build_continuous_tf
from autovis.volume import Volume, VolumeMeta, nested_shells


def reference_composite(colors, alphas, step, ref_step):
    """Scalar front-to-back recurrence, written independently of the kernel."""
    acc = np.zeros(3)
    trans = 1.0
    for rgb, a in zip(colors, alphas):
        if a <= 0.0:
            continue
        a_step = 1.0 - (1.0 - a) ** (step / ref_step)
        acc = acc + trans * a_step * np.asarray(rgb)
        trans = trans * (1.0 - a_step)
        if 1.0 - trans >= OPACITY_CUTOFF:
            break
    return acc, trans


def test_composite_matches_reference_on_random_rays():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        n = int(rng.integers(1, 64))
        colors = rng.random((n, 3))
        alphas = rng.random(n) * rng.choice([1.0, 0.05])
        step = float(rng.uniform(0.1, 1.0))
        ref = float(rng.uniform(0.5, 2.0))
        r, g, b, t = composite_ray(colors, alphas, step, ref)
        acc, trans = reference_composite(colors, alphas, step, ref)
        assert abs(r - acc[0]) <= 1e-6
        assert abs(g - acc[1]) <= 1e-6
        assert abs(b - acc[2]) <= 1e-6
        assert abs(t - trans) <= 1e-6


def test_composite_early_termination():
    # opaque samples: later samples cannot change the result
    colors = np.array([[1.0, 0.0, 0.0]] * 3 + [[0.0, 1.0, 0.0]] * 50)
    alphas = np.array([0.999] * 3 + [1.0] * 50)
    r, g, b, t = composite_ray(colors, alphas, 1.0, 1.0)
    assert 1.0 - t >= OPACITY_CUTOFF
    assert g <= (1 - OPACITY_CUTOFF)


def test_composite_zero_alpha_is_identity():
    colors = np.ones((10, 3))
    alphas = np.zeros(10)
    r, g, b, t = composite_ray(colors, alphas, 0.5, 1.0)
    assert (r, g, b, t) == (0.0, 0.0, 0.0, 1.0)


@given(st.integers(min_value=1, max_value=6))
@settings(max_examples=20, deadline=None)
def test_composite_opacity_step_correction(k):
    # k unit sub-steps of opacity a must equal one k-length step
    a = 0.4
    colors = np.ones((k, 3))
    alphas = np.full(k, a)
    r1, _, _, t1 = composite_ray(colors, alphas, 1.0, 1.0)
    r2, _, _, t2 = composite_ray(np.ones((1, 3)), np.array([a]), float(k), 1.0)
    assert abs(t1 - t2) <= 1e-9
    assert abs(r1 - r2) <= 1e-9


def _cube_volume(n=16, value=0.5):
    m = VolumeMeta(dims=(n, n, n), spacing=(1, 1, 1), origin=(0, 0, 0),
                   scalar_kind="float32")
    return Volume.from_values(m, np.full((n, n, n), value, dtype=np.float32))


def test_dvr_white_background():
    # fully transparent TF: every pixel is the white background
    v = _cube_volume()
    tf = build_continuous_tf([
        IsovalueRecord(isovalue=0.0, assigned_color=(1, 0, 0),
                       assigned_opacity=0.0),
        IsovalueRecord(isovalue=1.0, assigned_color=(1, 0, 0),
                       assigned_opacity=0.0)])
    img = render_dvr(v, tf, orthogonal_cameras(v)[0], 24, 24)
    assert np.all(img.pixels[:, :, :3] == 255)
    assert np.all(img.pixels[:, :, 3] == 255)


def test_dvr_worker_count_bit_identical():
    v = nested_shells(24)
    tf = grayscale_xray_tf(RampOpacity(rsv=0.4, v_min=v.v_min, v_max=v.v_max))
    cam = four_view_cameras(v)[3]
    frames = [render_dvr(v, tf, cam, 40, 40, workers=w).pixels
              for w in (1, 2, 3, 5)]
    for f in frames[1:]:
        np.testing.assert_array_equal(frames[0], f)


def test_dvr_sees_the_object():
    v = nested_shells(24)
    tf = grayscale_xray_tf(RampOpacity(rsv=0.2, v_min=v.v_min, v_max=v.v_max))
    img = render_dvr(v, tf, orthogonal_cameras(v)[0], 32, 32)
    center = img.pixels[16, 16, :3]
    corner = img.pixels[0, 0, :3]
    assert center.mean() < corner.mean()  # object darker than background


def test_quantization_rule():
    from autovis.render import quantize_rgb
    got = quantize_rgb(np.array([0.5, 0.0, 1.0, 2.0, -0.2, 0.999, 0.002]))
    assert got.tolist() == [128, 0, 255, 255, 0, 255, 1]


def test_png_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    px = rng.integers(0, 256, size=(9, 7, 4), dtype=np.uint8)
    img = Image.from_pixels(px)
    back = Image.from_png_bytes(img.to_png_bytes())
    np.testing.assert_array_equal(back.pixels, px)
    p = tmp_path / "t.png"
    img.save(p)
    assert p.stat().st_size > 0


def test_camera_validation_and_basis():
    with pytest.raises(ConfigError):
        Camera(position=(0, 0, 1), look_at=(0, 0, 1), up=(0, 1, 0))
    with pytest.raises(ConfigError):
        Camera(position=(0, 0, 2), look_at=(0, 0, 0), up=(0, 0, 1))
    cam = Camera(position=(0, 0, 5), look_at=(0, 0, 0), up=(0, 1, 0))
    right, up, fwd = cam.basis()
    for a in (right, up, fwd):
        assert np.linalg.norm(a) == pytest.approx(1.0)
    assert np.dot(right, up) == pytest.approx(0.0, abs=1e-12)
    assert np.dot(fwd, np.array([0, 0, -1])) == pytest.approx(1.0)
    assert Camera.from_dict(cam.to_dict()) == cam


# -- marching cubes -------------------------------------------------------

def sphere_volume(n=64, r=20.0):
    m = VolumeMeta(dims=(n, n, n), spacing=(1, 1, 1), origin=(0, 0, 0),
                   scalar_kind="float32")
    g = np.arange(n, dtype=np.float32) - (n - 1) / 2.0
    x, y, z = np.meshgrid(g, g, g, indexing="ij")
    rad = np.sqrt(x * x + y * y + z * z)
    return Volume.from_values(m, (r - rad).astype(np.float32)), (n - 1) / 2.0


def edge_degrees(triangles):
    counts = {}
    for tri in triangles:
        a, b, c = sorted(int(i) for i in tri)
        for e in ((a, b), (b, c), (a, c)):
            counts[e] = counts.get(e, 0) + 1
    return counts


def test_marching_cubes_sphere_oracle():
    v, c = sphere_volume()
    mesh = extract_isosurface(v, 0.0)  # level set at radius 20
    assert not mesh.is_empty
    radii = np.linalg.norm(mesh.vertices - c, axis=1)
    assert np.all(np.abs(radii - 20.0) <= 0.5)
    # watertight: every edge belongs to exactly two triangles
    degrees = edge_degrees(mesh.triangles)
    assert set(degrees.values()) == {2}


def test_marching_cubes_normals_outward():
    v, c = sphere_volume(n=32, r=10.0)
    mesh = extract_isosurface(v, 0.0)
    # field decreases outward, normals point toward decreasing values
    outward = mesh.vertices - c
    outward /= np.linalg.norm(outward, axis=1, keepdims=True)
    dots = np.sum(mesh.normals * outward, axis=1)
    assert np.all(dots > 0.7)
    norms = np.linalg.norm(mesh.normals, axis=1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-6)


def test_marching_cubes_out_of_range_empty():
    v = nested_shells(16)
    assert extract_isosurface(v, v.v_max + 1.0).is_empty
    assert extract_isosurface(v, v.v_min).is_empty


def test_isosurface_respects_spacing_and_origin():
    m = VolumeMeta(dims=(16, 16, 16), spacing=(2, 2, 2), origin=(-10, 0, 5),
                   scalar_kind="float32")
    g = np.arange(16, dtype=np.float32)
    x, y, z = np.meshgrid(g, g, g, indexing="ij")
    vals = (x - 7.5).astype(np.float32)  # plane x_index = 7.5
    v = Volume.from_values(m, vals)
    mesh = extract_isosurface(v, 0.0)
    xs = mesh.vertices[:, 0]
    np.testing.assert_allclose(xs, -10 + 7.5 * 2, atol=1e-5)


# -- mesh rasterizer -------------------------------------------------------

def test_mesh_render_headlight_shading():
    v, c = sphere_volume(n=32, r=10.0)
    mesh = extract_isosurface(v, 0.0)
    cam = orthogonal_cameras(v)[0]
    depth, shade = render_mesh_layer(mesh, cam, 64, 64)
    hit = np.isfinite(depth)
    assert hit.any()
    assert shade[hit].max() <= 1.0 + 1e-9
    assert shade[hit].min() >= AMBIENT - 1e-9
    # sphere center faces the camera head-on: max shade ~ ambient + diffuse
    assert shade[hit].max() >= AMBIENT + DIFFUSE - 0.05


def test_mesh_render_empty_is_white():
    from autovis.render import Mesh
    img = render_mesh(Mesh.empty(), (1, 0, 0),
                      Camera(position=(0, 0, 5), look_at=(0, 0, 0),
                             up=(0, 1, 0)), 16, 16)
    assert np.all(img.pixels[:, :, :3] == 255)


def test_composite_layers_nearest_first():
    depth_near = np.full((4, 4), 5.0)
    depth_far = np.full((4, 4), 9.0)
    shade = np.ones((4, 4))
    img = composite_mesh_layers(
        [(depth_far, shade, (0.0, 1.0, 0.0), 1.0),
         (depth_near, shade, (1.0, 0.0, 0.0), 1.0)], 4, 4)
    # opaque near layer hides the far one regardless of list order
    np.testing.assert_array_equal(img.pixels[:, :, 0], 255)
    np.testing.assert_array_equal(img.pixels[:, :, 1], 0)


def test_composite_layers_translucent_blend():
    depth_near = np.full((2, 2), 5.0)
    depth_far = np.full((2, 2), 9.0)
    shade = np.ones((2, 2))
    img = composite_mesh_layers(
        [(depth_near, shade, (1.0, 0.0, 0.0), 0.5),
         (depth_far, shade, (0.0, 1.0, 0.0), 1.0)], 2, 2)
    # 0.5 red over opaque green: r = 0.5, g = 0.5
    assert img.pixels[0, 0, 0] == 128
    assert img.pixels[0, 0, 1] == 128
    assert img.pixels[0, 0, 2] == 0


def test_depth_buffer_occlusion():
    # two unit triangles at different depths; nearer one wins the overlap
    from autovis.render import Mesh
    tri_near = Mesh(
        vertices=np.array([[-1, -1, 1.0], [1, -1, 1.0], [0, 1, 1.0]]),
        normals=np.array([[0, 0, 1.0]] * 3),
        triangles=np.array([[0, 1, 2]]))
    tri_far = Mesh(
        vertices=np.array([[-1, -1, -1.0], [1, -1, -1.0], [0, 1, -1.0]]),
        normals=np.array([[0, 0, 1.0]] * 3),
        triangles=np.array([[0, 1, 2]]))
    cam = Camera(position=(0, 0, 5), look_at=(0, 0, 0), up=(0, 1, 0))
    d_near, _ = render_mesh_layer(tri_near, cam, 32, 32)
    d_far, _ = render_mesh_layer(tri_far, cam, 32, 32)
    both = np.isfinite(d_near) & np.isfinite(d_far)
    assert both.any()
    assert np.all(d_near[both] < d_far[both])


def test_orthogonal_camera_conventions():
    v = nested_shells(16)
    cams = orthogonal_cameras(v)
    assert len(cams) == 6
    dirs = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    c = np.array(v.centroid)
    for cam, d in zip(cams, dirs):
        offset = np.array(cam.position) - c
        offset /= np.linalg.norm(offset)
        np.testing.assert_allclose(offset, d, atol=1e-12)
        assert np.allclose(cam.look_at, c)
    assert cams[2].up == (0.0, 0.0, 1.0)  # +y view cannot use +y up
    assert cams[0].up == (0.0, 1.0, 0.0)


def test_four_view_cameras_standoff():
    v = nested_shells(16)
    cams = four_view_cameras(v)
    assert len(cams) == 4
    c = np.array(v.centroid)
    dist = [np.linalg.norm(np.array(cam.position) - c) for cam in cams]
    np.testing.assert_allclose(dist, dist[0], rtol=1e-12)
