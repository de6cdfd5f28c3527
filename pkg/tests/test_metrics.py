from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
import trimesh
from loguru import logger
from scipy.spatial.transform import Rotation

from src.metrics import (
    dsc_3d,
    feret_diameter,
    hausdorff,
    mesh_hausdorff,
    resolution_limited_dsc,
    resolution_limited_volume_error,
    roundness,
    shape_descriptors,
    sphericity,
    surface_error_map,
)
from src.phantom import Ellipsoid, Sphere, ground_truth_mesh, voxelize_shape
from src.reconstruction import GridSpec, extract_surface
from src.transforms import RigidTransform
from src.utils.errors import DegenerateComponentError, InvalidInputError
from tests.utils import brute_force_hausdorff


def test_dsc_3d_basic_cases() -> None:
    a = np.zeros((6, 6, 6), dtype=bool)
    a[:3] = True
    b = np.zeros_like(a)
    b[3:] = True
    c = np.zeros_like(a)
    c[1:4] = True
    assert dsc_3d(a, a) == 1.0
    assert dsc_3d(a, b) == 0.0
    assert dsc_3d(a, c) == pytest.approx(2.0 / 3.0)
    assert dsc_3d(c, a) == dsc_3d(a, c)
    assert dsc_3d(np.zeros_like(a), np.zeros_like(a)) == 1.0
    with pytest.raises(InvalidInputError):
        dsc_3d(a, np.zeros((6, 6, 5), dtype=bool))


def test_resolution_limited_bound_for_half_millimetre_error() -> None:
    dsc = resolution_limited_dsc(11.5, 0.5)
    assert dsc == pytest.approx(2 * 11.5 ** 3 / (11.5 ** 3 + 12.0 ** 3))
    assert dsc == pytest.approx(0.9362, abs=1e-4)
    assert round(dsc, 2) == 0.94
    assert resolution_limited_volume_error(11.5, 0.5) == pytest.approx(0.1362, abs=1e-4)
    assert resolution_limited_dsc(11.5, 0.0) == 1.0
    with pytest.raises(InvalidInputError):
        resolution_limited_dsc(0.0, 0.5)
    with pytest.raises(InvalidInputError):
        resolution_limited_dsc(1.0, -1.0)


def test_hausdorff_matches_brute_force(rng: np.random.Generator) -> None:
    for _ in range(200):
        xs = rng.normal(size=(rng.integers(1, 500), 3)) * 10
        ys = rng.normal(size=(rng.integers(1, 500), 3)) * 10 + rng.normal(size=3)
        hd_max, hd95 = hausdorff(xs, ys)
        expected_max, expected_95 = brute_force_hausdorff(xs, ys)
        assert hd_max == expected_max
        assert hd95 == pytest.approx(expected_95, abs=1e-12)
        assert 0.0 <= hd95 <= hd_max


def test_hausdorff_is_symmetric_and_zero_on_identical_sets(rng: np.random.Generator) -> None:
    xs = rng.uniform(-5, 5, size=(300, 3))
    ys = rng.uniform(-5, 5, size=(200, 3))
    assert hausdorff(xs, ys) == hausdorff(ys, xs)
    assert hausdorff(xs, xs) == (0.0, 0.0)


def test_hausdorff_of_translated_set_equals_shift() -> None:
    grid = np.stack(np.meshgrid(np.arange(5.0), np.arange(5.0), [0.0], indexing="ij"), axis=-1).reshape(-1, 3)
    hd_max, hd95 = hausdorff(grid, grid + [0.0, 0.0, 0.75])
    assert hd_max == pytest.approx(0.75)
    assert hd95 == pytest.approx(0.75)


def test_hausdorff_rejects_empty_sets() -> None:
    with pytest.raises(InvalidInputError):
        hausdorff(np.zeros((0, 3)), np.ones((3, 3)))


def test_mesh_hausdorff_between_concentric_spheres() -> None:
    inner = ground_truth_mesh(Sphere((0.0, 0.0, 0.0), 10.0), 0.5)
    outer = ground_truth_mesh(Sphere((0.0, 0.0, 0.0), 11.0), 0.5)
    hd_max, hd95 = mesh_hausdorff(inner, outer)
    assert hd_max == pytest.approx(1.0, abs=0.05)
    assert hd95 == pytest.approx(1.0, abs=0.05)


def test_surface_error_map_is_zero_for_identical_surfaces() -> None:
    ref = ground_truth_mesh(Sphere((0.0, 0.0, 0.0), 10.0), 1.0)
    error_map = surface_error_map(ref, ref)
    np.testing.assert_allclose(error_map.distances, 0.0, atol=1e-12)

    shift = np.array([3.0, -1.0, 2.0])
    moved = ref.copy()
    moved.apply_translation(shift)
    aligned = surface_error_map(moved, ref, registration=RigidTransform.from_rotvec([0.0, 0.0, 0.0], -shift))
    np.testing.assert_allclose(aligned.distances, 0.0, atol=1e-9)


def test_surface_error_map_sign_follows_outward_normal(tmp_path: Path) -> None:
    ref = ground_truth_mesh(Sphere((0.0, 0.0, 0.0), 10.0), 0.5)
    grown = ground_truth_mesh(Sphere((0.0, 0.0, 0.0), 11.0), 0.5)
    shrunk = ground_truth_mesh(Sphere((0.0, 0.0, 0.0), 9.0), 0.5)

    outside = surface_error_map(grown, ref)
    assert outside.mean == pytest.approx(1.0, abs=0.05)
    assert np.all(outside.distances > 0)
    inside = surface_error_map(shrunk, ref)
    assert inside.mean == pytest.approx(-1.0, abs=0.05)
    assert inside.rms == pytest.approx(1.0, abs=0.05)

    hd_max, _ = mesh_hausdorff(grown, ref)
    assert outside.max <= hd_max + 0.05
    assert set(outside.summary()) == {"mean_mm", "rms_mm", "max_mm"}

    path = outside.export_ply(tmp_path / "errors.ply")
    assert path.read_bytes().startswith(b"ply")


def test_surface_error_map_rejects_degenerate_reference() -> None:
    pred = ground_truth_mesh(Sphere((0.0, 0.0, 0.0), 5.0), 1.0)
    empty = trimesh.Trimesh(vertices=np.zeros((3, 3)), faces=np.zeros((0, 3), dtype=int))
    with pytest.raises(InvalidInputError):
        surface_error_map(pred, empty)


def test_feret_diameter_of_cube_is_space_diagonal() -> None:
    cube = trimesh.creation.box(extents=(4.0, 4.0, 4.0))
    assert feret_diameter(cube.vertices) == pytest.approx(4.0 * np.sqrt(3.0))
    assert feret_diameter(np.array([[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]])) == pytest.approx(5.0)
    assert feret_diameter(np.zeros((1, 3))) == 0.0


def test_roundness_is_one_for_sphere_formula() -> None:
    r = 7.0
    assert roundness(4.0 / 3.0 * np.pi * r ** 3, 4.0 * np.pi * r ** 2) == pytest.approx(1.0)
    cube = trimesh.creation.box(extents=(2.0, 2.0, 2.0))
    assert roundness(cube.volume, cube.area) == pytest.approx((np.pi / 6.0) ** (1.0 / 3.0))


def test_roundness_clipping_is_logged_and_recorded() -> None:
    r = 7.0
    volume, area = 4.0 / 3.0 * np.pi * r ** 3, 0.9 * 4.0 * np.pi * r ** 2
    messages = []
    sink = logger.add(lambda message: messages.append(message.record["message"]), level="DEBUG", format="{message}")
    try:
        assert roundness(volume, area) == 1.0
    finally:
        logger.remove(sink)
    assert sphericity(volume, area) == pytest.approx(1.0 / 0.9)
    assert any("진구도" in text for text in messages)

    sphere = Sphere((15.0, 15.0, 15.0), 10.0)
    spec = GridSpec((0.0, 0.0, 0.0), 0.5, (61, 61, 61))
    component = voxelize_shape(sphere, spec)
    undersized = ground_truth_mesh(Sphere((15.0, 15.0, 15.0), 8.0))
    record = shape_descriptors(component, spec, undersized)
    assert record.roundness == 1.0
    assert record.roundness_clipped
    assert record.to_dict()["roundness_clipped"] is True


def _descriptors(shape, spec: GridSpec):
    component = voxelize_shape(shape, spec)
    return shape_descriptors(component, spec, extract_surface(component, spec, smoothing_sigma=1.0))


def test_shape_descriptors_of_voxelized_sphere() -> None:
    sphere = Sphere((15.0, 15.0, 15.0), 11.57)
    spec = GridSpec((0.0, 0.0, 0.0), 0.5, (61, 61, 61))
    record = _descriptors(sphere, spec)
    assert record.volume == pytest.approx(sphere.volume, rel=0.02)
    assert record.surface_area == pytest.approx(sphere.surface_area, rel=0.05)
    assert record.roundness > 0.9
    assert record.elongation == pytest.approx(1.0, abs=0.02)
    assert record.flatness == pytest.approx(1.0, abs=0.02)
    np.testing.assert_allclose(record.centroid, sphere.center, atol=0.05)
    assert record.feret_max == pytest.approx(2 * 11.57, abs=1.0)
    assert set(record.to_dict()) >= {"volume_mm3", "roundness", "feret_max_mm", "principal_axes"}


def test_shape_descriptors_of_prolate_ellipsoid() -> None:
    ellipsoid = Ellipsoid((30.0, 15.0, 15.0), (24.65, 12.33, 12.33))
    spec = GridSpec((0.0, 0.0, 0.0), 0.5, (121, 61, 61))
    record = _descriptors(ellipsoid, spec)
    assert record.elongation == pytest.approx(2.0, abs=0.05)
    assert record.flatness == pytest.approx(1.0, abs=0.05)
    assert abs(record.principal_axes[0][0]) == pytest.approx(1.0, abs=1e-3)


def test_roundness_is_stable_under_rigid_motion() -> None:
    spec = GridSpec((0.0, 0.0, 0.0), 0.5, (121, 121, 61))
    base = Ellipsoid((30.0, 30.0, 15.0), (24.65, 12.33, 12.33))
    turned = Ellipsoid(
        (30.5, 29.7, 15.2), (24.65, 12.33, 12.33), Rotation.from_euler("z", 35, degrees=True).as_quat()
    )
    assert _descriptors(turned, spec).roundness == pytest.approx(_descriptors(base, spec).roundness, abs=0.02)


def test_shape_descriptors_reject_degenerate_components() -> None:
    spec = GridSpec((0.0, 0.0, 0.0), 1.0, (10, 10, 10))
    mesh = trimesh.creation.box(extents=(1.0, 1.0, 1.0))
    tiny = np.zeros(spec.dims, dtype=bool)
    tiny[1, 1, 1:4] = True
    with pytest.raises(DegenerateComponentError):
        shape_descriptors(tiny, spec, mesh)
    flat = np.zeros(spec.dims, dtype=bool)
    flat[2:7, 2:7, 4] = True
    with pytest.raises(DegenerateComponentError):
        shape_descriptors(flat, spec, mesh)
