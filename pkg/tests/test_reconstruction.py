from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.phantom import Sphere, voxelize_shape
from src.reconstruction import (
    GridSpec,
    VoxelGrid,
    auto_grid,
    extract_surface,
    insert_frame,
    load_volume,
    reconstruct,
    save_volume,
    threshold_and_label,
)
from src.transforms import RigidTransform
from src.utils.errors import InvalidInputError


def _frames(count: int = 12, seed: int = 0):
    rng = np.random.default_rng(seed)
    frames = []
    for k in range(count):
        mask = rng.random((20, 30)) < 0.3
        pose = RigidTransform.from_rotation(
            Rotation.from_euler("xyz", rng.uniform(-20, 20, 3), degrees=True), (k * 0.7, 1.0, 2.0)
        )
        frames.append((mask, pose, 0.3))
    return frames


def test_grid_index_mapping_rounds_to_nearest_voxel() -> None:
    spec = GridSpec((10.0, 0.0, -5.0), 0.5, (10, 10, 10))
    np.testing.assert_array_equal(spec.world_to_index([[10.2, 0.3, -4.1]]), [[0, 1, 2]])
    np.testing.assert_allclose(spec.index_to_world([2, 4, 6]), [11.0, 2.0, -2.0])
    assert list(spec.in_bounds(np.array([[0, 0, 0], [10, 0, 0], [-1, 3, 3]]))) == [True, False, False]
    np.testing.assert_allclose(spec.upper, [14.5, 4.5, -0.5])


def test_grid_spec_validation_and_crop() -> None:
    with pytest.raises(InvalidInputError):
        GridSpec((0, 0, 0), 0.0, (2, 2, 2))
    with pytest.raises(InvalidInputError):
        GridSpec((0, 0, 0), 1.0, (0, 2, 2))

    spec = GridSpec((0.0, 0.0, 0.0), 1.0, (20, 20, 20))
    sub, slices = spec.crop(np.array([5.0, 5.0, 5.0]), np.array([8.0, 9.0, 10.0]), margin=1.0)
    np.testing.assert_allclose(sub.origin, [4.0, 4.0, 4.0])
    assert sub.dims == (6, 7, 8)
    assert slices == (slice(4, 10), slice(4, 11), slice(4, 12))
    assert GridSpec.from_dict(spec.to_dict()).dims == spec.dims


def test_insert_frame_maps_pixel_to_nearest_voxel() -> None:
    grid = VoxelGrid(GridSpec((0.0, 0.0, 0.0), 1.0, (5, 5, 5)))
    mask = np.zeros((4, 4), dtype=bool)
    mask[2, 3] = True  # row 2, col 3 -> image (3, 2, 0) mm at spacing 1
    pose = RigidTransform.from_rotvec([0.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    insert_frame(grid, mask, pose, 1.0)
    assert grid.values[3, 2, 1] == 255
    assert grid.hit_count[3, 2, 1] == 1
    assert np.count_nonzero(grid.values) == 1


def test_insert_frame_compounds_by_maximum_and_counts_hits() -> None:
    grid = VoxelGrid(GridSpec((0.0, 0.0, 0.0), 1.0, (3, 3, 3)))
    mask = np.zeros((2, 2), dtype=bool)
    mask[0, 0] = True
    pose = RigidTransform.identity()
    insert_frame(grid, mask, pose, 1.0, intensities=np.full((2, 2), 90, dtype=np.uint8))
    insert_frame(grid, mask, pose, 1.0, intensities=np.full((2, 2), 40, dtype=np.uint8))
    assert grid.values[0, 0, 0] == 90
    assert grid.hit_count[0, 0, 0] == 2
    with pytest.raises(InvalidInputError):
        insert_frame(grid, mask, pose, 1.0, intensities=np.zeros((3, 3), dtype=np.uint8))


def test_insert_frame_counts_pixels_outside_grid() -> None:
    grid = VoxelGrid(GridSpec((0.0, 0.0, 0.0), 1.0, (2, 2, 2)))
    mask = np.ones((4, 4), dtype=bool)
    insert_frame(grid, mask, RigidTransform.identity(), 1.0)
    assert grid.out_of_grid == 12
    assert grid.get_stats()["out_of_grid_pixels"] == 12


def test_auto_grid_covers_every_frame_footprint() -> None:
    frames = _frames()
    spec = auto_grid(frames, spacing=0.5, padding=2.0)
    for mask, pose, s in frames:
        h, w = mask.shape
        corners = pose.apply(np.array([[0, 0, 0], [w * s, 0, 0], [0, h * s, 0], [w * s, h * s, 0]]))
        assert np.all(spec.in_bounds(spec.world_to_index(corners)))


def test_reconstruct_is_independent_of_frame_order() -> None:
    frames = _frames(20, seed=3)
    spec = auto_grid(frames, spacing=0.5)
    ordered = reconstruct(frames, spec)
    shuffled = [frames[i] for i in np.random.default_rng(9).permutation(len(frames))]
    mixed = reconstruct(shuffled, spec)
    np.testing.assert_array_equal(ordered.values, mixed.values)
    np.testing.assert_array_equal(ordered.hit_count, mixed.hit_count)
    assert ordered.out_of_grid == mixed.out_of_grid == 0


def test_reconstruct_requires_frames() -> None:
    with pytest.raises(InvalidInputError):
        reconstruct([])


def _grid_with_blocks(gap: int) -> VoxelGrid:
    grid = VoxelGrid(GridSpec((0.0, 0.0, 0.0), 1.0, (40, 20, 20)))
    grid.values[2:12, 5:15, 5:15] = 255
    grid.values[12 + gap:20 + gap, 5:15, 5:15] = 255
    grid.values[35, 1, 1] = 255
    return grid


def test_components_sorted_by_size_and_filtered() -> None:
    components = threshold_and_label(_grid_with_blocks(3), iso=128, min_voxels=10)
    assert components.num_components == 2
    assert components.counts == (1000, 800)
    np.testing.assert_allclose(components.centroid(1), [6.5, 9.5, 9.5])
    assert components.component(2).sum() == 800
    with pytest.raises(InvalidInputError):
        components.component(3)


def test_link_radius_groups_nearby_fragments_without_adding_voxels() -> None:
    grid = _grid_with_blocks(1)
    assert threshold_and_label(grid, min_voxels=10).num_components == 2
    linked = threshold_and_label(grid, min_voxels=10, link_radius=1)
    assert linked.num_components == 1
    assert linked.counts == (1800,)
    assert linked.component(1).sum() == 1800


def test_single_voxel_surface_is_octahedron() -> None:
    spec = GridSpec((0.0, 0.0, 0.0), 0.5, (3, 3, 3))
    component = np.zeros(spec.dims, dtype=bool)
    component[1, 1, 1] = True
    mesh = extract_surface(component, spec)
    assert mesh.is_watertight
    assert mesh.volume == pytest.approx(0.5 ** 3 / 6.0)
    np.testing.assert_allclose(mesh.centroid, [0.5, 0.5, 0.5], atol=1e-9)


def test_voxelized_sphere_surface_volume() -> None:
    sphere = Sphere((15.0, 15.0, 15.0), 11.57)
    spec = GridSpec((0.0, 0.0, 0.0), 0.5, (61, 61, 61))
    mesh = extract_surface(voxelize_shape(sphere, spec), spec)
    assert mesh.is_watertight
    assert abs(mesh.volume - sphere.volume) / sphere.volume < 0.03
    np.testing.assert_allclose(mesh.centroid, sphere.center, atol=0.05)


def test_extract_surface_rejects_empty_component() -> None:
    spec = GridSpec((0.0, 0.0, 0.0), 1.0, (4, 4, 4))
    with pytest.raises(InvalidInputError):
        extract_surface(np.zeros(spec.dims, dtype=bool), spec)


def test_volume_file_preserves_values_and_geometry(tmp_path: Path) -> None:
    grid = _grid_with_blocks(2)
    grid = VoxelGrid(GridSpec((-3.5, 2.0, 10.25), 0.5, grid.dims), grid.values)
    path = save_volume(grid, tmp_path / "volume")
    assert path.suffix == ".mhd"
    restored = load_volume(path)
    np.testing.assert_array_equal(restored.values, grid.values)
    np.testing.assert_allclose(restored.origin, grid.origin)
    assert restored.spacing == pytest.approx(0.5)
    assert restored.dims == grid.dims
