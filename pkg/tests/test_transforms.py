from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
import trimesh
from scipy.spatial.transform import Rotation

from src.transforms import (
    PoseStream,
    RigidTransform,
    bracketing_gaps,
    compose,
    estimate_latency,
    fiducial_register,
    icp_register,
    interpolate_pose,
    interpolate_poses,
    invert,
    read_pose_csv,
    transform_distance,
    transforms_close,
    write_pose_csv,
)
from src.utils.errors import (
    DegenerateConfigurationError,
    DegenerateSignalError,
    InvalidInputError,
    OutOfRangeError,
)
from src.utils.sampling import surface_points


def _random_transform(rng: np.random.Generator, max_angle: float = np.pi, max_shift: float = 50.0) -> RigidTransform:
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, max_angle)
    return RigidTransform.from_rotvec(axis * angle, rng.uniform(-max_shift, max_shift, size=3))


def test_quaternion_is_normalized_to_non_negative_w() -> None:
    t = RigidTransform([0.0, 0.0, 0.0, -2.0], [1.0, 2.0, 3.0])
    np.testing.assert_allclose(t.rotation, [0.0, 0.0, 0.0, 1.0])
    assert transforms_close(t, RigidTransform([0.0, 0.0, 0.0, 1.0], [1.0, 2.0, 3.0]))


def test_zero_quaternion_and_non_finite_values_are_rejected() -> None:
    with pytest.raises(InvalidInputError):
        RigidTransform([0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0])
    with pytest.raises(InvalidInputError):
        RigidTransform([0.0, 0.0, 0.0, 1.0], [np.nan, 0.0, 0.0])


def test_compose_applies_right_operand_first() -> None:
    a = RigidTransform.from_rotvec([0.0, 0.0, np.pi / 2], [10.0, 0.0, 0.0])
    b = RigidTransform.from_rotvec([0.0, 0.0, 0.0], [1.0, 0.0, 0.0])
    p = np.array([0.0, 0.0, 0.0])
    np.testing.assert_allclose(compose(a, b).apply(p), a.apply(b.apply(p)), atol=1e-12)
    np.testing.assert_allclose((a @ b).apply(p), [10.0, 1.0, 0.0], atol=1e-12)


def test_inverse_and_homogeneous_agree() -> None:
    rng = np.random.default_rng(3)
    t = _random_transform(rng)
    points = rng.normal(size=(20, 3)) * 10
    np.testing.assert_allclose(t.inverse().apply(t.apply(points)), points, atol=1e-9)
    h = t.homogeneous()
    expected = points @ h[:3, :3].T + h[:3, 3]
    np.testing.assert_allclose(t.apply(points), expected, atol=1e-9)
    assert transforms_close(RigidTransform.from_matrix(h), t, tol=1e-9)


def test_transform_dict_round_trip_keeps_values() -> None:
    t = RigidTransform.from_rotvec([0.1, -0.2, 0.3], [4.0, 5.0, 6.0])
    restored = RigidTransform.from_dict(t.to_dict())
    assert transform_distance(t, restored) == pytest.approx((0.0, 0.0), abs=1e-12)


def _stream() -> PoseStream:
    times = [0.0, 1.0, 2.0]
    quats = Rotation.from_rotvec([[0, 0, 0], [0, 0, np.pi / 2], [0, 0, np.pi / 2]]).as_quat()
    trans = [[0, 0, 0], [10, 0, 0], [10, 10, 0]]
    return PoseStream.from_arrays(times, quats, trans)


def test_interpolation_returns_samples_exactly_at_sample_times() -> None:
    stream = _stream()
    for sample in stream:
        pose = interpolate_pose(stream, sample.timestamp)
        np.testing.assert_array_equal(pose.rotation, sample.pose.rotation)
        np.testing.assert_array_equal(pose.translation, sample.pose.translation)


def test_interpolation_uses_slerp_and_linear_translation() -> None:
    stream = _stream()
    mid = interpolate_pose(stream, 0.5)
    assert np.degrees(mid.as_rotation().magnitude()) == pytest.approx(45.0, abs=1e-9)
    np.testing.assert_allclose(mid.translation, [5.0, 0.0, 0.0], atol=1e-12)

    batch = interpolate_poses(stream, [0.25, 0.5, 1.0, 1.5])
    assert transforms_close(batch[1], mid, tol=1e-9)
    np.testing.assert_allclose(batch[3].translation, [10.0, 5.0, 0.0], atol=1e-12)


def test_interpolation_outside_stream_raises() -> None:
    stream = _stream()
    with pytest.raises(OutOfRangeError):
        interpolate_pose(stream, 2.5)
    with pytest.raises(OutOfRangeError):
        interpolate_poses(stream, [-0.1, 1.0])


def test_non_increasing_timestamps_are_rejected() -> None:
    quats = np.tile([0.0, 0.0, 0.0, 1.0], (3, 1))
    with pytest.raises(InvalidInputError):
        PoseStream.from_arrays([0.0, 1.0, 1.0], quats, np.zeros((3, 3)))


def test_bracketing_gaps_reports_sample_spacing() -> None:
    stream = PoseStream.from_arrays([0.0, 0.1, 0.5], np.tile([0, 0, 0, 1.0], (3, 1)), np.zeros((3, 3)))
    gaps = bracketing_gaps(stream, [0.0, 0.05, 0.3, 0.7])
    np.testing.assert_allclose(gaps[:3], [0.0, 0.1, 0.4])
    assert np.isinf(gaps[3])


def test_pose_csv_preserves_stream(tmp_path: Path) -> None:
    stream = _stream()
    path = write_pose_csv(stream, tmp_path / "poses.csv")
    restored = read_pose_csv(path)
    np.testing.assert_array_equal(restored.timestamps, stream.timestamps)
    np.testing.assert_array_equal(restored.translations, stream.translations)
    np.testing.assert_allclose(restored.quaternions, stream.quaternions, atol=0.0)


def test_fiducial_register_recovers_transform_exactly() -> None:
    rng = np.random.default_rng(0)
    truth = _random_transform(rng)
    moving = rng.uniform(-40, 40, size=(8, 3))
    estimate, fre = fiducial_register(moving, truth.apply(moving))
    assert fre < 1e-9
    assert transforms_close(estimate, truth, tol=1e-9)
    assert np.linalg.det(estimate.matrix()) == pytest.approx(1.0)


def test_fiducial_register_rejects_degenerate_configurations() -> None:
    line = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0], [5.0, 5.0, 5.0]])
    with pytest.raises(DegenerateConfigurationError):
        fiducial_register(line, line + 1.0)
    with pytest.raises(DegenerateConfigurationError):
        fiducial_register(line[:2], line[:2])
    with pytest.raises(InvalidInputError):
        fiducial_register(np.zeros((4, 3)), np.zeros((5, 3)))


def test_icp_recovers_small_offset_against_point_target() -> None:
    mesh = trimesh.creation.box(extents=(20.0, 12.0, 6.0))
    target = surface_points(mesh, spacing=0.5, seed=1)
    truth = RigidTransform.from_rotvec(np.radians([1.0, -0.5, 1.0]), [0.3, -0.2, 0.1])
    source = truth.inverse().apply(target)

    result = icp_register(source, target, max_iterations=200)
    angle, shift = transform_distance(result.transform, truth)
    assert result.rms < 0.05
    assert np.degrees(angle) < 0.2
    assert shift < 0.05


def test_icp_against_mesh_converges_to_small_residual() -> None:
    mesh = trimesh.creation.box(extents=(20.0, 12.0, 6.0))
    truth = RigidTransform.from_rotvec(np.radians([1.5, 1.0, -2.0]), [0.5, 0.3, -0.2])
    source = truth.inverse().apply(surface_points(mesh, spacing=0.8, seed=7))

    result = icp_register(source, mesh, sample_spacing=0.1, seed=2)
    angle, shift = transform_distance(result.transform, truth)
    assert result.rms < 0.1
    assert np.degrees(angle) < 0.5
    assert shift < 0.15


def test_icp_rejects_empty_source() -> None:
    with pytest.raises(InvalidInputError):
        icp_register(np.zeros((0, 3)), np.ones((5, 3)))


def test_latency_estimate_matches_known_delay() -> None:
    rate = 100.0
    t = np.arange(0.0, 12.0, 1.0 / rate)

    def signal(x):
        return np.sin(2 * np.pi * 0.3 * x) + 0.5 * np.sin(2 * np.pi * 0.71 * x + 1.0) + 0.2 * np.sin(2 * np.pi * 1.3 * x)

    delay = 0.08
    latency = estimate_latency(signal(t), signal(t - delay), rate, search_window=0.5)
    assert latency == pytest.approx(delay, abs=2e-3)

    reverse = estimate_latency(signal(t - delay), signal(t), rate, search_window=0.5)
    assert reverse == pytest.approx(-delay, abs=2e-3)


def test_latency_rejects_constant_or_short_signals() -> None:
    with pytest.raises(DegenerateSignalError):
        estimate_latency(np.ones(500), np.arange(500.0), 100.0, 0.5)
    with pytest.raises(InvalidInputError):
        estimate_latency(np.arange(50.0), np.arange(50.0), 100.0, 0.5)


def test_invert_composes_to_identity() -> None:
    rng = np.random.default_rng(21)
    for _ in range(20):
        t = _random_transform(rng)
        assert transforms_close(compose(invert(t), t), RigidTransform.identity(), tol=1e-9)
        assert transforms_close(invert(t), t.inverse(), tol=1e-12)
