from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from src.scansim import (
    EMDistortion,
    EMTracker,
    FrameSpec,
    KinematicTracker,
    OpticalTracker,
    TrajectoryPlan,
    calibrate_latency,
    corrupt_poses,
    coverage_plan,
    fiducial_points,
    fiducial_registration_report,
    latency_for_compensation,
    load_scan,
    measure_fiducials,
    plan_poses,
    render_frame,
    save_scan,
    simulate_scan,
    simulate_temporal_calibration,
    tracker_from_dict,
)
from src.transforms import PoseStream, RigidTransform, transforms_close
from src.utils.errors import ConfigError, InvalidInputError
from tests.utils import probe_pose

SMALL_SPEC = FrameSpec(width=64, height=80, pixel_spacing=0.6, fov_width=38.4)


def _line_plan(length: float = 100.0, speed: float = 5.0, **kwargs) -> TrajectoryPlan:
    return TrajectoryPlan(probe_pose(0.0), (1.0, 0.0, 0.0), length, speed, **kwargs)


def test_frame_spec_validates_geometry() -> None:
    with pytest.raises(InvalidInputError):
        FrameSpec(width=100, pixel_spacing=0.15, fov_width=38.4)
    with pytest.raises(InvalidInputError):
        FrameSpec(elevational_thickness=6.0)
    assert FrameSpec().depth == pytest.approx(48.0)


def test_plan_poses_spacing_and_count() -> None:
    stream = plan_poses(_line_plan(100.0, 5.0), 20.0)
    assert len(stream) == 401
    steps = np.linalg.norm(np.diff(stream.translations, axis=0), axis=1)
    np.testing.assert_allclose(steps, 0.25, atol=1e-9)
    assert np.all(stream.quaternions == stream.quaternions[0])

    fast = plan_poses(_line_plan(100.0, 17.5), 20.0)
    np.testing.assert_allclose(np.linalg.norm(np.diff(fast.translations, axis=0), axis=1), 0.875, atol=1e-9)


def test_plan_without_angles_keeps_start_orientation() -> None:
    plan = _line_plan(20.0)
    stream = plan_poses(plan, 20.0)
    for sample in stream:
        np.testing.assert_allclose(sample.pose.rotation, plan.start.rotation, atol=1e-12)


def test_multi_sweep_plan_concatenates_with_gap() -> None:
    plan = _line_plan(10.0, 5.0, sweep_offsets=(-10.0, 10.0), sweep_gap_s=1.0)
    stream = plan_poses(plan, 20.0)
    assert plan.multi_sweep
    assert len(stream) == 2 * 41
    ts = stream.timestamps
    assert ts[41] - ts[40] == pytest.approx(1.0)
    lateral = stream.translations[41] - stream.translations[0]
    assert np.linalg.norm(lateral) == pytest.approx(20.0)


def test_plan_rejects_invalid_values() -> None:
    with pytest.raises(InvalidInputError):
        _line_plan(100.0, 0.0)
    with pytest.raises(InvalidInputError):
        _line_plan(0.0, 5.0)


def test_coverage_plan_switches_to_multi_sweep_above_threshold(scene) -> None:
    spec = FrameSpec()
    baseline = coverage_plan(scene, spec, 5.0)
    assert not baseline.multi_sweep
    np.testing.assert_allclose(baseline.direction, [1.0, 0.0, 0.0])
    lo, hi = scene.inclusion_bounds()
    assert baseline.length >= hi[0] - lo[0]

    steep = coverage_plan(scene, spec, 5.0, axial_angle_deg=90.0)
    assert steep.multi_sweep
    assert len(steep.sweep_offsets) > 1
    assert abs(steep.direction[0]) < 1e-9


def test_render_frame_far_outside_block_is_pure_speckle(scene) -> None:
    image, mask = render_frame(scene, probe_pose(-50.0), FrameSpec(), 0)
    assert image.dtype == np.uint8
    assert image.shape == (320, 256)
    assert not mask.any()
    assert image.mean() > 100


def test_render_frame_through_sphere_center_gives_disc(scene) -> None:
    spec = FrameSpec()
    image, mask = render_frame(scene, probe_pose(17.0), spec, 1)
    radius_px = np.sqrt(mask.sum() / np.pi)
    assert radius_px == pytest.approx(11.57 / spec.pixel_spacing, abs=1.0)
    rows, cols = np.nonzero(mask)
    assert cols.mean() * spec.pixel_spacing == pytest.approx(spec.fov_width / 2.0, abs=spec.pixel_spacing)
    assert image[mask].mean() < image[~mask].mean() / 3


def test_mask_area_follows_circle_slice_profile(scene) -> None:
    spec = FrameSpec()
    r = 11.57
    for z in (0.0, 4.0, 8.0):
        _, mask = render_frame(scene, probe_pose(17.0 + z), spec, 2)
        expected = np.pi * (r * r - z * z) / spec.pixel_spacing ** 2
        assert mask.sum() == pytest.approx(expected, rel=0.05)


def test_render_frame_is_deterministic(scene) -> None:
    a = render_frame(scene, probe_pose(20.0), SMALL_SPEC, [7, 3])
    b = render_frame(scene, probe_pose(20.0), SMALL_SPEC, [7, 3])
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])


def _uniform_stream(duration: float = 3.0, rate: float = 20.0) -> PoseStream:
    times = np.arange(int(round(duration * rate))) / rate
    translations = np.column_stack([times * 30.0, np.zeros_like(times), np.zeros_like(times)])
    return PoseStream.from_arrays(times, np.tile([0.0, 0.0, 0.0, 1.0], (len(times), 1)), translations)


def test_zero_noise_kinematic_tracker_is_identity() -> None:
    truth = _uniform_stream()
    reported = corrupt_poses(truth, KinematicTracker(), 0)
    np.testing.assert_array_equal(reported.timestamps, truth.timestamps)
    np.testing.assert_array_equal(reported.translations, truth.translations)
    np.testing.assert_array_equal(reported.quaternions, truth.quaternions)


def test_optical_dropout_removes_samples() -> None:
    truth = _uniform_stream(3.0, 20.0)
    reported = corrupt_poses(truth, OpticalTracker(dropout_intervals=((1.0, 1.5),)), 0)
    assert len(truth) - len(reported) == 10


def test_em_distortion_bias_is_bounded_by_amplitude() -> None:
    truth = _uniform_stream(3.4, 20.0)  # 100 mm of travel
    model = EMTracker(distortion=EMDistortion(amplitude=2.0, spatial_period=100.0))
    reported = corrupt_poses(truth, model, 0)
    deviation = np.abs(reported.translations - truth.translations)
    assert deviation.max() == pytest.approx(2.0, abs=0.05)
    # same bias on every axis
    np.testing.assert_allclose(deviation[:, 0], deviation[:, 1])


def test_noise_and_latency_are_applied() -> None:
    truth = _uniform_stream(10.0, 20.0)
    model = KinematicTracker(pos_noise_rms=0.5, latency=0.04)
    reported = corrupt_poses(truth, model, 3)
    np.testing.assert_allclose(reported.timestamps, truth.timestamps + 0.04)
    rms = np.sqrt(np.mean(np.sum((reported.translations - truth.translations) ** 2, axis=1)))
    assert rms == pytest.approx(0.5, rel=0.15)


def test_tracker_dict_round_trip() -> None:
    model = EMTracker(
        pos_noise_rms=0.2,
        latency=0.01,
        distortion=EMDistortion(amplitude=2.0, spatial_period=80.0, phase=0.5),
        field_origin=(1.0, 2.0, 3.0),
    )
    restored = tracker_from_dict(model.to_dict())
    assert isinstance(restored, EMTracker)
    assert restored.to_dict() == model.to_dict()
    with pytest.raises(InvalidInputError):
        tracker_from_dict({"kind": "sonar"})


def test_negative_latency_is_rejected() -> None:
    with pytest.raises(ConfigError):
        tracker_from_dict({"kind": "optical", "latency_s": -0.02})
    with pytest.raises(InvalidInputError):
        KinematicTracker(latency=-0.01)
    assert tracker_from_dict({"latency_s": 0.0}).latency == 0.0


def _small_plan() -> TrajectoryPlan:
    return TrajectoryPlan(probe_pose(10.0, SMALL_SPEC), (1.0, 0.0, 0.0), 10.0, 5.0)


def test_simulate_scan_ideal_tracker_reports_true_poses(scene) -> None:
    scan = simulate_scan(scene, _small_plan(), SMALL_SPEC, KinematicTracker(), 11)
    assert len(scan) == 41
    assert len(scan.valid_frames) == 41
    for frame in scan.frames:
        np.testing.assert_array_equal(frame.reported_pose.rotation, frame.true_pose.rotation)
        np.testing.assert_array_equal(frame.reported_pose.translation, frame.true_pose.translation)
    assert any(frame.gt_mask.any() for frame in scan.frames)
    assert not scan.dropout_warning


def test_simulate_scan_is_deterministic(scene) -> None:
    model = KinematicTracker(pos_noise_rms=0.1)
    a = simulate_scan(scene, _small_plan(), SMALL_SPEC, model, 5)
    b = simulate_scan(scene, _small_plan(), SMALL_SPEC, model, 5)
    for fa, fb in zip(a.frames, b.frames):
        np.testing.assert_array_equal(fa.image, fb.image)
        np.testing.assert_array_equal(fa.reported_pose.translation, fb.reported_pose.translation)


def test_simulate_scan_flags_heavy_dropout(scene) -> None:
    model = OpticalTracker(dropout_intervals=((0.2, 1.8),))
    scan = simulate_scan(scene, _small_plan(), SMALL_SPEC, model, 0)
    assert scan.dropout_warning
    assert len(scan.valid_frames) < len(scan) / 2
    assert scan.get_stats()["invalid_fraction"] > 0.5


def test_scan_directory_round_trip(scene, tmp_path: Path) -> None:
    model = OpticalTracker(pos_noise_rms=0.1, dropout_intervals=((0.5, 0.8),))
    scan = simulate_scan(scene, _small_plan(), SMALL_SPEC, model, 4)
    directory = save_scan(scan, tmp_path / "scan")
    assert (directory / "frames" / "00000.pgm").exists()
    assert (directory / "poses.csv").exists()
    assert (directory / "truth_poses.csv").exists()

    restored = load_scan(directory)
    assert len(restored) == len(scan)
    assert [f.valid for f in restored.frames] == [f.valid for f in scan.frames]
    for original, loaded in zip(scan.frames, restored.frames):
        np.testing.assert_array_equal(loaded.image, original.image)
        np.testing.assert_array_equal(loaded.gt_mask, original.gt_mask)
        if original.valid:
            np.testing.assert_allclose(loaded.reported_pose.translation, original.reported_pose.translation)
    assert isinstance(restored.model, OpticalTracker)


def test_temporal_calibration_recovers_latency() -> None:
    signals = simulate_temporal_calibration(0.045, seed=2)
    assert calibrate_latency(signals) == pytest.approx(0.045, abs=2e-3)


def test_latency_compensation_modes() -> None:
    model = KinematicTracker(latency=0.03)
    assert latency_for_compensation("none", model, 0) == 0.0
    assert latency_for_compensation("known", model, 0) == pytest.approx(0.03)
    assert latency_for_compensation("calibrated", model, 0) == pytest.approx(0.03, abs=3e-3)
    with pytest.raises(ConfigError):
        latency_for_compensation("guess", model, 0)


def test_fiducial_report_for_ideal_tracker(scene) -> None:
    report = fiducial_registration_report(scene, KinematicTracker(), 0)
    assert report["fiducials"] == 8
    assert report["fre_mm"] < 1e-9
    transform = RigidTransform.from_dict(report["transform"])
    assert transforms_close(transform, RigidTransform.identity(), tol=1e-9)


def test_fiducial_report_fre_scales_with_noise(scene) -> None:
    fres = [
        fiducial_registration_report(scene, KinematicTracker(pos_noise_rms=0.1), seed)["fre_mm"]
        for seed in range(30)
    ]
    assert 0.05 < np.mean(fres) < 0.2


def test_measure_fiducials_applies_perturbation_and_noise(scene) -> None:
    points = fiducial_points(scene)
    assert points.shape == (8, 3)
    perturbation = RigidTransform.from_rotvec([0.0, 0.0, 0.01], [0.5, 0.0, 0.0])
    exact = measure_fiducials(points, KinematicTracker(calibration_perturbation=perturbation), 0)
    np.testing.assert_allclose(exact, perturbation.apply(points))
    noisy = measure_fiducials(np.zeros((20000, 3)), KinematicTracker(pos_noise_rms=0.3), 1)
    rms = np.sqrt(np.mean(np.sum(noisy ** 2, axis=1)))
    assert rms == pytest.approx(0.3, rel=0.02)
