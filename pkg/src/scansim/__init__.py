"""추적 2D 초음파 주사 시뮬레이션 모듈"""
from .imaging import FrameSpec, render_frame, base_probe_rotation
from .trajectory import TrajectoryPlan, plan_poses, coverage_plan, frames_per_sweep
from .tracker import (
    TrackerModel,
    KinematicTracker,
    OpticalTracker,
    EMTracker,
    EMDistortion,
    TRACKER_TYPES,
    tracker_from_dict,
    corrupt_poses,
)
from .simulator import (
    TrackedFrame,
    ScanResult,
    simulate_scan,
    save_scan,
    load_scan,
    save_image,
    load_image,
)
from .calibration import (
    CalibrationSignals,
    simulate_temporal_calibration,
    calibrate_latency,
    fiducial_points,
    measure_fiducials,
    fiducial_registration_report,
    latency_for_compensation,
)

__all__ = [
    "FrameSpec",
    "render_frame",
    "base_probe_rotation",
    "TrajectoryPlan",
    "plan_poses",
    "coverage_plan",
    "frames_per_sweep",
    "TrackerModel",
    "KinematicTracker",
    "OpticalTracker",
    "EMTracker",
    "EMDistortion",
    "TRACKER_TYPES",
    "tracker_from_dict",
    "corrupt_poses",
    "TrackedFrame",
    "ScanResult",
    "simulate_scan",
    "save_scan",
    "load_scan",
    "save_image",
    "load_image",
    "CalibrationSignals",
    "simulate_temporal_calibration",
    "calibrate_latency",
    "fiducial_points",
    "measure_fiducials",
    "fiducial_registration_report",
    "latency_for_compensation",
]
