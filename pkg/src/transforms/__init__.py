"""강체 변환, 포즈 스트림, 시간 동기화, 정합 모듈"""
from .rigid import RigidTransform, compose, invert, transform_distance, transforms_close
from .pose_stream import (
    TimedPose,
    PoseStream,
    interpolate_pose,
    interpolate_poses,
    bracketing_gaps,
    read_pose_csv,
    write_pose_csv,
    POSE_CSV_COLUMNS,
)
from .temporal import estimate_latency
from .registration import IcpResult, fiducial_register, icp_register

__all__ = [
    "RigidTransform",
    "compose",
    "invert",
    "transform_distance",
    "transforms_close",
    "TimedPose",
    "PoseStream",
    "interpolate_pose",
    "interpolate_poses",
    "bracketing_gaps",
    "read_pose_csv",
    "write_pose_csv",
    "POSE_CSV_COLUMNS",
    "estimate_latency",
    "IcpResult",
    "fiducial_register",
    "icp_register",
]
