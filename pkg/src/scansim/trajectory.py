"""
주사 궤적 모듈
선형 주사 계획(다중 스윕 포함)과 프레임 포즈 생성을 담당합니다.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.spatial.transform import Rotation

from .imaging import FrameSpec, base_probe_rotation
from ..phantom.scene import PhantomScene
from ..transforms.pose_stream import PoseStream
from ..transforms.rigid import RigidTransform
from ..utils.errors import InvalidInputError


@dataclass(frozen=True, eq=False)
class TrajectoryPlan:
    """
    선형 주사 계획

    axial_angle_deg는 영상 y(빔 축) 둘레, lateral_tilt_deg는 영상 x(측방 축) 둘레
    회전이며 두 회전 모두 pivot_mm(영상 좌표, 보통 탐촉자 접촉면 중앙)을 중심으로
    적용됩니다. sweep_offsets는 회전된 측방 축 방향의 스윕 간 오프셋(mm)입니다.
    """

    start: RigidTransform
    direction: np.ndarray
    length: float
    speed: float
    axial_angle_deg: float = 0.0
    lateral_tilt_deg: float = 0.0
    sweep_offsets: Tuple[float, ...] = (0.0,)
    sweep_gap_s: float = 1.0
    pivot_mm: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if not self.speed > 0:
            raise InvalidInputError(f"주사 속도는 양수여야 합니다: {self.speed}")
        if not self.length > 0:
            raise InvalidInputError(f"주사 길이는 양수여야 합니다: {self.length}")
        if self.sweep_gap_s < 0:
            raise InvalidInputError("스윕 간 시간 간격은 음수일 수 없습니다")
        direction = np.array(self.direction, dtype=float).reshape(3)
        norm = np.linalg.norm(direction)
        if norm == 0:
            raise InvalidInputError("주사 방향 벡터가 0입니다")
        offsets = tuple(float(o) for o in self.sweep_offsets)
        if not offsets:
            raise InvalidInputError("스윕 오프셋이 비어 있습니다")
        object.__setattr__(self, "direction", direction / norm)
        object.__setattr__(self, "sweep_offsets", offsets)
        object.__setattr__(self, "pivot_mm", np.array(self.pivot_mm, dtype=float).reshape(3))
        object.__setattr__(self, "length", float(self.length))
        object.__setattr__(self, "speed", float(self.speed))

    @property
    def multi_sweep(self) -> bool:
        return len(self.sweep_offsets) > 1

    def orientation(self) -> Rotation:
        """스윕 동안 일정한 탐촉자 방향 R_start·Ry(θ)·Rx(φ)"""
        local = Rotation.from_euler("yx", [self.axial_angle_deg, self.lateral_tilt_deg], degrees=True)
        return self.start.as_rotation() * local

    def offset_axis(self) -> np.ndarray:
        """스윕 오프셋 방향: 회전된 측방 축에서 주사 방향 성분을 뺀 단위 벡터"""
        lateral = self.orientation().apply([1.0, 0.0, 0.0])
        lateral = lateral - (lateral @ self.direction) * self.direction
        norm = np.linalg.norm(lateral)
        if norm < 1e-9:
            lateral = self.start.as_rotation().apply([1.0, 0.0, 0.0])
            lateral = lateral - (lateral @ self.direction) * self.direction
            norm = np.linalg.norm(lateral)
        return lateral / norm

    def to_dict(self) -> Dict[str, Any]:
        return {
            "start": self.start.to_dict(),
            "direction": self.direction.tolist(),
            "length_mm": self.length,
            "speed_mm_s": self.speed,
            "axial_angle_deg": self.axial_angle_deg,
            "lateral_tilt_deg": self.lateral_tilt_deg,
            "sweep_offsets_mm": list(self.sweep_offsets),
            "sweep_gap_s": self.sweep_gap_s,
            "pivot_mm": self.pivot_mm.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrajectoryPlan":
        return cls(
            start=RigidTransform.from_dict(data["start"]),
            direction=data["direction"],
            length=data["length_mm"],
            speed=data["speed_mm_s"],
            axial_angle_deg=data.get("axial_angle_deg", 0.0),
            lateral_tilt_deg=data.get("lateral_tilt_deg", 0.0),
            sweep_offsets=tuple(data.get("sweep_offsets_mm", (0.0,))),
            sweep_gap_s=data.get("sweep_gap_s", 1.0),
            pivot_mm=data.get("pivot_mm", (0.0, 0.0, 0.0)),
        )


def frames_per_sweep(plan: TrajectoryPlan, frame_rate: float) -> int:
    """한 스윕의 프레임 수 floor(length·rate/speed) + 1"""
    return int(np.floor(plan.length * frame_rate / plan.speed + 1e-9)) + 1


def plan_poses(plan: TrajectoryPlan, frame_rate: float) -> PoseStream:
    """
    계획에 따라 균일한 시간 간격의 포즈 스트림을 생성합니다.

    각 스윕은 일정한 방향으로 직선 이동하며, 스윕들은 sweep_gap_s 간격을 두고
    이어 붙입니다.

    Args:
        plan: 주사 계획
        frame_rate: 프레임률 (Hz)

    Returns:
        PoseStream
    """
    if not frame_rate > 0:
        raise InvalidInputError(f"프레임률은 양수여야 합니다: {frame_rate}")

    n = frames_per_sweep(plan, frame_rate)
    rotation = plan.orientation()
    quat = rotation.as_quat()
    pivot_world = plan.start.apply(plan.pivot_mm)
    base = pivot_world - rotation.apply(plan.pivot_mm)
    lateral = plan.offset_axis()
    travel = plan.speed * np.arange(n) / frame_rate

    timestamps, translations = [], []
    t0 = 0.0
    for offset in plan.sweep_offsets:
        timestamps.append(t0 + np.arange(n) / frame_rate)
        translations.append(base + np.outer(travel, plan.direction) + offset * lateral)
        t0 = timestamps[-1][-1] + plan.sweep_gap_s

    timestamps = np.concatenate(timestamps)
    translations = np.vstack(translations)
    logger.debug(
        f"포즈 계획: 스윕 {len(plan.sweep_offsets)}개 × {n} 프레임, "
        f"프레임 간격 {plan.speed / frame_rate:.3f} mm"
    )
    return PoseStream.from_arrays(timestamps, np.tile(quat, (len(timestamps), 1)), translations)


def coverage_plan(
    scene: PhantomScene,
    frame_spec: FrameSpec,
    speed: float,
    axial_angle_deg: float = 0.0,
    lateral_tilt_deg: float = 0.0,
    margin: float = 5.0,
    sweep_overlap: float = 0.2,
    multi_sweep_threshold_deg: float = 30.0,
    sweep_gap_s: float = 1.0
) -> TrajectoryPlan:
    """
    장면의 포함체 영역을 덮는 주사 계획을 만듭니다.

    축 방향 각도가 multi_sweep_threshold_deg 이하이면 세계 x축을 따라 한 번 주사하고,
    그보다 크면 회전된 평면 법선 방향으로 주사하면서 측방으로 겹치는(sweep_overlap)
    평행 스윕을 배치해 포함체 영역 전체를 덮습니다.

    Args:
        scene: 팬텀 장면
        frame_spec: 프레임 기하
        speed: 주사 속도 (mm/s)
        axial_angle_deg: 축 방향 회전 각도
        lateral_tilt_deg: 측방 기울기 각도
        margin: 포함체 영역 여유 (mm)
        sweep_overlap: 인접 스윕 시야 겹침 비율
        multi_sweep_threshold_deg: 다중 스윕 전환 각도
        sweep_gap_s: 스윕 간 시간 간격 (초)

    Returns:
        TrajectoryPlan
    """
    fov = frame_spec.fov_width
    pivot = np.array([fov / 2.0, 0.0, 0.0])
    lo, hi = scene.inclusion_bounds()
    lo = lo - margin
    hi = hi + margin
    top = float(scene.block_max[2])
    center = np.array([(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0, top])

    start_rotation = base_probe_rotation()
    probe = start_rotation * Rotation.from_euler(
        "yx", [axial_angle_deg, lateral_tilt_deg], degrees=True
    )
    depth_extent = frame_spec.depth * abs(np.sin(np.radians(lateral_tilt_deg)))

    corners = np.array([[x, y, top] for x in (lo[0], hi[0]) for y in (lo[1], hi[1])]) - center

    if abs(axial_angle_deg) <= multi_sweep_threshold_deg:
        direction = np.array([1.0, 0.0, 0.0])
        extent = fov * abs(np.sin(np.radians(axial_angle_deg))) / 2.0 + depth_extent
        offsets = (0.0,)
        lateral_mid = 0.0
    else:
        normal = probe.apply([0.0, 0.0, 1.0])
        normal[2] = 0.0
        direction = normal / np.linalg.norm(normal)
        if direction @ np.array([1.0, 1.0, 0.0]) < 0:
            direction = -direction
        lateral = probe.apply([1.0, 0.0, 0.0])
        lateral = lateral - (lateral @ direction) * direction
        lateral[2] = 0.0
        lateral /= np.linalg.norm(lateral)

        extent = depth_extent
        l_proj = corners @ lateral
        span = l_proj.max() - l_proj.min()
        step = fov * (1.0 - sweep_overlap)
        count = max(1, int(np.ceil(max(span - fov, 0.0) / step)) + 1)
        offsets = tuple((k - (count - 1) / 2.0) * step for k in range(count))
        lateral_mid = (l_proj.max() + l_proj.min()) / 2.0
        center = center + lateral_mid * lateral
        corners = corners - lateral_mid * lateral
        logger.info(f"다중 스윕 주사: 축 방향 {axial_angle_deg}°, 스윕 {count}개 (간격 {step:.2f} mm)")

    d_proj = corners @ direction
    start_pivot = center + (d_proj.min() - extent) * direction
    length = float(d_proj.max() - d_proj.min() + 2.0 * extent)
    start = RigidTransform.from_rotation(start_rotation, start_pivot - start_rotation.apply(pivot))

    return TrajectoryPlan(
        start=start,
        direction=direction,
        length=length,
        speed=speed,
        axial_angle_deg=axial_angle_deg,
        lateral_tilt_deg=lateral_tilt_deg,
        sweep_offsets=offsets,
        sweep_gap_s=sweep_gap_s,
        pivot_mm=pivot,
    )
