"""
주사 시뮬레이터 모듈
팬텀 장면을 계획된 궤적으로 주사해 추적 프레임 시퀀스를 만들고 저장/로드합니다.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from loguru import logger
from PIL import Image

from .imaging import FrameSpec, render_frame
from .tracker import TrackerModel, corrupt_poses, tracker_from_dict
from .trajectory import TrajectoryPlan, plan_poses
from ..phantom.scene import PhantomScene
from ..segmentation.maskio import load_mask, save_mask
from ..transforms.pose_stream import (
    PoseStream,
    bracketing_gaps,
    interpolate_poses,
    read_pose_csv,
    write_pose_csv,
)
from ..transforms.rigid import RigidTransform
from ..utils.errors import InvalidInputError

# 추적기 난수 스트림 번호 (프레임 인덱스와 겹치지 않음)
TRACKER_STREAM = 2 ** 31 - 1
DROPOUT_WARNING_FRACTION = 0.5


@dataclass(frozen=True, eq=False)
class TrackedFrame:
    """
    추적 프레임: 영상, 픽셀 간격, 타임스탬프, 보고/실제 포즈, 정답 마스크

    reported_pose가 None이면 해당 시각에 유효한 추적 포즈가 없습니다.
    """

    index: int
    image: np.ndarray
    pixel_spacing: float
    timestamp: float
    reported_pose: Optional[RigidTransform]
    true_pose: RigidTransform
    gt_mask: np.ndarray

    def __post_init__(self):
        if self.image.shape != self.gt_mask.shape:
            raise InvalidInputError("영상과 정답 마스크 크기가 다릅니다")

    @property
    def valid(self) -> bool:
        return self.reported_pose is not None


@dataclass(frozen=True, eq=False)
class ScanResult:
    """시뮬레이션 주사 결과"""

    frames: List[TrackedFrame]
    frame_spec: FrameSpec
    plan: TrajectoryPlan
    model: TrackerModel
    seed: int
    truth_stream: PoseStream
    reported_stream: PoseStream
    latency_compensation: float = 0.0
    dropout_warning: bool = False
    meta: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def valid_frames(self) -> List[TrackedFrame]:
        return [f for f in self.frames if f.valid]

    def get_stats(self) -> Dict[str, Any]:
        """주사 통계 정보 반환"""
        valid = len(self.valid_frames)
        return {
            "frames": len(self.frames),
            "valid_frames": valid,
            "invalid_fraction": 1.0 - valid / len(self.frames) if self.frames else 0.0,
            "sweeps": len(self.plan.sweep_offsets),
            "dropout_warning": self.dropout_warning,
        }


def simulate_scan(
    scene: PhantomScene,
    plan: TrajectoryPlan,
    spec: FrameSpec,
    model: TrackerModel,
    rng_seed: int,
    latency_compensation: float = 0.0,
    max_pose_gap_s: Optional[float] = None
) -> ScanResult:
    """
    팬텀을 주사해 추적 프레임 시퀀스를 생성합니다.

    프레임은 실제 포즈에서 렌더링하고, 보고 포즈는 corrupt_poses 결과 스트림을
    프레임 시각 + latency_compensation 에서 보간해 붙입니다. 스트림 범위 밖이거나
    max_pose_gap_s보다 긴 누락 구간 안의 프레임은 보고 포즈가 없습니다.

    Args:
        scene: 팬텀 장면
        plan: 주사 계획
        spec: 프레임 기하
        model: 추적기 모델
        rng_seed: 시드 (프레임별 난수는 (seed, 프레임 인덱스)에서 파생)
        latency_compensation: 포즈 조회 시각 보정 (초)
        max_pose_gap_s: 허용 최대 포즈 간격 (None이면 2.5 / frame_rate)

    Returns:
        ScanResult
    """
    seed = int(rng_seed)
    truth = plan_poses(plan, spec.frame_rate)
    reported = corrupt_poses(truth, model, [seed, TRACKER_STREAM])
    if max_pose_gap_s is None:
        max_pose_gap_s = 2.5 / spec.frame_rate

    times = truth.timestamps
    query = times + latency_compensation
    gaps = bracketing_gaps(reported, query)
    usable = gaps <= max_pose_gap_s
    reported_poses: List[Optional[RigidTransform]] = [None] * len(times)
    if np.any(usable):
        for k, pose in zip(np.flatnonzero(usable), interpolate_poses(reported, query[usable])):
            reported_poses[k] = pose

    frames = []
    for k, sample in enumerate(truth):
        image, gt_mask = render_frame(scene, sample.pose, spec, [seed, k])
        frames.append(TrackedFrame(
            index=k,
            image=image,
            pixel_spacing=spec.pixel_spacing,
            timestamp=sample.timestamp,
            reported_pose=reported_poses[k],
            true_pose=sample.pose,
            gt_mask=gt_mask,
        ))

    invalid_fraction = 1.0 - usable.mean() if len(usable) else 0.0
    dropout_warning = bool(invalid_fraction > DROPOUT_WARNING_FRACTION)
    if dropout_warning:
        logger.warning(f"추적 누락이 프레임의 {invalid_fraction * 100:.1f}%를 덮습니다")
    logger.info(
        f"주사 시뮬레이션 완료: 프레임 {len(frames)}개, 유효 {int(usable.sum())}개, "
        f"추적기 {model.kind}, 속도 {plan.speed} mm/s"
    )

    return ScanResult(
        frames=frames,
        frame_spec=spec,
        plan=plan,
        model=model,
        seed=seed,
        truth_stream=truth,
        reported_stream=reported,
        latency_compensation=latency_compensation,
        dropout_warning=dropout_warning,
    )


def save_image(image: np.ndarray, path: Union[str, Path]) -> Path:
    """8비트 영상을 이진 PGM(P5)으로 저장합니다."""
    path = Path(path)
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(path, format="PPM")
    return path


def load_image(path: Union[str, Path]) -> np.ndarray:
    with Image.open(path) as img:
        return np.array(img.convert("L"), dtype=np.uint8)


def _frame_name(index: int, suffix: str) -> str:
    return f"{index:05d}.{suffix}"


def save_scan(scan: ScanResult, directory: Union[str, Path]) -> Path:
    """
    주사 결과를 디렉토리로 저장합니다.

    frames/NNNNN.pgm, gt_masks/NNNNN.pbm, poses.csv(유효 프레임의 보고 포즈),
    truth_poses.csv, meta.json 으로 구성됩니다.

    Args:
        scan: 주사 결과
        directory: 출력 디렉토리

    Returns:
        출력 디렉토리 경로
    """
    directory = Path(directory)
    (directory / "frames").mkdir(parents=True, exist_ok=True)
    (directory / "gt_masks").mkdir(parents=True, exist_ok=True)

    for frame in scan.frames:
        save_image(frame.image, directory / "frames" / _frame_name(frame.index, "pgm"))
        save_mask(frame.gt_mask, directory / "gt_masks" / _frame_name(frame.index, "pbm"))

    valid = scan.valid_frames
    write_pose_csv(
        PoseStream.from_arrays(
            [f.timestamp for f in valid],
            np.array([f.reported_pose.rotation for f in valid]).reshape(-1, 4),
            np.array([f.reported_pose.translation for f in valid]).reshape(-1, 3),
        ),
        directory / "poses.csv",
    )
    write_pose_csv(scan.truth_stream, directory / "truth_poses.csv")

    meta = {
        "frame_spec": scan.frame_spec.to_dict(),
        "plan": scan.plan.to_dict(),
        "model": scan.model.to_dict(),
        "seed": scan.seed,
        "frame_count": len(scan.frames),
        "valid_frames": [f.index for f in valid],
        "latency_compensation_s": scan.latency_compensation,
        "dropout_warning": scan.dropout_warning,
        **scan.meta,
    }
    (directory / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
    logger.info(f"주사 저장: {directory} (프레임 {len(scan.frames)}개)")
    return directory


def load_scan(directory: Union[str, Path]) -> ScanResult:
    """save_scan으로 저장한 디렉토리를 다시 읽습니다 (보고 스트림은 유효 프레임 포즈)."""
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
    spec = FrameSpec(**meta["frame_spec"])
    truth = read_pose_csv(directory / "truth_poses.csv")
    reported = read_pose_csv(directory / "poses.csv")
    valid_indices: Sequence[int] = meta["valid_frames"]
    reported_by_index = dict(zip(valid_indices, reported.poses()))

    frames = []
    for k, sample in enumerate(truth):
        frames.append(TrackedFrame(
            index=k,
            image=load_image(directory / "frames" / _frame_name(k, "pgm")),
            pixel_spacing=spec.pixel_spacing,
            timestamp=sample.timestamp,
            reported_pose=reported_by_index.get(k),
            true_pose=sample.pose,
            gt_mask=load_mask(directory / "gt_masks" / _frame_name(k, "pbm")),
        ))

    return ScanResult(
        frames=frames,
        frame_spec=spec,
        plan=TrajectoryPlan.from_dict(meta["plan"]),
        model=tracker_from_dict(meta["model"]),
        seed=int(meta["seed"]),
        truth_stream=truth,
        reported_stream=reported,
        latency_compensation=float(meta.get("latency_compensation_s", 0.0)),
        dropout_warning=bool(meta.get("dropout_warning", False)),
    )
