"""
포즈 스트림 모듈
타임스탬프가 붙은 포즈 시퀀스, 보간(slerp + lerp), CSV 입출력을 제공합니다.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.spatial.transform import Rotation, Slerp

from .rigid import RigidTransform
from ..utils.errors import InvalidInputError, OutOfRangeError

POSE_CSV_COLUMNS = ["timestamp_s", "qx", "qy", "qz", "qw", "tx_mm", "ty_mm", "tz_mm"]


@dataclass(frozen=True, eq=False)
class TimedPose:
    """타임스탬프(초)가 붙은 포즈"""

    timestamp: float
    pose: RigidTransform

    def __post_init__(self):
        t = float(self.timestamp)
        if not np.isfinite(t) or t < 0:
            raise InvalidInputError(f"타임스탬프가 유효하지 않습니다: {self.timestamp}")
        object.__setattr__(self, "timestamp", t)


@dataclass(frozen=True, eq=False)
class PoseStream:
    """타임스탬프가 엄격히 증가하는 포즈 시퀀스"""

    samples: Tuple[TimedPose, ...] = ()

    def __post_init__(self):
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        if len(samples) > 1:
            ts = np.array([s.timestamp for s in samples])
            if np.any(np.diff(ts) <= 0):
                raise InvalidInputError("포즈 스트림 타임스탬프는 엄격히 증가해야 합니다")

    @classmethod
    def from_arrays(
        cls,
        timestamps: Sequence[float],
        quaternions: np.ndarray,
        translations: np.ndarray
    ) -> "PoseStream":
        """
        배열로부터 스트림을 생성합니다.

        Args:
            timestamps: (N,) 초
            quaternions: (N, 4) x, y, z, w
            translations: (N, 3) mm
        """
        quaternions = np.asarray(quaternions, dtype=float).reshape(-1, 4)
        translations = np.asarray(translations, dtype=float).reshape(-1, 3)
        timestamps = np.asarray(timestamps, dtype=float).reshape(-1)
        if not (len(timestamps) == len(quaternions) == len(translations)):
            raise InvalidInputError("타임스탬프/회전/평행이동 길이가 일치하지 않습니다")
        return cls(tuple(
            TimedPose(t, RigidTransform(q, p))
            for t, q, p in zip(timestamps, quaternions, translations)
        ))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[TimedPose]:
        return iter(self.samples)

    def __getitem__(self, index: int) -> TimedPose:
        return self.samples[index]

    @property
    def timestamps(self) -> np.ndarray:
        return np.array([s.timestamp for s in self.samples], dtype=float)

    @property
    def quaternions(self) -> np.ndarray:
        if not self.samples:
            return np.zeros((0, 4))
        return np.stack([s.pose.rotation for s in self.samples])

    @property
    def translations(self) -> np.ndarray:
        if not self.samples:
            return np.zeros((0, 3))
        return np.stack([s.pose.translation for s in self.samples])

    def poses(self) -> List[RigidTransform]:
        return [s.pose for s in self.samples]

    def shifted(self, offset_s: float) -> "PoseStream":
        """모든 타임스탬프를 offset_s만큼 이동한 스트림"""
        return PoseStream(tuple(TimedPose(s.timestamp + offset_s, s.pose) for s in self.samples))


def _check_range(stream: PoseStream, times: np.ndarray) -> np.ndarray:
    if len(stream) == 0:
        raise InvalidInputError("빈 포즈 스트림은 보간할 수 없습니다")
    ts = stream.timestamps
    if np.any(~np.isfinite(times)) or np.any(times < ts[0]) or np.any(times > ts[-1]):
        raise OutOfRangeError(
            f"보간 시각이 스트림 범위 [{ts[0]:.6f}, {ts[-1]:.6f}] s 밖에 있습니다"
        )
    return ts


def interpolate_pose(stream: PoseStream, t: float) -> RigidTransform:
    """
    시각 t의 포즈를 보간합니다.

    평행이동은 선형 보간, 회전은 인접 두 샘플 사이의 구면 선형 보간(slerp)을
    사용하며, 샘플 시각에서는 해당 샘플을 그대로 반환합니다.

    Args:
        stream: 포즈 스트림
        t: 조회 시각 (초)

    Returns:
        보간된 포즈
    """
    t = float(t)
    ts = _check_range(stream, np.array([t]))

    i = int(np.searchsorted(ts, t, side="right")) - 1
    if ts[i] == t:
        return stream[i].pose

    a, b = stream[i], stream[i + 1]
    alpha = (t - a.timestamp) / (b.timestamp - a.timestamp)
    slerp = Slerp([0.0, 1.0], Rotation.from_quat(np.stack([a.pose.rotation, b.pose.rotation])))
    rotation = slerp([alpha])[0]
    translation = (1.0 - alpha) * a.pose.translation + alpha * b.pose.translation
    return RigidTransform.from_rotation(rotation, translation)


def interpolate_poses(stream: PoseStream, times: Sequence[float]) -> List[RigidTransform]:
    """
    여러 시각에 대한 벡터화된 interpolate_pose.

    Args:
        stream: 포즈 스트림
        times: 조회 시각 배열 (초)

    Returns:
        시각별 포즈 리스트
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    if times.size == 0:
        return []
    ts = _check_range(stream, times)
    if len(stream) == 1:
        return [stream[0].pose for _ in times]

    slerp = Slerp(ts, Rotation.from_quat(stream.quaternions))
    rotations = slerp(times).as_quat()
    translations = np.stack(
        [np.interp(times, ts, stream.translations[:, k]) for k in range(3)], axis=1
    )

    exact = np.searchsorted(ts, times, side="left")
    result = []
    for j, t in enumerate(times):
        k = exact[j]
        if k < len(ts) and ts[k] == t:
            result.append(stream[k].pose)
        else:
            result.append(RigidTransform(rotations[j], translations[j]))
    return result


def bracketing_gaps(stream: PoseStream, times: Sequence[float]) -> np.ndarray:
    """
    각 시각을 둘러싼 두 샘플 사이의 시간 간격을 반환합니다.

    샘플 시각과 정확히 일치하면 0, 스트림 범위 밖이면 inf입니다.
    """
    times = np.asarray(times, dtype=float).reshape(-1)
    ts = stream.timestamps
    gaps = np.full(times.shape, np.inf)
    if len(ts) == 0:
        return gaps

    inside = (times >= ts[0]) & (times <= ts[-1])
    idx = np.clip(np.searchsorted(ts, times, side="right") - 1, 0, len(ts) - 1)
    on_sample = inside & (ts[idx] == times)
    gaps[on_sample] = 0.0
    between = inside & ~on_sample
    gaps[between] = ts[idx[between] + 1] - ts[idx[between]]
    return gaps


def write_pose_csv(stream: PoseStream, path: Union[str, Path]) -> Path:
    """
    포즈 스트림을 CSV로 저장합니다 (헤더 포함, 샘플당 한 행).

    Args:
        stream: 포즈 스트림
        path: 출력 경로

    Returns:
        저장된 경로
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.column_stack([stream.timestamps, stream.quaternions, stream.translations]) \
        if len(stream) else np.zeros((0, len(POSE_CSV_COLUMNS)))
    pd.DataFrame(data, columns=POSE_CSV_COLUMNS).to_csv(path, index=False)
    return path


def read_pose_csv(path: Union[str, Path]) -> PoseStream:
    """CSV 파일에서 포즈 스트림을 읽습니다."""
    df = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in POSE_CSV_COLUMNS if c not in df.columns]
    if missing:
        raise InvalidInputError(f"포즈 CSV 열이 누락되었습니다: {missing}")
    return PoseStream.from_arrays(
        df["timestamp_s"].to_numpy(),
        df[["qx", "qy", "qz", "qw"]].to_numpy(),
        df[["tx_mm", "ty_mm", "tz_mm"]].to_numpy(),
    )
