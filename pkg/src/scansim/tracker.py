"""
추적기 오차 모델 모듈
로봇 기구학, 광학, 전자기(EM) 추적기의 보고 포즈를 모사합니다.
"""
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Tuple

import numpy as np
from loguru import logger

from ..transforms.pose_stream import PoseStream
from ..transforms.rigid import RigidTransform, compose
from ..utils.errors import ConfigError, InvalidInputError


@dataclass(frozen=True, eq=False)
class TrackerModel:
    """
    추적기 공통 오차 파라미터

    Attributes:
        pos_noise_rms: 3D 위치 잡음 RMS (mm), 축별 σ = rms/√3
        latency: 보고 타임스탬프 지연 (초)
        calibration_perturbation: 보고 포즈에 왼쪽에서 합성되는 보정 오차
        timestamp_jitter_s: 타임스탬프 가우시안 지터 σ (초)
    """

    pos_noise_rms: float = 0.0
    latency: float = 0.0
    calibration_perturbation: RigidTransform = field(default_factory=RigidTransform.identity)
    timestamp_jitter_s: float = 0.0
    kind: ClassVar[str] = "kinematic"

    def __post_init__(self):
        if self.pos_noise_rms < 0 or self.timestamp_jitter_s < 0:
            raise InvalidInputError("잡음 크기는 음수일 수 없습니다")
        if self.latency < 0:
            raise InvalidInputError(f"지연은 음수일 수 없습니다: {self.latency} s")

    def _common_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "pos_noise_rms_mm": self.pos_noise_rms,
            "latency_s": self.latency,
            "calibration_perturbation": self.calibration_perturbation.to_dict(),
            "timestamp_jitter_s": self.timestamp_jitter_s,
        }

    def to_dict(self) -> Dict[str, Any]:
        return self._common_dict()


@dataclass(frozen=True, eq=False)
class KinematicTracker(TrackerModel):
    """로봇 기구학 추적 (등방성 잡음만)"""

    kind: ClassVar[str] = "kinematic"


@dataclass(frozen=True, eq=False)
class OpticalTracker(TrackerModel):
    """광학 추적: 시야 가림 구간 [t0, t1) 동안 샘플 누락"""

    dropout_intervals: Tuple[Tuple[float, float], ...] = ()
    kind: ClassVar[str] = "optical"

    def __post_init__(self):
        super().__post_init__()
        intervals = tuple((float(a), float(b)) for a, b in self.dropout_intervals)
        if any(b < a for a, b in intervals):
            raise InvalidInputError(f"누락 구간이 잘못되었습니다: {intervals}")
        object.__setattr__(self, "dropout_intervals", intervals)

    def to_dict(self) -> Dict[str, Any]:
        data = self._common_dict()
        data["dropout_intervals_s"] = [list(iv) for iv in self.dropout_intervals]
        return data


@dataclass(frozen=True)
class EMDistortion:
    """EM 자기장 왜곡: amplitude·sin(2π·|p − origin|/spatial_period + phase)"""

    amplitude: float = 0.0
    spatial_period: float = 100.0
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0 or not self.spatial_period > 0:
            raise InvalidInputError("왜곡 진폭은 0 이상, 공간 주기는 양수여야 합니다")


@dataclass(frozen=True, eq=False)
class EMTracker(TrackerModel):
    """전자기 추적: 위치 의존 정현파 편향"""

    distortion: EMDistortion = field(default_factory=EMDistortion)
    field_origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    kind: ClassVar[str] = "em"

    def bias(self, positions: np.ndarray) -> np.ndarray:
        """위치별 편향 (모든 축에 동일하게 더해짐)"""
        r = np.linalg.norm(np.asarray(positions, dtype=float) - np.asarray(self.field_origin), axis=1)
        d = self.distortion
        return d.amplitude * np.sin(2.0 * np.pi * r / d.spatial_period + d.phase)

    def to_dict(self) -> Dict[str, Any]:
        data = self._common_dict()
        data["distortion"] = {
            "amplitude_mm": self.distortion.amplitude,
            "spatial_period_mm": self.distortion.spatial_period,
            "phase": self.distortion.phase,
        }
        data["field_origin_mm"] = list(self.field_origin)
        return data


TRACKER_TYPES = {cls.kind: cls for cls in (KinematicTracker, OpticalTracker, EMTracker)}


def tracker_from_dict(data: Dict[str, Any]) -> TrackerModel:
    """
    설정 딕셔너리로부터 추적기 모델을 만듭니다.

    Args:
        data: kind와 모델 파라미터를 담은 딕셔너리

    Returns:
        TrackerModel 하위 인스턴스
    """
    kind = data.get("kind", "kinematic")
    if kind not in TRACKER_TYPES:
        raise InvalidInputError(f"알 수 없는 추적기 종류: {kind}")

    latency = float(data.get("latency_s", 0.0))
    if latency < 0:
        raise ConfigError(f"latency_s는 0 이상이어야 합니다: {latency}")

    perturbation = data.get("calibration_perturbation")
    common = {
        "pos_noise_rms": float(data.get("pos_noise_rms_mm", 0.0)),
        "latency": latency,
        "calibration_perturbation": (
            RigidTransform.from_dict(perturbation) if perturbation else RigidTransform.identity()
        ),
        "timestamp_jitter_s": float(data.get("timestamp_jitter_s", 0.0)),
    }
    if kind == "optical":
        return OpticalTracker(
            dropout_intervals=tuple(tuple(iv) for iv in data.get("dropout_intervals_s", ())), **common
        )
    if kind == "em":
        dist = data.get("distortion", {})
        return EMTracker(
            distortion=EMDistortion(
                amplitude=float(dist.get("amplitude_mm", 0.0)),
                spatial_period=float(dist.get("spatial_period_mm", 100.0)),
                phase=float(dist.get("phase", 0.0)),
            ),
            field_origin=tuple(data.get("field_origin_mm", (0.0, 0.0, 0.0))),
            **common,
        )
    return KinematicTracker(**common)


def _is_identity(transform: RigidTransform) -> bool:
    return bool(np.all(transform.rotation == (0.0, 0.0, 0.0, 1.0)) and np.all(transform.translation == 0.0))


def corrupt_poses(truth: PoseStream, model: TrackerModel, rng_seed: Any) -> PoseStream:
    """
    실제 포즈 스트림에 추적기 오차를 입힌 보고 스트림을 만듭니다.

    보고 포즈 = calibration_perturbation ∘ 실제 포즈, 평행이동에 등방성 가우시안 잡음,
    EM은 위치 의존 편향 추가, 광학은 누락 구간 샘플 삭제, 모든 타임스탬프는 +latency.

    Args:
        truth: 실제 포즈 스트림
        model: 추적기 모델
        rng_seed: 난수 시드

    Returns:
        보고 포즈 스트림
    """
    rng = np.random.default_rng(rng_seed)
    timestamps = truth.timestamps
    true_positions = truth.translations

    if _is_identity(model.calibration_perturbation):
        quats = truth.quaternions
        translations = true_positions.copy()
    else:
        reported = [compose(model.calibration_perturbation, p) for p in truth.poses()]
        quats = np.stack([p.rotation for p in reported]) if reported else np.zeros((0, 4))
        translations = np.stack([p.translation for p in reported]) if reported else np.zeros((0, 3))

    if model.pos_noise_rms > 0:
        translations = translations + rng.normal(0.0, model.pos_noise_rms / np.sqrt(3.0), translations.shape)

    if isinstance(model, EMTracker) and model.distortion.amplitude > 0:
        translations = translations + model.bias(true_positions)[:, None]

    keep = np.ones(len(timestamps), dtype=bool)
    if isinstance(model, OpticalTracker):
        for t0, t1 in model.dropout_intervals:
            keep &= ~((timestamps >= t0) & (timestamps < t1))
        dropped = int((~keep).sum())
        if dropped:
            logger.debug(f"광학 추적 누락: {dropped}개 샘플 삭제")

    reported_times = timestamps.copy()
    if model.timestamp_jitter_s > 0:
        reported_times = reported_times + rng.normal(0.0, model.timestamp_jitter_s, len(reported_times))
        reported_times = np.maximum(reported_times, 0.0)
        for i in range(1, len(reported_times)):
            if reported_times[i] <= reported_times[i - 1]:
                reported_times[i] = reported_times[i - 1] + 1e-6
    if model.latency:
        reported_times = reported_times + model.latency

    return PoseStream.from_arrays(reported_times[keep], quats[keep], translations[keep])
