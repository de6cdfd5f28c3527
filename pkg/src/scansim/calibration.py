"""
보정 시뮬레이션 모듈
주기적 진동 운동을 이용한 시간 보정과 기준점(fiducial) 측정을 모사합니다.
"""
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
from loguru import logger

from .tracker import TrackerModel
from ..phantom.scene import PhantomScene
from ..transforms.registration import fiducial_register
from ..transforms.temporal import estimate_latency
from ..utils.errors import ConfigError


@dataclass(frozen=True, eq=False)
class CalibrationSignals:
    """영상 측 신호와 추적기 측 신호 (각자 균일 샘플링)"""

    image_signal: np.ndarray
    image_rate: float
    tracker_signal: np.ndarray
    tracker_rate: float
    true_latency: float


def simulate_temporal_calibration(
    latency: float,
    duration: float = 20.0,
    image_rate: float = 20.0,
    tracker_rate: float = 100.0,
    amplitude: float = 5.0,
    frequency: float = 0.5,
    noise: float = 0.05,
    seed: int = 0
) -> CalibrationSignals:
    """
    평평한 반사면 위에서 탐촉자를 상하로 진동시키는 시간 보정 실험을 모사합니다.

    영상 신호는 반사면 깊이 변화(= 탐촉자 높이 z(t))이고, 추적기 신호는
    latency만큼 늦게 기록된 z(t − latency)입니다. 두 신호 모두 측정 잡음을 가집니다.

    Args:
        latency: 실제 종단 간 지연 (초)
        duration: 기록 길이 (초)
        image_rate: 영상 프레임률 (Hz)
        tracker_rate: 추적기 샘플링 주파수 (Hz)
        amplitude: 진동 진폭 (mm)
        frequency: 진동 주파수 (Hz)
        noise: 측정 잡음 σ (mm)
        seed: 난수 시드

    Returns:
        CalibrationSignals
    """
    rng = np.random.default_rng(seed)
    t_img = np.arange(int(np.floor(duration * image_rate)) + 1) / image_rate
    t_trk = np.arange(int(np.floor(duration * tracker_rate)) + 1) / tracker_rate
    omega = 2.0 * np.pi * frequency

    image_signal = amplitude * np.sin(omega * t_img) + rng.normal(0.0, noise, t_img.shape)
    tracker_signal = amplitude * np.sin(omega * (t_trk - latency)) + rng.normal(0.0, noise, t_trk.shape)
    return CalibrationSignals(image_signal, image_rate, tracker_signal, tracker_rate, latency)


def calibrate_latency(
    signals: CalibrationSignals,
    search_window: float = 0.5,
    analysis_rate: float = 1000.0
) -> float:
    """
    두 신호를 공통 주파수로 선형 재표본화한 뒤 지연을 추정합니다.

    Returns:
        추정 지연 (초, 추적기가 늦으면 양수)
    """
    duration = min(
        (len(signals.image_signal) - 1) / signals.image_rate,
        (len(signals.tracker_signal) - 1) / signals.tracker_rate,
    )
    t = np.arange(int(np.floor(duration * analysis_rate)) + 1) / analysis_rate
    a = np.interp(t, np.arange(len(signals.image_signal)) / signals.image_rate, signals.image_signal)
    b = np.interp(t, np.arange(len(signals.tracker_signal)) / signals.tracker_rate, signals.tracker_signal)
    latency = estimate_latency(a, b, analysis_rate, search_window)
    logger.info(f"시간 보정: 추정 지연 {latency * 1000:.2f} ms (실제 {signals.true_latency * 1000:.2f} ms)")
    return latency


def fiducial_points(scene: PhantomScene, inset: float = 5.0) -> np.ndarray:
    """블록 모서리에서 inset만큼 안쪽에 놓인 기준점 8개 (mm)"""
    lo = scene.block_min + inset
    hi = scene.block_max - inset
    return np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])


def measure_fiducials(points: np.ndarray, model: TrackerModel, rng_seed: Any) -> np.ndarray:
    """
    추적 스타일러스로 기준점을 측정한 결과를 모사합니다.

    측정점 = calibration_perturbation 적용 + 축별 σ = pos_noise_rms/√3 잡음.
    """
    rng = np.random.default_rng(rng_seed)
    measured = model.calibration_perturbation.apply(np.asarray(points, dtype=float))
    if model.pos_noise_rms > 0:
        measured = measured + rng.normal(0.0, model.pos_noise_rms / np.sqrt(3.0), measured.shape)
    return measured


def fiducial_registration_report(
    scene: PhantomScene,
    model: TrackerModel,
    rng_seed: Any,
    inset: float = 5.0
) -> Dict[str, Any]:
    """
    기준점 측정 → 정합 → FRE를 요약합니다.

    Returns:
        {"fiducials": 개수, "fre_mm": FRE RMS, "transform": 정합 변환}
    """
    truth = fiducial_points(scene, inset)
    measured = measure_fiducials(truth, model, rng_seed)
    transform, fre = fiducial_register(measured, truth)
    return {"fiducials": int(len(truth)), "fre_mm": float(fre), "transform": transform.to_dict()}


def latency_for_compensation(
    mode: str,
    model: TrackerModel,
    rng_seed: int,
    search_window: float = 0.5
) -> float:
    """
    지연 보정 모드(none / known / calibrated)에 따른 보정값을 반환합니다.
    """
    if mode == "none":
        return 0.0
    if mode == "known":
        return float(model.latency)
    if mode == "calibrated":
        signals = simulate_temporal_calibration(model.latency, seed=rng_seed)
        return calibrate_latency(signals, search_window=search_window)
    raise ConfigError(f"알 수 없는 지연 보정 모드: {mode}")
