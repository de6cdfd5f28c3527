"""
시간 동기화 모듈
두 신호의 정규화 교차상관으로 지연 시간을 추정합니다.
"""
from typing import Optional

import numpy as np
from loguru import logger
from scipy.signal import correlate

from ..utils.errors import DegenerateSignalError, InvalidInputError


def _resample(signal: np.ndarray, rate: float, target_rate: float) -> np.ndarray:
    t_src = np.arange(len(signal)) / rate
    n = int(np.floor(t_src[-1] * target_rate)) + 1
    return np.interp(np.arange(n) / target_rate, t_src, signal)


def estimate_latency(
    a: np.ndarray,
    b: np.ndarray,
    sample_rate: float,
    search_window: float,
    b_sample_rate: Optional[float] = None
) -> float:
    """
    신호 b가 신호 a보다 얼마나 늦는지(초) 추정합니다.

    평균을 제거한 두 신호의 정규화 교차상관을 ±search_window 범위의 정수 지연에
    대해 계산하고, 최대값 주변 세 점에 포물선을 맞춰 샘플 이하 정밀도로 보정합니다.
    양수는 b가 a보다 늦음을 의미합니다.

    Args:
        a: 기준 신호 (균일 샘플링)
        b: 비교 신호 (균일 샘플링)
        sample_rate: a의 샘플링 주파수 (Hz)
        search_window: 탐색할 최대 지연 (초)
        b_sample_rate: b의 샘플링 주파수 (None이면 sample_rate와 동일)

    Returns:
        추정 지연 (초)
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if sample_rate <= 0 or search_window < 0:
        raise InvalidInputError("샘플링 주파수와 탐색 윈도우는 양수여야 합니다")
    if a.size < 3 or b.size < 3:
        raise InvalidInputError("신호 길이가 너무 짧습니다")
    if b_sample_rate is not None and b_sample_rate != sample_rate:
        b = _resample(b, b_sample_rate, sample_rate)

    n = min(a.size, b.size)
    a, b = a[:n], b[:n]
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise DegenerateSignalError("분산이 0인 신호로는 지연을 추정할 수 없습니다")

    duration = n / sample_rate
    if duration <= 2.0 * search_window:
        raise InvalidInputError(
            f"신호 길이({duration:.3f} s)는 탐색 윈도우의 2배({2 * search_window:.3f} s)보다 길어야 합니다"
        )

    a = a - a.mean()
    b = b - b.mean()
    max_lag = int(np.floor(search_window * sample_rate))

    # full[k] = Σ_m b[m + lag] · a[m], lag = k - (n - 1)
    full = correlate(b, a, mode="full", method="auto")
    lags = np.arange(-max_lag, max_lag + 1)
    numer = full[lags + n - 1]

    ca = np.concatenate([[0.0], np.cumsum(a * a)])
    cb = np.concatenate([[0.0], np.cumsum(b * b)])
    pos = lags >= 0
    energy_a = np.where(pos, ca[n - np.abs(lags)], ca[n] - ca[np.abs(lags)])
    energy_b = np.where(pos, cb[n] - cb[np.abs(lags)], cb[n - np.abs(lags)])
    denom = np.sqrt(energy_a * energy_b)
    ncc = np.divide(numer, denom, out=np.zeros_like(numer), where=denom > 0)

    k = int(np.argmax(ncc))
    offset = 0.0
    if 0 < k < len(ncc) - 1:
        y0, y1, y2 = ncc[k - 1], ncc[k], ncc[k + 1]
        curvature = y0 - 2.0 * y1 + y2
        if curvature < 0:
            offset = 0.5 * (y0 - y2) / curvature

    latency = (lags[k] + offset) / sample_rate
    logger.debug(f"지연 추정: {latency * 1000:.3f} ms (NCC 최대값 {ncc[k]:.4f})")
    return float(latency)
