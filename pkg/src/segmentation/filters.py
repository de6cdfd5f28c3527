"""
영상 필터 모듈
중앙값 필터, Otsu 임계값, 구멍 채우기, 모폴로지 연산을 제공합니다.
"""
import cv2
import numpy as np
from scipy import ndimage

from ..utils.errors import DegenerateHistogramError, InvalidInputError


def _as_gray(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img)
    if img.ndim != 2 or img.shape[0] == 0 or img.shape[1] == 0:
        raise InvalidInputError(f"2D 영상이 필요합니다: {img.shape}")
    return np.ascontiguousarray(img, dtype=np.uint8)


def _check_kernel(k: int, name: str) -> int:
    k = int(k)
    if k < 1 or k % 2 == 0:
        raise InvalidInputError(f"{name}은(는) 1 이상의 홀수여야 합니다: {k}")
    return k


def median_filter(img: np.ndarray, k: int) -> np.ndarray:
    """
    k×k 중앙값 필터 (가장자리 복제)

    Args:
        img: 8비트 영상
        k: 홀수 커널 크기

    Returns:
        필터링된 8비트 영상
    """
    k = _check_kernel(k, "중앙값 커널")
    img = _as_gray(img)
    if k == 1:
        return img.copy()
    pad = k // 2
    padded = cv2.copyMakeBorder(img, pad, pad, pad, pad, cv2.BORDER_REPLICATE)
    return cv2.medianBlur(padded, k)[pad:-pad, pad:-pad].copy()


def otsu_threshold(img: np.ndarray, roi=None) -> int:
    """
    256-빈 히스토그램에서 클래스 간 분산을 최대화하는 임계값을 찾습니다.

    어두운 클래스는 {v < t}, t ∈ [1, 255]이며 동점이면 가장 낮은 t를 고릅니다.
    기준값 (N·S0 − n0·S)² / (n0·n1)은 정수로 정확히 비교합니다.

    Args:
        img: 8비트 영상
        roi: (x0, y0, x1, y1) 픽셀 사각형 (None이면 전체)

    Returns:
        임계값
    """
    img = _as_gray(img)
    if roi is not None:
        x0, y0, x1, y1 = (int(v) for v in roi)
        img = img[y0:y1, x0:x1]
        if img.size == 0:
            raise InvalidInputError(f"ROI가 비어 있습니다: {roi}")

    hist = np.bincount(img.ravel(), minlength=256).astype(np.int64)
    if np.count_nonzero(hist) < 2:
        raise DegenerateHistogramError("히스토그램에 값이 하나뿐입니다")

    counts = np.cumsum(hist).tolist()
    sums = np.cumsum(hist * np.arange(256, dtype=np.int64)).tolist()
    total_n, total_s = counts[-1], sums[-1]

    best_t, best_num, best_den = None, 0, 1
    for t in range(1, 256):
        n0 = counts[t - 1]
        n1 = total_n - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (total_n * sums[t - 1] - n0 * total_s) ** 2
        den = n0 * n1
        if best_t is None or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def class_means(img: np.ndarray, threshold: int):
    """임계값으로 나눈 (어두운 클래스 평균, 밝은 클래스 평균)"""
    img = np.asarray(img)
    dark = img[img < threshold]
    bright = img[img >= threshold]
    return float(dark.mean()), float(bright.mean())


def fill_holes(mask: np.ndarray) -> np.ndarray:
    """ROI 경계와 4-연결되지 않은 배경 영역(닫힌 구멍)을 채웁니다."""
    mask = np.asarray(mask, dtype=bool)
    labels, _ = ndimage.label(~mask)
    border = np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))
    outside = np.isin(labels, border[border > 0])
    return ~outside


def close_open(mask: np.ndarray, close_kernel: int = 5, open_kernel: int = 5) -> np.ndarray:
    """
    정사각 구조 요소로 닫힘 후 열림을 적용합니다.
    """
    close_kernel = _check_kernel(close_kernel, "닫힘 커널")
    open_kernel = _check_kernel(open_kernel, "열림 커널")
    m = np.asarray(mask, dtype=np.uint8)
    m = cv2.morphologyEx(m, cv2.MORPH_CLOSE, np.ones((close_kernel, close_kernel), np.uint8))
    m = cv2.morphologyEx(m, cv2.MORPH_OPEN, np.ones((open_kernel, open_kernel), np.uint8))
    return m.astype(bool)
