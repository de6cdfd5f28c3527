"""2D 분할 점수 모듈"""
import numpy as np

from ..utils.errors import InvalidInputError


def dsc_2d(pred: np.ndarray, gt: np.ndarray) -> float:
    """
    2D Dice 계수 2|X∩Y| / (|X|+|Y|), 두 마스크가 모두 비면 1.0

    Args:
        pred: 예측 마스크
        gt: 기준 마스크

    Returns:
        Dice 계수
    """
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise InvalidInputError(f"마스크 크기가 다릅니다: {pred.shape} vs {gt.shape}")
    total = int(pred.sum()) + int(gt.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(pred, gt).sum()) / total
