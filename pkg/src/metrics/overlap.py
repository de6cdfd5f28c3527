"""
체적 겹침 지표 모듈
3D Dice 계수와 해상도 한계 Dice/부피 오차 상한을 계산합니다.
"""
import numpy as np

from ..utils.errors import InvalidInputError


def dsc_3d(a: np.ndarray, b: np.ndarray) -> float:
    """
    복셀 집합 Dice 계수 2|A∩B| / (|A|+|B|), 둘 다 비면 1.0

    Args:
        a: 불리언 볼륨
        b: 같은 격자의 불리언 볼륨

    Returns:
        Dice 계수
    """
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise InvalidInputError(f"격자 기하가 다릅니다: {a.shape} vs {b.shape}")
    total = int(np.count_nonzero(a)) + int(np.count_nonzero(b))
    if total == 0:
        return 1.0
    return 2.0 * int(np.count_nonzero(a & b)) / total


def _check_radius(r: float, r_err: float) -> None:
    if r <= 0 or r + r_err <= 0:
        raise InvalidInputError(f"반지름이 양수가 아닙니다: r={r}, r+r_err={r + r_err}")


def resolution_limited_dsc(r: float, r_err: float) -> float:
    """
    반지름이 r_err만큼 과대 추정된 구의 최대 기대 Dice: 2r³ / (r³ + (r+r_err)³)
    """
    _check_radius(r, r_err)
    r3 = r ** 3
    return 2.0 * r3 / (r3 + (r + r_err) ** 3)


def resolution_limited_volume_error(r: float, r_err: float) -> float:
    """같은 조건의 상대 부피 오차 ((r+r_err)³ − r³) / r³"""
    _check_radius(r, r_err)
    return ((r + r_err) ** 3 - r ** 3) / r ** 3
