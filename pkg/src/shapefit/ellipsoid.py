"""
타원체 피팅
공분산 주축으로 초기화한 뒤 점-타원체 최근접 거리(foot point)를 최소화합니다.
"""
import numpy as np
from loguru import logger
from scipy.spatial.transform import Rotation

from .base import FitResult, check_points, principal_frame, require_3d_spread, rms, solve
from ..phantom.shapes import Ellipsoid, solve_ellipsoid_foot


def _unpack(x: np.ndarray, frame0: np.ndarray):
    center = x[:3]
    axes = np.abs(x[3:6]) + 1e-9
    rotation = Rotation.from_rotvec(x[6:9]).as_matrix() @ frame0
    return center, axes, rotation


def fit_ellipsoid(points: np.ndarray) -> FitResult:
    """
    중심, 세 반축(내림차순), 방향을 추정합니다.

    Args:
        points: (N, 3) 표면 점, N ≥ 30

    Returns:
        FitResult
    """
    points = check_points(points, 30)
    require_3d_spread(points, "타원체 피팅")
    centroid, eigenvalues, frame0 = principal_frame(points)
    # 구면 위 균일 점의 축별 분산은 r²/3
    axes0 = np.sqrt(3.0 * np.maximum(eigenvalues, 1e-12))

    def residuals(x):
        center, axes, rotation = _unpack(x, frame0)
        local = (points - center) @ rotation
        _, dist = solve_ellipsoid_foot(local, axes)
        outside = np.sum((local / axes) ** 2, axis=1) > 1.0
        return np.where(outside, dist, -dist)

    sol = solve(residuals, np.concatenate([centroid, axes0, np.zeros(3)]))
    center, axes, rotation = _unpack(sol.x, frame0)
    order = np.argsort(-axes, kind="stable")
    axes, rotation = axes[order], rotation[:, order]
    if np.linalg.det(rotation) < 0:
        rotation[:, 2] = -rotation[:, 2]

    shape = Ellipsoid(center, axes, Rotation.from_matrix(rotation).as_quat())
    residual = rms(shape.signed_distance(points))
    logger.debug(f"타원체 피팅: 반축={np.round(axes, 4).tolist()} mm, RMS={residual:.4f} mm")
    return FitResult(shape, residual, sol.converged, sol.iterations, sol.method)
