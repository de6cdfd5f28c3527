"""구 피팅"""
import numpy as np
from loguru import logger

from .base import FitResult, check_points, require_3d_spread, rms, solve
from ..phantom.shapes import Sphere


def algebraic_sphere(points: np.ndarray):
    """선형화한 대수 피팅 |p|² = 2p·c + k 의 (중심, 반지름)"""
    design = np.column_stack([2.0 * points, np.ones(len(points))])
    target = np.sum(points * points, axis=1)
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    center = solution[:3]
    radius = float(np.sqrt(max(solution[3] + center @ center, 1e-12)))
    return center, radius


def fit_sphere(points: np.ndarray) -> FitResult:
    """
    Σ(|p−c|−r)² 를 최소화하는 구를 찾습니다.

    Args:
        points: (N, 3) 표면 점, N ≥ 10

    Returns:
        FitResult
    """
    points = check_points(points, 10)
    require_3d_spread(points, "구 피팅")
    center, radius = algebraic_sphere(points)

    def residuals(x):
        return np.linalg.norm(points - x[:3], axis=1) - x[3]

    sol = solve(residuals, np.append(center, radius))
    shape = Sphere(sol.x[:3], abs(sol.x[3]))
    residual = rms(shape.signed_distance(points))
    logger.debug(f"구 피팅: r={shape.radius:.4f} mm, RMS={residual:.4f} mm, 반복 {sol.iterations}")
    return FitResult(shape, residual, sol.converged, sol.iterations, sol.method)
