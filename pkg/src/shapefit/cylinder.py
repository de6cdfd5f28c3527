"""
원기둥 피팅
몸통(반지름 방향)과 뚜껑(축 방향) 점을 매 반복 최근접 요소로 재할당하며 최소화합니다.
"""
from typing import Optional

import numpy as np
from loguru import logger

from .base import FitResult, check_points, principal_frame, require_3d_spread, rms, solve, tilted_frame
from ..phantom.shapes import Cylinder
from ..utils.errors import DegenerateConfigurationError

MAX_ASSIGNMENT_ROUNDS = 20


def _axial_radial(points: np.ndarray, center: np.ndarray, axis: np.ndarray):
    rel = points - center
    z = rel @ axis
    radial = np.linalg.norm(rel - np.outer(z, axis), axis=1)
    return z, radial


def _fit_from_axis(points: np.ndarray, centroid: np.ndarray, frame0: np.ndarray) -> Optional[FitResult]:
    axis0 = frame0[:, 2]
    z, radial = _axial_radial(points, centroid, axis0)
    center0 = centroid + axis0 * (z.max() + z.min()) / 2.0
    x = np.concatenate([center0, np.zeros(2), [np.percentile(radial, 90), np.ptp(z)]])

    def split(params):
        axis = tilted_frame(frame0, params[3:5])[:, 2]
        zz, rr = _axial_radial(points, params[:3], axis)
        return zz, rr, np.abs(np.abs(zz) - params[6] / 2.0) < np.abs(rr - params[5])

    cap = split(x)[2]
    iterations = 0
    converged = False
    for _ in range(MAX_ASSIGNMENT_ROUNDS):
        fixed_cap = cap.copy()

        def residuals(params):
            axis = tilted_frame(frame0, params[3:5])[:, 2]
            zz, rr = _axial_radial(points, params[:3], axis)
            return np.where(fixed_cap, np.abs(zz) - params[6] / 2.0, rr - params[5])

        sol = solve(residuals, x)
        x = sol.x
        iterations += sol.iterations
        converged = sol.converged
        cap = split(x)[2]
        if np.array_equal(cap, fixed_cap):
            break

    axis = tilted_frame(frame0, x[3:5])[:, 2]
    zz, rr = _axial_radial(points, x[:3], axis)
    if not (np.any(cap & (zz > 0)) and np.any(cap & (zz < 0))):
        return None
    z_cap = zz[cap]
    height = float(z_cap.max() - z_cap.min())
    center = x[:3] + axis * (z_cap.max() + z_cap.min()) / 2.0
    shape = Cylinder(center, axis, abs(x[5]), height)
    return FitResult(shape, rms(shape.signed_distance(points)), converged, iterations, sol.method)


def fit_cylinder(points: np.ndarray) -> FitResult:
    """
    중심, 반지름, 높이, 축을 추정합니다.

    축은 공분산의 최대/최소 분산 방향에서 각각 출발해 잔차가 작은 쪽을 택합니다.

    Args:
        points: (N, 3) 표면 점 (양 뚜껑과 몸통 포함), N ≥ 30

    Returns:
        FitResult
    """
    points = check_points(points, 30)
    require_3d_spread(points, "원기둥 피팅")
    centroid, _, frame = principal_frame(points)

    best: Optional[FitResult] = None
    for column in (0, 2):
        frame0 = np.roll(frame, 2 - column, axis=1)
        candidate = _fit_from_axis(points, centroid, frame0)
        if candidate is not None and (best is None or candidate.rms_residual < best.rms_residual):
            best = candidate
    if best is None:
        raise DegenerateConfigurationError("원기둥 피팅: 양쪽 뚜껑에 할당된 점이 없습니다")
    logger.debug(
        f"원기둥 피팅: r={best.shape.radius:.4f}, h={best.shape.height:.4f} mm, RMS={best.rms_residual:.4f} mm"
    )
    return best
