"""
정삼각 프리즘 피팅
축에 수직인 평면으로 옆면 점을 투영해 정삼각형을 먼저 맞추고, 3D 부호 거리로 포즈와 단면을 다듬은 뒤 높이는 뚜껑 점의 축 방향 범위로 정합니다.
"""
from typing import Optional

import numpy as np
from loguru import logger

from .base import FitResult, check_points, principal_frame, require_3d_spread, rms, solve, tilted_frame
from ..phantom.shapes import TriPrism
from ..transforms.rigid import RigidTransform
from ..utils.errors import DegenerateConfigurationError

# 뚜껑 근처로 보고 옆면 초기 피팅에서 제외하는 축 방향 비율
CAP_MARGIN = 0.02
THETA_STARTS_DEG = (0.0, -20.0, 20.0)


def _rot_z(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _prism(params: np.ndarray, frame0: np.ndarray) -> TriPrism:
    rotation = tilted_frame(frame0, params[3:5]) @ _rot_z(params[5])
    pose = RigidTransform.from_matrix(rotation, params[:3])
    return TriPrism(abs(params[6]) + 1e-9, abs(params[7]) + 1e-9, pose)


def fit_triangle(xy: np.ndarray):
    """
    2D 점들을 정삼각형 경계에 맞춥니다.

    Returns:
        (중심 (2,), 회전 θ, 모서리 길이 L, 잔차 RMS)
    """
    if len(xy) < 3 or np.linalg.matrix_rank(xy - xy.mean(axis=0), tol=1e-9) < 2:
        raise DegenerateConfigurationError("프리즘 피팅: 단면 투영이 퇴화되었습니다")
    center0 = xy.mean(axis=0)
    rel = xy - center0
    far = int(np.argmax(np.einsum("ij,ij->i", rel, rel)))
    edge0 = np.sqrt(3.0) * float(np.linalg.norm(rel[far]))
    # 단면 꼭짓점 하나는 국소 90° 방향
    theta_far = float(np.arctan2(rel[far, 1], rel[far, 0])) - np.pi / 2.0

    def residuals(x):
        c, s = np.cos(x[2]), np.sin(x[2])
        local = (xy - x[:2]) @ np.array([[c, -s], [s, c]])
        return TriPrism(abs(x[3]) + 1e-9, 1.0).triangle_distance(local)

    best = None
    for offset in THETA_STARTS_DEG:
        sol = solve(residuals, np.array([center0[0], center0[1], theta_far + np.radians(offset), edge0]))
        if best is None or sol.cost < best.cost:
            best = sol
    x = best.x
    return x[:2], float(x[2]), abs(float(x[3])), float(np.sqrt(best.cost / len(xy)))


def _fit_from_axis(points: np.ndarray, centroid: np.ndarray, frame0: np.ndarray) -> Optional[FitResult]:
    rel = points - centroid
    local = rel @ frame0
    z = local[:, 2]
    z_lo, z_hi = float(z.min()), float(z.max())
    height0 = z_hi - z_lo
    side = (z > z_lo + CAP_MARGIN * height0) & (z < z_hi - CAP_MARGIN * height0)
    try:
        center2, theta, edge, _ = fit_triangle(local[side, :2])
    except DegenerateConfigurationError:
        return None

    origin = centroid + frame0[:, :2] @ center2 + frame0[:, 2] * (z_lo + z_hi) / 2.0
    x0 = np.concatenate([origin, np.zeros(2), [theta, edge, height0]])

    def residuals(params):
        return _prism(params, frame0).signed_distance(points)

    sol = solve(residuals, x0)
    refined = _prism(sol.x, frame0)

    # 높이는 뚜껑에 할당된 점의 축 방향 범위
    y = refined.to_local(points)
    cap = np.abs(np.abs(y[:, 2]) - refined.height / 2.0) < np.abs(refined.triangle_distance(y[:, :2]))
    if not (np.any(cap & (y[:, 2] > 0)) and np.any(cap & (y[:, 2] < 0))):
        return None
    z_cap = y[cap, 2]
    center = refined.centroid + refined.axis * (z_cap.max() + z_cap.min()) / 2.0
    pose = RigidTransform.from_matrix(refined.pose.matrix(), center)
    shape = TriPrism(refined.edge_length, float(z_cap.max() - z_cap.min()), pose)
    return FitResult(shape, rms(shape.signed_distance(points)), sol.converged, sol.iterations, sol.method)


def fit_triprism(points: np.ndarray) -> FitResult:
    """
    모서리 길이 L, 높이 H, 포즈를 추정합니다.

    세 공분산 주축을 차례로 프리즘 축 후보로 두고 잔차가 가장 작은 해를 택합니다.

    Args:
        points: (N, 3) 표면 점 (직사각형 옆면 2개 이상 포함), N ≥ 50

    Returns:
        FitResult
    """
    points = check_points(points, 50)
    require_3d_spread(points, "프리즘 피팅")
    centroid, _, frame = principal_frame(points)

    best: Optional[FitResult] = None
    for column in (0, 1, 2):
        frame0 = np.roll(frame, 2 - column, axis=1)
        candidate = _fit_from_axis(points, centroid, frame0)
        if candidate is not None and (best is None or candidate.rms_residual < best.rms_residual):
            best = candidate
    if best is None:
        raise DegenerateConfigurationError("프리즘 피팅: 어떤 축 후보로도 단면을 추정할 수 없습니다")
    logger.debug(
        f"프리즘 피팅: L={best.shape.edge_length:.4f}, H={best.shape.height:.4f} mm, RMS={best.rms_residual:.4f} mm"
    )
    return best
