"""
형상 피팅 공통 모듈
피팅 결과 타입과 최소제곱 풀이(신뢰 영역 반사법 + Nelder-Mead 대체)를 제공합니다.
"""
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import approx_fprime, least_squares, minimize
from scipy.spatial.transform import Rotation

from ..phantom.shapes import Cylinder, Ellipsoid, ShapeSpec, Sphere, TriPrism
from ..utils.errors import DegenerateConfigurationError, InvalidInputError

MAX_ITERATIONS = 500
PARAMETER_TOL = 1e-8
FD_STEP = np.sqrt(np.finfo(float).eps)


@dataclass(frozen=True, eq=False)
class FitResult:
    """
    피팅 결과

    Attributes:
        shape: 피팅된 형상
        rms_residual: 점-표면 거리 RMS (mm)
        converged: 수렴 여부
        iterations: 반복 횟수
        method: 최종 해를 낸 최적화기
    """

    shape: ShapeSpec
    rms_residual: float
    converged: bool
    iterations: int
    method: str = "least_squares"

    def parameter_errors(self, truth: ShapeSpec) -> Dict[str, float]:
        """
        피팅값 − 참값 오차 (mm)

        Args:
            truth: 같은 종류의 참 형상

        Returns:
            항목별 오차 딕셔너리
        """
        if truth.kind != self.shape.kind:
            raise InvalidInputError(f"형상 종류가 다릅니다: {self.shape.kind} vs {truth.kind}")
        fitted = self.shape
        errors = {"center_mm": float(np.linalg.norm(fitted.centroid - truth.centroid))}
        if isinstance(fitted, Sphere):
            errors["radius_mm"] = fitted.radius - truth.radius
        elif isinstance(fitted, Ellipsoid):
            errors["minor_radius_mm"] = float(fitted.semi_axes.min() - truth.semi_axes.min())
            errors["major_radius_mm"] = float(fitted.semi_axes.max() - truth.semi_axes.max())
        elif isinstance(fitted, Cylinder):
            errors["radius_mm"] = fitted.radius - truth.radius
            errors["height_mm"] = fitted.height - truth.height
        elif isinstance(fitted, TriPrism):
            errors["edge_length_mm"] = fitted.edge_length - truth.edge_length
            errors["height_mm"] = fitted.height - truth.height
        return {key: float(value) for key, value in errors.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shape": self.shape.to_dict(),
            "rms_residual_mm": float(self.rms_residual),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "method": self.method,
        }


@dataclass(frozen=True)
class Solution:
    """
    최적화 내부 결과

    cost_history는 받아들여진 반복마다의 제곱합입니다.
    """

    x: np.ndarray
    cost: float
    converged: bool
    iterations: int
    method: str
    cost_history: Tuple[float, ...] = ()


def solve(residuals: Callable[[np.ndarray], np.ndarray], x0: np.ndarray) -> Solution:
    """
    잔차 벡터를 최소제곱으로 최소화합니다.

    least_squares(trf)가 실패하거나 비유한 해를 내면 같은 시작점에서
    Nelder-Mead로 제곱합을 최소화하고 더 작은 비용의 해를 씁니다.

    Args:
        residuals: 파라미터 → 잔차 벡터
        x0: 초기 파라미터

    Returns:
        Solution
    """
    x0 = np.asarray(x0, dtype=float)
    accepted: List[float] = []

    def cost(x):
        r = residuals(x)
        return float(r @ r)

    # trf는 받아들인 반복점에서만 야코비안을 구합니다
    def jacobian(x):
        accepted.append(cost(x))
        return np.atleast_2d(approx_fprime(x, residuals, FD_STEP * np.maximum(1.0, np.abs(x))))

    result = least_squares(
        residuals,
        x0,
        jac=jacobian,
        method="trf",
        xtol=PARAMETER_TOL,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=MAX_ITERATIONS,
    )
    iterations = int(result.njev if result.njev is not None else result.nfev)
    best = Solution(
        result.x, float(2.0 * result.cost), bool(result.success), iterations, "least_squares", tuple(accepted)
    )
    if result.success and np.all(np.isfinite(result.x)):
        return best

    logger.debug(f"least_squares 실패 (status={result.status}), Nelder-Mead로 대체합니다")
    start = result.x if np.all(np.isfinite(result.x)) else x0
    simplex_best: List[float] = []

    fallback = minimize(
        cost,
        start,
        method="Nelder-Mead",
        callback=lambda xk: simplex_best.append(cost(xk)),
        options={"maxiter": MAX_ITERATIONS * len(x0), "xatol": PARAMETER_TOL, "fatol": 1e-15},
    )
    if np.isfinite(fallback.fun) and fallback.fun < best.cost:
        return Solution(
            fallback.x, float(fallback.fun), bool(fallback.success), int(fallback.nit), "nelder_mead",
            tuple(simplex_best),
        )
    return best


def check_points(points: np.ndarray, min_count: int) -> np.ndarray:
    """(N, 3) 유한 점 집합과 최소 개수를 확인합니다."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3:
        raise InvalidInputError(f"(N, 3) 점 집합이 필요합니다: {points.shape}")
    if len(points) < min_count:
        raise InvalidInputError(f"점이 {min_count}개 이상 필요합니다: {len(points)}개")
    if not np.all(np.isfinite(points)):
        raise InvalidInputError("점에 유한하지 않은 값이 있습니다")
    return points


def principal_frame(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    무게중심과 공분산 주축

    Returns:
        (무게중심, 내림차순 고유값, 열이 대응 고유벡터인 오른손 좌표계)
    """
    centroid = points.mean(axis=0)
    cov = np.cov((points - centroid).T, bias=True)
    values, vectors = np.linalg.eigh(cov)
    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    if np.linalg.det(vectors) < 0:
        vectors[:, 2] = -vectors[:, 2]
    return centroid, values, vectors


def require_3d_spread(points: np.ndarray, what: str) -> None:
    """점들이 평면(또는 직선)에 놓이면 DegenerateConfigurationError"""
    singular = np.linalg.svd(points - points.mean(axis=0), compute_uv=False)
    if singular[2] <= 1e-9 * singular[0]:
        raise DegenerateConfigurationError(f"{what}: 점들이 한 평면에 놓여 있습니다")


def tilted_frame(frame: np.ndarray, tilt: np.ndarray) -> np.ndarray:
    """
    frame의 u, v 축 둘레 기울기 (tilt[0], tilt[1]) 라디안을 적용한 좌표계

    축 방향을 초기 좌표계 주변에서 매끄럽게 매개화합니다.
    """
    rotvec = frame[:, 0] * tilt[0] + frame[:, 1] * tilt[1]
    return Rotation.from_rotvec(rotvec).as_matrix() @ frame


def rms(values: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(values))))
