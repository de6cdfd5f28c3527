"""
정합 모듈
대응점 기반 강체 정합(Kabsch)과 표면 ICP 정합을 제공합니다.
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import trimesh
from loguru import logger
from scipy.spatial.transform import Rotation
from sklearn.neighbors import NearestNeighbors

from .rigid import RigidTransform
from ..utils.errors import DegenerateConfigurationError, InvalidInputError
from ..utils.sampling import surface_points


@dataclass(frozen=True, eq=False)
class IcpResult:
    """ICP 정합 결과"""

    transform: RigidTransform
    rms: float
    iterations: int
    converged: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "transform": self.transform.to_dict(),
            "rms_mm": float(self.rms),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }


def _as_points(points, name: str) -> np.ndarray:
    p = np.asarray(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 3:
        p = p.reshape(-1, 3)
    if not np.all(np.isfinite(p)):
        raise InvalidInputError(f"{name} 좌표가 유한하지 않습니다")
    return p


def _is_collinear(centered: np.ndarray) -> bool:
    s = np.linalg.svd(centered, compute_uv=False)
    return s[0] == 0 or s[1] <= 1e-9 * s[0]


def fiducial_register(moving, fixed) -> Tuple[RigidTransform, float]:
    """
    대응점 집합 사이의 최소제곱 강체 변환을 구합니다 (moving → fixed).

    회전은 SVD 기반 정렬로 구하며 반사 없이 항상 det = +1입니다.

    Args:
        moving: (N, 3) 이동 점 집합 (mm)
        fixed: (N, 3) 고정 점 집합 (mm)

    Returns:
        (변환, FRE RMS [mm])
    """
    moving = _as_points(moving, "moving")
    fixed = _as_points(fixed, "fixed")
    if moving.shape != fixed.shape:
        raise InvalidInputError("대응점 개수가 일치하지 않습니다")
    if len(moving) < 3:
        raise DegenerateConfigurationError("정합에는 최소 3개의 대응점이 필요합니다")

    mu_m = moving.mean(axis=0)
    mu_f = fixed.mean(axis=0)
    cm = moving - mu_m
    cf = fixed - mu_f
    if _is_collinear(cm) or _is_collinear(cf):
        raise DegenerateConfigurationError("대응점이 한 직선 위에 있습니다")

    rotation, _ = Rotation.align_vectors(cf, cm)
    transform = RigidTransform.from_rotation(rotation, mu_f - rotation.apply(mu_m))

    residual = transform.apply(moving) - fixed
    fre = float(np.sqrt(np.mean(np.sum(residual ** 2, axis=1))))
    return transform, fre


def icp_register(
    source,
    target: Union[trimesh.Trimesh, np.ndarray],
    init: Optional[RigidTransform] = None,
    max_iterations: int = 200,
    tolerance: float = 1e-6,
    sample_spacing: float = 0.25,
    seed: int = 0
) -> IcpResult:
    """
    ICP로 source 점 집합을 target 표면에 정합합니다.

    매 반복마다 최근접점 대응을 찾고, 원래 source에서 대응점으로의 변환을
    fiducial_register로 다시 계산합니다. RMS 변화가 tolerance 미만이면 수렴입니다.
    메시 대상은 정점과 면적 균등 표본(sample_spacing 간격)을 함께 사용합니다.

    Args:
        source: (N, 3) 점 집합
        target: 삼각형 메시 또는 (M, 3) 점 집합
        init: 초기 변환 (None이면 항등)
        max_iterations: 최대 반복 수
        tolerance: RMS 변화 수렴 기준 (mm)
        sample_spacing: 메시 표면 표본 간격 (mm)
        seed: 표면 표본 시드

    Returns:
        IcpResult (최소 RMS 결과, 미수렴 시 converged=False)
    """
    src = _as_points(source, "source")
    if len(src) == 0:
        raise InvalidInputError("source 점 집합이 비어 있습니다")

    if isinstance(target, trimesh.Trimesh):
        if len(target.faces) == 0 or target.area <= 0:
            raise InvalidInputError("대상 메시가 퇴화되었습니다")
        target_points = surface_points(target, spacing=sample_spacing, seed=seed)
    else:
        target_points = _as_points(target, "target")
        if len(target_points) == 0:
            raise InvalidInputError("대상 점 집합이 비어 있습니다")

    index = NearestNeighbors(n_neighbors=1).fit(target_points)
    transform = init if init is not None else RigidTransform.identity()

    best = (transform, np.inf)
    previous_rms = None
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        distances, indices = index.kneighbors(transform.apply(src))
        rms = float(np.sqrt(np.mean(distances[:, 0] ** 2)))
        if rms < best[1]:
            best = (transform, rms)

        if previous_rms is not None and abs(previous_rms - rms) < tolerance:
            converged = True
            break
        previous_rms = rms
        transform, _ = fiducial_register(src, target_points[indices[:, 0]])

    if not converged:
        logger.warning(f"ICP가 {max_iterations}회 안에 수렴하지 않았습니다 (최소 RMS {best[1]:.4f} mm)")
    else:
        logger.debug(f"ICP 수렴: {iterations}회, RMS {best[1]:.4f} mm")

    return IcpResult(transform=best[0], rms=best[1], iterations=iterations, converged=converged)
