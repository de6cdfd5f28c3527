"""
형상 기술자 모듈
부피, 표면적, 무게중심, 최대 Feret 지름, 진구도, 평탄도, 신장도, 주축을 계산합니다.
"""
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np
import trimesh
from loguru import logger
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist

from ..utils.errors import DegenerateComponentError


@dataclass(frozen=True, eq=False)
class DescriptorRecord:
    """형상 기술자 레코드 (길이 mm, 부피 mm³, 면적 mm², 고유값 mm²)"""

    volume: float
    surface_area: float
    centroid: np.ndarray
    feret_max: float
    roundness: float
    flatness: float
    elongation: float
    principal_axes: np.ndarray
    eigenvalues: np.ndarray
    roundness_clipped: bool = False

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        return {
            "volume_mm3": float(self.volume),
            "surface_area_mm2": float(self.surface_area),
            "centroid_mm": [float(v) for v in self.centroid],
            "feret_max_mm": float(self.feret_max),
            "roundness": float(self.roundness),
            "flatness": float(self.flatness),
            "elongation": float(self.elongation),
            "principal_axes": [[float(v) for v in axis] for axis in self.principal_axes],
            "eigenvalues_mm2": [float(v) for v in self.eigenvalues],
            "roundness_clipped": bool(self.roundness_clipped),
        }


def sphericity(volume: float, surface_area: float) -> float:
    """자르지 않은 (36π V²)^(1/3) / A"""
    return float((36.0 * np.pi * volume * volume) ** (1.0 / 3.0) / surface_area)


def roundness(volume: float, surface_area: float) -> float:
    """진구도 (36π V²)^(1/3) / A, 구에서 1, 1을 넘으면 1로 자릅니다."""
    value = sphericity(volume, surface_area)
    if value > 1.0:
        logger.debug(f"진구도 {value:.4f} > 1: 부피와 표면적이 맞지 않아 1로 자릅니다")
        return 1.0
    return value


def axis_ratios(eigenvalues: np.ndarray) -> tuple:
    """내림차순 고유값으로부터 (신장도 √(λ1/λ2), 평탄도 √(λ2/λ3))"""
    l1, l2, l3 = eigenvalues
    return float(np.sqrt(l1 / l2)), float(np.sqrt(l2 / l3))


def feret_diameter(points: np.ndarray) -> float:
    """
    점 집합의 최대 캘리퍼 지름을 볼록 껍질 꼭짓점 쌍 거리로 정확히 계산합니다.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(points) < 2:
        return 0.0
    try:
        candidates = points[ConvexHull(points).vertices]
    except QhullError:
        candidates = points
    return float(pdist(candidates).max())


def shape_descriptors(component: np.ndarray, grid, mesh: trimesh.Trimesh) -> DescriptorRecord:
    """
    복셀 성분과 추출 표면으로부터 형상 기술자를 계산합니다.

    Args:
        component: 성분 복셀 불리언 볼륨 (grid와 같은 크기)
        grid: origin, spacing 속성을 가진 격자 정보
        mesh: 성분의 표면 메시 (세계 좌표)

    Returns:
        DescriptorRecord
    """
    idx = np.argwhere(np.asarray(component, dtype=bool))
    if len(idx) < 4:
        raise DegenerateComponentError(f"복셀이 너무 적습니다: {len(idx)}")

    spacing = float(grid.spacing)
    positions = np.asarray(grid.origin, dtype=float) + idx * spacing
    centroid = positions.mean(axis=0)
    centered = positions - centroid
    cov = centered.T @ centered / len(positions)

    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]
    if eigvals[2] <= 1e-12 * max(eigvals[0], 1e-300):
        raise DegenerateComponentError("성분 복셀이 한 평면 위에 있습니다")

    area = float(mesh.area)
    if area <= 0:
        raise DegenerateComponentError("표면 메시 면적이 0입니다")

    volume = len(idx) * spacing ** 3
    elongation, flatness = axis_ratios(eigvals)
    return DescriptorRecord(
        volume=volume,
        surface_area=area,
        centroid=centroid,
        feret_max=feret_diameter(mesh.vertices),
        roundness=roundness(volume, area),
        flatness=flatness,
        elongation=elongation,
        principal_axes=eigvecs.T.copy(),
        eigenvalues=eigvals,
        roundness_clipped=sphericity(volume, area) > 1.0,
    )
