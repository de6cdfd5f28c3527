"""
표면 거리 지표 모듈
양방향 Hausdorff 거리(HD, HD95)와 정점별 부호 표면 오차 지도를 계산합니다.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import trimesh
from sklearn.neighbors import KDTree

from ..transforms.rigid import RigidTransform
from ..utils.errors import InvalidInputError
from ..utils.sampling import surface_points

DEFAULT_SAMPLE_SPACING = 0.25


def _points(name: str, points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 3 or len(points) == 0:
        raise InvalidInputError(f"{name}: 비어 있지 않은 (N, 3) 점 집합이 필요합니다")
    return points


def directed_distances(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """xs 각 점에서 ys까지의 최단 거리"""
    tree = KDTree(ys)
    _, index = tree.query(xs, k=1)
    nearest = ys[index[:, 0]]
    # 인덱스가 가리키는 쌍에 대해 거리를 다시 계산
    return np.sqrt(((xs - nearest) ** 2).sum(axis=1))


def hausdorff(xs: np.ndarray, ys: np.ndarray) -> Tuple[float, float]:
    """
    양방향 Hausdorff 거리와 95 백분위 Hausdorff 거리

    Args:
        xs: (N, 3) 표면 점
        ys: (M, 3) 표면 점

    Returns:
        (hd_max, hd95) mm
    """
    xs = _points("xs", xs)
    ys = _points("ys", ys)
    d_xy = directed_distances(xs, ys)
    d_yx = directed_distances(ys, xs)
    hd_max = max(float(d_xy.max()), float(d_yx.max()))
    hd95 = max(float(np.percentile(d_xy, 95)), float(np.percentile(d_yx, 95)))
    return hd_max, hd95


def mesh_hausdorff(
    pred: trimesh.Trimesh,
    ref: trimesh.Trimesh,
    spacing: float = DEFAULT_SAMPLE_SPACING,
    seed: int = 0,
) -> Tuple[float, float]:
    """두 메시를 균일 재표본화한 뒤 hausdorff를 계산합니다."""
    return hausdorff(surface_points(pred, spacing, seed), surface_points(ref, spacing, seed))


@dataclass(eq=False)
class SurfaceErrorMap:
    """정렬된 예측 메시와 정점별 부호 거리 (바깥 +)"""

    mesh: trimesh.Trimesh
    distances: np.ndarray

    @property
    def mean(self) -> float:
        return float(self.distances.mean())

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.distances ** 2)))

    @property
    def max(self) -> float:
        """절대값 최대"""
        return float(np.abs(self.distances).max())

    def summary(self) -> Dict[str, Any]:
        return {"mean_mm": self.mean, "rms_mm": self.rms, "max_mm": self.max}

    def export_ply(self, path: Union[str, Path]) -> Path:
        """정점 속성 signed_distance_mm을 가진 이진 PLY로 저장합니다."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        mesh = self.mesh.copy()
        mesh.vertex_attributes["signed_distance_mm"] = self.distances.astype(np.float32)
        path.write_bytes(trimesh.exchange.ply.export_ply(mesh, encoding="binary", include_attributes=True))
        return path


def surface_error_map(
    pred: trimesh.Trimesh,
    ref: trimesh.Trimesh,
    registration: Optional[RigidTransform] = None,
    spacing: float = DEFAULT_SAMPLE_SPACING,
    seed: int = 0,
) -> SurfaceErrorMap:
    """
    정합된 예측 메시의 정점별 부호 최근접 거리를 기준 표면에 대해 계산합니다.

    기준 표면은 정점과 면적 균등 표본으로 표현되며, 부호는 최근접 표본의
    바깥 법선 방향으로 정합니다.

    Args:
        pred: 예측 메시
        ref: 기준 메시 (법선 바깥 방향)
        registration: pred에 적용할 정합 변환
        spacing: 기준 표면 표본 간격 (mm)
        seed: 표본화 시드

    Returns:
        SurfaceErrorMap
    """
    if len(ref.faces) == 0 or float(ref.area) <= 0:
        raise InvalidInputError("기준 메시가 퇴화되었습니다 (면 없음 또는 면적 0)")

    vertices = np.asarray(pred.vertices, dtype=float)
    if registration is not None:
        vertices = registration.apply(vertices)
    aligned = trimesh.Trimesh(vertices=vertices, faces=np.asarray(pred.faces), process=False)

    ref_vertices = np.asarray(ref.vertices, dtype=float)
    count = int(np.ceil(float(ref.area) / (spacing * spacing)))
    samples, face_index = trimesh.sample.sample_surface(ref, count, seed=seed)
    anchors = np.vstack([ref_vertices, np.asarray(samples, dtype=float)])
    normals = np.vstack([np.asarray(ref.vertex_normals), np.asarray(ref.face_normals)[face_index]])

    _, index = KDTree(anchors).query(vertices, k=1)
    index = index[:, 0]
    offset = vertices - anchors[index]
    magnitude = np.sqrt((offset ** 2).sum(axis=1))
    sign = np.where(np.einsum("ij,ij->i", offset, normals[index]) < 0, -1.0, 1.0)
    return SurfaceErrorMap(mesh=aligned, distances=sign * magnitude)
