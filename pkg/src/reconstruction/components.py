"""
연결 성분 및 표면 추출 모듈
임계값 처리 후 26-연결 성분을 크기 내림차순으로 라벨링하고 마칭 큐브로 표면을 추출합니다.
"""
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import numpy as np
import trimesh
from loguru import logger
from scipy import ndimage
from skimage import measure

from .grid import GridSpec, VoxelGrid
from ..utils.errors import InvalidInputError

CONNECTIVITY_26 = np.ones((3, 3, 3), dtype=bool)
DEFAULT_ISO = 128
DEFAULT_MIN_VOXELS = 100


@dataclass(eq=False)
class LabeledComponents:
    """
    라벨 볼륨 (0 = 배경, 1..n = 크기 내림차순)

    Attributes:
        labels: int32 라벨 볼륨
        counts: 라벨별 복셀 수 (counts[i]는 라벨 i+1)
        spec: 원 격자 기하
    """

    labels: np.ndarray
    counts: Tuple[int, ...]
    spec: GridSpec

    @property
    def num_components(self) -> int:
        return len(self.counts)

    def component(self, label: int) -> np.ndarray:
        """라벨의 불리언 볼륨"""
        if not 1 <= label <= self.num_components:
            raise InvalidInputError(f"라벨 범위 밖: {label}")
        return self.labels == label

    def centroid(self, label: int) -> np.ndarray:
        """라벨의 복셀 중심 평균 (mm)"""
        indices = np.argwhere(self.labels == label)
        return self.spec.index_to_world(indices.mean(axis=0))

    def centroids(self) -> List[np.ndarray]:
        return [self.centroid(k) for k in range(1, self.num_components + 1)]

    def to_dict(self) -> Dict[str, Any]:
        return {"num_components": self.num_components, "voxel_counts": list(self.counts)}


def threshold_and_label(
    grid: VoxelGrid,
    iso: int = DEFAULT_ISO,
    min_voxels: int = DEFAULT_MIN_VOXELS,
    link_radius: int = 0,
) -> LabeledComponents:
    """
    iso 이상 복셀의 26-연결 성분을 라벨링합니다.

    link_radius > 0이면 전경을 그만큼 팽창시켜 성분을 묶은 뒤 원래 전경과
    교집합을 취하므로 복셀이 추가되지는 않습니다.

    Args:
        grid: 복셀 격자
        iso: 전경 임계값 (이상)
        min_voxels: 최소 성분 크기 (미만은 버림)
        link_radius: 그룹화 허용 반경 (복셀)

    Returns:
        LabeledComponents
    """
    foreground = grid.values >= iso
    if link_radius > 0:
        linked = ndimage.binary_dilation(foreground, structure=CONNECTIVITY_26, iterations=int(link_radius))
        raw, count = ndimage.label(linked, structure=CONNECTIVITY_26)
        raw[~foreground] = 0
    else:
        raw, count = ndimage.label(foreground, structure=CONNECTIVITY_26)

    sizes = np.bincount(raw.ravel(), minlength=count + 1)
    sizes[0] = 0
    keep = [k for k in range(1, count + 1) if sizes[k] >= max(int(min_voxels), 1)]
    # 크기 내림차순, 같으면 원 라벨 순
    keep.sort(key=lambda k: (-sizes[k], k))

    lookup = np.zeros(count + 1, dtype=np.int32)
    for new_label, old_label in enumerate(keep, start=1):
        lookup[old_label] = new_label
    labels = lookup[raw]
    counts = tuple(int(sizes[k]) for k in keep)

    dropped = count - len(keep)
    logger.info(f"연결 성분 {len(keep)}개 (최소 크기 미달 {dropped}개 제외)")
    return LabeledComponents(labels=labels, counts=counts, spec=grid.spec)


def extract_surface(
    component: np.ndarray,
    spec: GridSpec,
    smoothing_sigma: float = 0.0,
    level: float = 0.5,
) -> trimesh.Trimesh:
    """
    점유 0.5 등위면을 마칭 큐브로 추출합니다.

    Args:
        component: 불리언 성분 볼륨 (spec.dims 크기)
        spec: 격자 기하
        smoothing_sigma: 추출 전 가우시안 평활 (복셀), 0이면 생략
        level: 등위면 값

    Returns:
        월드 mm 좌표의 닫힌 삼각형 메시 (법선 바깥 방향)
    """
    component = np.asarray(component, dtype=bool)
    if component.shape != spec.dims:
        raise InvalidInputError(f"성분 크기 {component.shape}가 격자 {spec.dims}와 다릅니다")
    if not component.any():
        raise InvalidInputError("빈 성분에서는 표면을 추출할 수 없습니다")

    # 경계를 닫기 위해 한 복셀씩 0으로 둘러쌈
    volume = np.pad(component.astype(np.float32), 1)
    if smoothing_sigma > 0:
        volume = ndimage.gaussian_filter(volume, sigma=float(smoothing_sigma))

    s = spec.spacing
    vertices, faces, _, _ = measure.marching_cubes(volume, level=level, spacing=(s, s, s), allow_degenerate=False)
    vertices = vertices + (spec.origin - s)

    mesh = trimesh.Trimesh(vertices=vertices, faces=faces, process=True)
    if mesh.volume < 0:
        mesh.invert()
    if not mesh.is_watertight:
        logger.warning("추출된 표면이 닫혀 있지 않습니다")
    return mesh
