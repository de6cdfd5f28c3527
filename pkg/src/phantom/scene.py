"""
팬텀 장면 모듈
배경 블록, 포함체 목록, 스펙클/포함체 밝기 파라미터와 장면 질의를 제공합니다.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from loguru import logger
from scipy.spatial.transform import Rotation

from .mesh import ground_truth_mesh
from .shapes import Cylinder, Ellipsoid, ShapeSpec, Sphere, TriPrism, shape_from_dict
from ..transforms.rigid import RigidTransform
from ..utils.errors import InvalidInputError

# 기본 장면 치수 (mm)
DEFAULT_BLOCK = ((0.0, 0.0, 0.0), (180.0, 80.0, 60.0))
DEFAULT_DIMENSIONS = {
    "sphere_radius": 11.57,
    "ellipsoid_semi_axes": (24.65, 12.33, 12.33),
    "cylinder_radius": 11.96,
    "cylinder_height": 42.57,
    "prism_edge": 23.51,
    "prism_height": 36.98,
}


@dataclass(frozen=True)
class SpeckleParams:
    """배경 스펙클: mean·exp(N(0, σ²))"""

    mean: float = 150.0
    sigma: float = 0.35


@dataclass(frozen=True)
class InclusionIntensity:
    """무에코 포함체 밝기: mean + N(0, σ²)"""

    mean: float = 20.0
    sigma: float = 8.0


@dataclass(frozen=True, eq=False)
class Inclusion:
    label: str
    shape: ShapeSpec


@dataclass(frozen=True, eq=False)
class PhantomScene:
    """
    QA 팬텀 장면 (불변)

    포함체는 블록 안에 완전히 들어가야 하며 서로 겹치지 않아야 합니다.
    """

    inclusions: Tuple[Inclusion, ...]
    block_min: np.ndarray
    block_max: np.ndarray
    background_speckle: SpeckleParams = field(default_factory=SpeckleParams)
    inclusion_intensity: InclusionIntensity = field(default_factory=InclusionIntensity)

    def __post_init__(self):
        object.__setattr__(self, "inclusions", tuple(self.inclusions))
        block_min = np.array(self.block_min, dtype=float).reshape(3)
        block_max = np.array(self.block_max, dtype=float).reshape(3)
        if np.any(block_max <= block_min):
            raise InvalidInputError("블록 범위가 잘못되었습니다")
        object.__setattr__(self, "block_min", block_min)
        object.__setattr__(self, "block_max", block_max)

        labels = [inc.label for inc in self.inclusions]
        if len(set(labels)) != len(labels):
            raise InvalidInputError(f"포함체 라벨이 중복되었습니다: {labels}")
        self._validate_layout()

    def _validate_layout(self):
        for inc in self.inclusions:
            lo, hi = inc.shape.bounds()
            if np.any(lo < self.block_min) or np.any(hi > self.block_max):
                raise InvalidInputError(f"포함체 '{inc.label}'이(가) 블록 밖으로 나갑니다")

        for i, a in enumerate(self.inclusions):
            a_lo, a_hi = a.shape.bounds()
            for b in self.inclusions[i + 1:]:
                b_lo, b_hi = b.shape.bounds()
                if np.any(a_hi < b_lo) or np.any(b_hi < a_lo):
                    continue
                # 경계 상자가 겹치면 거친 메시 정점으로 실제 간격을 확인
                gap_ab = b.shape.signed_distance(ground_truth_mesh(a.shape, 1.0).vertices).min()
                gap_ba = a.shape.signed_distance(ground_truth_mesh(b.shape, 1.0).vertices).min()
                if min(gap_ab, gap_ba) <= 0:
                    raise InvalidInputError(f"포함체 '{a.label}'와 '{b.label}'이(가) 겹칩니다")

    @property
    def labels(self) -> List[str]:
        return [inc.label for inc in self.inclusions]

    @property
    def shapes(self) -> List[ShapeSpec]:
        return [inc.shape for inc in self.inclusions]

    def inclusion(self, label: str) -> Inclusion:
        for inc in self.inclusions:
            if inc.label == label:
                return inc
        raise InvalidInputError(f"포함체 라벨을 찾을 수 없습니다: {label}")

    def inclusion_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """모든 포함체를 감싸는 경계 상자"""
        bounds = [inc.shape.bounds() for inc in self.inclusions]
        return np.min([b[0] for b in bounds], axis=0), np.max([b[1] for b in bounds], axis=0)

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        return {
            "block_bounds_mm": [self.block_min.tolist(), self.block_max.tolist()],
            "background_speckle": {"mean": self.background_speckle.mean, "sigma": self.background_speckle.sigma},
            "inclusion_intensity": {"mean": self.inclusion_intensity.mean, "sigma": self.inclusion_intensity.sigma},
            "inclusions": [{"label": inc.label, **inc.shape.to_dict()} for inc in self.inclusions],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PhantomScene":
        block = data["block_bounds_mm"]
        return cls(
            inclusions=tuple(Inclusion(item["label"], shape_from_dict(item)) for item in data["inclusions"]),
            block_min=block[0],
            block_max=block[1],
            background_speckle=SpeckleParams(**data.get("background_speckle", {})),
            inclusion_intensity=InclusionIntensity(**data.get("inclusion_intensity", {})),
        )


def default_scene() -> PhantomScene:
    """
    기본 QA 팬텀 장면을 생성합니다.

    180×80×60 mm 블록에 구, 타원체, 원기둥, 정삼각 프리즘을 공통 주사축(x)을 따라
    y = 40, z = 30 mm 높이에 배치합니다. 긴 축은 모두 x 방향입니다.
    """
    dims = DEFAULT_DIMENSIONS
    inclusions = (
        Inclusion("sphere", Sphere((17.0, 40.0, 30.0), dims["sphere_radius"])),
        Inclusion("ellipsoid", Ellipsoid((58.0, 40.0, 30.0), dims["ellipsoid_semi_axes"])),
        Inclusion(
            "cylinder",
            Cylinder((109.0, 40.0, 30.0), (1.0, 0.0, 0.0), dims["cylinder_radius"], dims["cylinder_height"]),
        ),
        Inclusion(
            "triprism",
            TriPrism(
                dims["prism_edge"],
                dims["prism_height"],
                RigidTransform.from_rotation(Rotation.from_euler("y", 90.0, degrees=True), (155.0, 40.0, 30.0)),
            ),
        ),
    )
    return PhantomScene(inclusions, DEFAULT_BLOCK[0], DEFAULT_BLOCK[1])


def signed_distance(scene: PhantomScene, points) -> Tuple[Any, Any]:
    """
    장면의 부호 거리와 가장 가까운 포함체 라벨을 반환합니다.

    포함체 안에서는 음수, 모든 포함체 밖에서는 양수입니다.

    Args:
        scene: 팬텀 장면
        points: (3,) 또는 (N, 3) 좌표 (mm)

    Returns:
        (거리, 라벨): 단일 점이면 스칼라, 여러 점이면 배열
    """
    p = np.asarray(points, dtype=float)
    single = p.ndim == 1
    p = p.reshape(-1, 3)
    if not np.all(np.isfinite(p)):
        raise InvalidInputError("좌표가 유한하지 않습니다")

    distances = np.stack([inc.shape.signed_distance(p) for inc in scene.inclusions])
    nearest = np.argmin(distances, axis=0)
    dist = distances[nearest, np.arange(len(p))]
    labels = np.array(scene.labels, dtype=object)[nearest]
    if single:
        return float(dist[0]), str(labels[0])
    return dist, labels


def contains(scene: PhantomScene, points) -> Tuple[np.ndarray, np.ndarray]:
    """
    닫힌 형식의 내부 판정.

    Returns:
        (내부 여부 (N,), 포함체 인덱스 (N,), 밖이면 −1)
    """
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    index = np.full(len(p), -1, dtype=np.int64)
    for k, inc in enumerate(scene.inclusions):
        inside = inc.shape.contains(p)
        index[inside & (index < 0)] = k
    return index >= 0, index


def voxelize_shape(shape: ShapeSpec, grid, transform: Optional[RigidTransform] = None) -> np.ndarray:
    """
    격자 복셀 중심이 형상 내부인지 판정한 불리언 볼륨을 만듭니다.

    transform이 주어지면 복셀 중심 p에 대해 shape.contains(transform.apply(p))를
    평가합니다 (격자 좌표계 → 형상 좌표계).

    Args:
        shape: 형상
        grid: origin, spacing, dims 속성을 가진 격자 정보
        transform: 격자 좌표를 형상 좌표계로 옮기는 변환

    Returns:
        dims 크기의 불리언 볼륨
    """
    dims = tuple(int(d) for d in grid.dims)
    origin = np.asarray(grid.origin, dtype=float)
    spacing = float(grid.spacing)
    volume = np.zeros(dims, dtype=bool)

    lo, hi = shape.bounds()
    if transform is not None:
        corners = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
        mapped = transform.inverse().apply(corners)
        lo, hi = mapped.min(axis=0), mapped.max(axis=0)

    start = np.clip(np.floor((lo - origin) / spacing).astype(int) - 1, 0, dims)
    stop = np.clip(np.ceil((hi - origin) / spacing).astype(int) + 2, 0, dims)
    if np.any(stop <= start):
        return volume

    axes = [origin[k] + spacing * np.arange(start[k], stop[k]) for k in range(3)]
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    centers = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    if transform is not None:
        centers = transform.apply(centers)
    inside = shape.contains(centers).reshape(gx.shape)
    volume[start[0]:stop[0], start[1]:stop[1], start[2]:stop[2]] = inside
    return volume


def save_scene(scene: PhantomScene, path: Union[str, Path]) -> Path:
    """장면을 JSON 문서로 저장합니다."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(scene.to_dict(), indent=2, sort_keys=True), encoding="utf-8")
    logger.info(f"장면 저장: {path} (포함체 {len(scene.inclusions)}개)")
    return path


def load_scene(path: Union[str, Path]) -> PhantomScene:
    """JSON 문서에서 장면을 읽습니다."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return PhantomScene.from_dict(data)
