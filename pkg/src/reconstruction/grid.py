"""
복셀 격자 모듈
격자 기하(GridSpec), 8비트 복셀 격자(VoxelGrid), 순방향 매핑 삽입과 최대값 합성을 제공합니다.
"""
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from ..transforms.rigid import RigidTransform
from ..utils.errors import InvalidInputError

DEFAULT_SPACING = 0.5
DEFAULT_PADDING = 5.0

# (mask, reported_pose, pixel_spacing) 또는 intensities를 덧붙인 4-튜플
FrameTuple = Tuple[np.ndarray, RigidTransform, float]


@dataclass(frozen=True, eq=False)
class GridSpec:
    """
    축 정렬 등방 격자 기하

    Attributes:
        origin: 복셀 (0,0,0)의 중심 좌표 (mm)
        spacing: 복셀 간격 (mm)
        dims: (nx, ny, nz)
    """

    origin: np.ndarray
    spacing: float = DEFAULT_SPACING
    dims: Tuple[int, int, int] = (1, 1, 1)

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float).reshape(3)
        if not np.all(np.isfinite(origin)):
            raise InvalidInputError("격자 원점이 유한하지 않습니다")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or min(dims) <= 0:
            raise InvalidInputError(f"격자 크기는 양수여야 합니다: {self.dims}")
        if not np.isfinite(self.spacing) or self.spacing <= 0:
            raise InvalidInputError(f"복셀 간격은 양수여야 합니다: {self.spacing}")
        origin.setflags(write=False)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.dims

    @property
    def upper(self) -> np.ndarray:
        """마지막 복셀 중심 좌표"""
        return self.origin + self.spacing * (np.asarray(self.dims) - 1)

    def world_to_index(self, points: np.ndarray) -> np.ndarray:
        """가장 가까운 복셀 인덱스 (반올림은 짝수 쪽)"""
        points = np.asarray(points, dtype=float)
        return np.rint((points - self.origin) / self.spacing).astype(np.int64)

    def index_to_world(self, indices: np.ndarray) -> np.ndarray:
        return self.origin + self.spacing * np.asarray(indices, dtype=float)

    def in_bounds(self, indices: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices)
        return np.all((indices >= 0) & (indices < np.asarray(self.dims)), axis=-1)

    def crop(self, lo: np.ndarray, hi: np.ndarray, margin: float = 0.0) -> Tuple["GridSpec", Tuple[slice, slice, slice]]:
        """
        월드 상자 [lo, hi](+margin)를 덮는 부분 격자와 원 격자에서의 슬라이스

        Returns:
            (부분 GridSpec, 슬라이스 튜플)
        """
        lo = np.asarray(lo, dtype=float) - margin
        hi = np.asarray(hi, dtype=float) + margin
        start = np.clip(np.floor((lo - self.origin) / self.spacing).astype(int), 0, np.asarray(self.dims) - 1)
        stop = np.clip(np.ceil((hi - self.origin) / self.spacing).astype(int) + 1, start + 1, self.dims)
        sub = GridSpec(self.index_to_world(start), self.spacing, tuple(int(v) for v in stop - start))
        return sub, tuple(slice(int(a), int(b)) for a, b in zip(start, stop))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "origin_mm": [float(v) for v in self.origin],
            "spacing_mm": self.spacing,
            "dims": list(self.dims),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridSpec":
        return cls(data["origin_mm"], data["spacing_mm"], tuple(data["dims"]))

    def __repr__(self) -> str:
        return f"GridSpec(origin={self.origin.tolist()}, spacing={self.spacing}, dims={self.dims})"


@dataclass(eq=False)
class VoxelGrid:
    """8비트 복셀 값과 복셀별 적중 횟수를 가진 격자"""

    spec: GridSpec
    values: np.ndarray = None
    hit_count: np.ndarray = None
    out_of_grid: int = 0

    def __post_init__(self):
        if self.values is None:
            self.values = np.zeros(self.spec.dims, dtype=np.uint8)
        if self.hit_count is None:
            self.hit_count = np.zeros(self.spec.dims, dtype=np.uint32)
        if self.values.shape != self.spec.dims or self.hit_count.shape != self.spec.dims:
            raise InvalidInputError("복셀 배열 크기가 격자 크기와 다릅니다")

    @property
    def origin(self) -> np.ndarray:
        return self.spec.origin

    @property
    def spacing(self) -> float:
        return self.spec.spacing

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.spec.dims

    def copy(self) -> "VoxelGrid":
        return VoxelGrid(self.spec, self.values.copy(), self.hit_count.copy(), self.out_of_grid)

    def get_stats(self) -> Dict[str, Any]:
        """격자 진단 통계"""
        return {
            "dims": list(self.dims),
            "spacing_mm": self.spacing,
            "occupied_voxels": int(np.count_nonzero(self.values)),
            "hit_voxels": int(np.count_nonzero(self.hit_count)),
            "out_of_grid_pixels": int(self.out_of_grid),
        }


def _frame_points(mask: np.ndarray, pixel_spacing: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols = np.nonzero(mask)
    points = np.column_stack([cols * pixel_spacing, rows * pixel_spacing, np.zeros(rows.size)])
    return rows, cols, points


def insert_frame(
    grid: VoxelGrid,
    mask: np.ndarray,
    pose: RigidTransform,
    pixel_spacing: float,
    intensities: Optional[np.ndarray] = None,
) -> VoxelGrid:
    """
    전경 픽셀을 가장 가까운 복셀로 순방향 매핑하고 최대값으로 합성합니다.

    Args:
        grid: 갱신할 격자 (제자리 갱신 후 반환)
        mask: 이진 마스크 (height, width)
        pose: 영상 좌표 (col·s, row·s, 0) → 월드 mm 변환
        pixel_spacing: 픽셀 간격 (mm)
        intensities: 주어지면 255 대신 해당 픽셀의 8비트 밝기를 합성

    Returns:
        갱신된 격자
    """
    mask = np.asarray(mask, dtype=bool)
    rows, cols, points = _frame_points(mask, pixel_spacing)
    if rows.size == 0:
        return grid

    indices = grid.spec.world_to_index(pose.apply(points))
    inside = grid.spec.in_bounds(indices)
    grid.out_of_grid += int(rows.size - np.count_nonzero(inside))
    if not np.any(inside):
        return grid

    target = tuple(indices[inside].T)
    if intensities is None:
        values = np.full(target[0].size, 255, dtype=np.uint8)
    else:
        intensities = np.asarray(intensities, dtype=np.uint8)
        if intensities.shape != mask.shape:
            raise InvalidInputError("밝기 영상 크기가 마스크와 다릅니다")
        values = intensities[rows[inside], cols[inside]]
    np.maximum.at(grid.values, target, values)
    np.add.at(grid.hit_count, target, 1)
    return grid


def _unpack(frame: Sequence) -> Tuple[np.ndarray, RigidTransform, float, Optional[np.ndarray]]:
    if len(frame) == 3:
        mask, pose, pixel_spacing = frame
        return mask, pose, pixel_spacing, None
    mask, pose, pixel_spacing, intensities = frame
    return mask, pose, pixel_spacing, intensities


def auto_grid(
    frames: Sequence[Sequence],
    spacing: float = DEFAULT_SPACING,
    padding: float = DEFAULT_PADDING,
) -> GridSpec:
    """
    보고 포즈 아래 모든 프레임 영역을 감싸는 축 정렬 격자 (각 면 padding mm 여유)

    Args:
        frames: (mask, pose, pixel_spacing[, intensities]) 시퀀스
        spacing: 복셀 간격 (mm)
        padding: 여유 (mm)

    Returns:
        GridSpec
    """
    if len(frames) == 0:
        raise InvalidInputError("프레임이 하나 이상 필요합니다")
    corners = []
    for frame in frames:
        mask, pose, pixel_spacing, _ = _unpack(frame)
        height, width = np.asarray(mask).shape
        w, h = width * pixel_spacing, height * pixel_spacing
        corners.append(pose.apply(np.array([[0, 0, 0], [w, 0, 0], [0, h, 0], [w, h, 0]], dtype=float)))
    corners = np.vstack(corners)
    lo = corners.min(axis=0) - padding
    hi = corners.max(axis=0) + padding
    dims = tuple(int(v) for v in np.ceil((hi - lo) / spacing - 1e-9).astype(int) + 1)
    return GridSpec(lo, spacing, dims)


def reconstruct(frames: Iterable[Sequence], grid_spec: Optional[GridSpec] = None) -> VoxelGrid:
    """
    모든 프레임을 insert_frame으로 접어 볼륨을 만듭니다 (프레임 순서와 무관).

    Args:
        frames: (mask, reported_pose, pixel_spacing[, intensities]) 시퀀스
        grid_spec: 격자 기하, None이면 auto_grid

    Returns:
        VoxelGrid
    """
    frames = list(frames)
    if not frames:
        raise InvalidInputError("재구성할 프레임이 없습니다")
    spec = grid_spec if grid_spec is not None else auto_grid(frames)
    grid = VoxelGrid(spec)
    for frame in frames:
        mask, pose, pixel_spacing, intensities = _unpack(frame)
        insert_frame(grid, mask, pose, pixel_spacing, intensities)
    if grid.out_of_grid:
        logger.debug(f"격자 밖으로 매핑된 픽셀 {grid.out_of_grid}개")
    logger.info(f"볼륨 재구성 완료: 프레임 {len(frames)}개, 점유 복셀 {int(np.count_nonzero(grid.values))}개")
    return grid
