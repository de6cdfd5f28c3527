"""
볼륨 입출력 모듈
복셀 격자를 MetaImage(.mhd 헤더 + .raw 리틀엔디언 원시 데이터) 쌍으로 저장하고 읽습니다.
"""
from pathlib import Path
from typing import Union

import numpy as np
import SimpleITK as sitk

from .grid import GridSpec, VoxelGrid
from ..utils.errors import InvalidInputError


def save_volume(grid: VoxelGrid, path: Union[str, Path]) -> Path:
    """
    8비트 복셀 값을 .mhd/.raw로 저장합니다.

    Args:
        grid: 복셀 격자
        path: 출력 경로 (접미사는 .mhd로 바뀜)

    Returns:
        .mhd 경로
    """
    path = Path(path).with_suffix(".mhd")
    path.parent.mkdir(parents=True, exist_ok=True)
    # SimpleITK 배열 순서는 (z, y, x)
    image = sitk.GetImageFromArray(np.ascontiguousarray(grid.values.transpose(2, 1, 0)))
    image.SetSpacing([grid.spacing] * 3)
    image.SetOrigin([float(v) for v in grid.origin])
    sitk.WriteImage(image, str(path), useCompression=False)
    return path


def load_volume(path: Union[str, Path]) -> VoxelGrid:
    """
    .mhd 볼륨을 읽습니다. 적중 횟수는 저장되지 않으므로 0으로 채워집니다.
    """
    image = sitk.ReadImage(str(path))
    spacing = np.asarray(image.GetSpacing(), dtype=float)
    if not np.allclose(spacing, spacing[0]):
        raise InvalidInputError(f"등방 간격 볼륨만 지원합니다: {spacing.tolist()}")
    values = sitk.GetArrayFromImage(image).transpose(2, 1, 0).astype(np.uint8)
    spec = GridSpec(np.asarray(image.GetOrigin(), dtype=float), float(spacing[0]), values.shape)
    return VoxelGrid(spec, np.ascontiguousarray(values))
