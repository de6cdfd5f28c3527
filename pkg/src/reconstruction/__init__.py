"""
순방향 매핑 3D 볼륨 재구성 모듈
"""
from .grid import (
    GridSpec,
    VoxelGrid,
    insert_frame,
    reconstruct,
    auto_grid,
    DEFAULT_SPACING,
)
from .components import (
    LabeledComponents,
    threshold_and_label,
    extract_surface,
)
from .volume_io import save_volume, load_volume

__all__ = [
    "GridSpec",
    "VoxelGrid",
    "insert_frame",
    "reconstruct",
    "auto_grid",
    "DEFAULT_SPACING",
    "LabeledComponents",
    "threshold_and_label",
    "extract_surface",
    "save_volume",
    "load_volume",
]
