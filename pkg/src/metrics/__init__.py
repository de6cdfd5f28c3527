"""
재구성 품질 지표 모듈
체적 겹침, 표면 거리, 형상 기술자, 해상도 한계 상한을 제공합니다.
"""
from .overlap import dsc_3d, resolution_limited_dsc, resolution_limited_volume_error
from .surface import (
    hausdorff,
    mesh_hausdorff,
    directed_distances,
    SurfaceErrorMap,
    surface_error_map,
    DEFAULT_SAMPLE_SPACING,
)
from .descriptors import (
    DescriptorRecord,
    shape_descriptors,
    feret_diameter,
    roundness,
    sphericity,
    axis_ratios,
)
from ..utils.sampling import surface_points

__all__ = [
    "dsc_3d",
    "resolution_limited_dsc",
    "resolution_limited_volume_error",
    "hausdorff",
    "mesh_hausdorff",
    "directed_distances",
    "SurfaceErrorMap",
    "surface_error_map",
    "DEFAULT_SAMPLE_SPACING",
    "DescriptorRecord",
    "shape_descriptors",
    "feret_diameter",
    "roundness",
    "sphericity",
    "axis_ratios",
    "surface_points",
]
