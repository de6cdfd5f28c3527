"""QA 팬텀 정의 모듈: 포함체 형상, 기준 메시, 해석적 기술자, 장면"""
from .shapes import (
    Sphere,
    Ellipsoid,
    Cylinder,
    TriPrism,
    ShapeSpec,
    SHAPE_TYPES,
    shape_from_dict,
    frame_from_axis,
)
from .mesh import ground_truth_mesh, export_mesh
from .analytic import analytic_descriptors
from .scene import (
    PhantomScene,
    Inclusion,
    SpeckleParams,
    InclusionIntensity,
    default_scene,
    signed_distance,
    contains,
    voxelize_shape,
    save_scene,
    load_scene,
)

__all__ = [
    "Sphere",
    "Ellipsoid",
    "Cylinder",
    "TriPrism",
    "ShapeSpec",
    "SHAPE_TYPES",
    "shape_from_dict",
    "frame_from_axis",
    "ground_truth_mesh",
    "export_mesh",
    "analytic_descriptors",
    "PhantomScene",
    "Inclusion",
    "SpeckleParams",
    "InclusionIntensity",
    "default_scene",
    "signed_distance",
    "contains",
    "voxelize_shape",
    "save_scene",
    "load_scene",
]
