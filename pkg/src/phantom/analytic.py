"""
해석적 형상 기술자 모듈
형상 파라미터로부터 닫힌 형식의 기술자를 계산합니다.
"""
import numpy as np

from .shapes import Cylinder, Ellipsoid, ShapeSpec, Sphere, TriPrism
from ..metrics.descriptors import DescriptorRecord, axis_ratios, roundness
from ..utils.errors import InvalidInputError


def _solid_moments(spec: ShapeSpec):
    """
    균일 밀도 고체의 공분산 고유값과 대응 축 (정렬 전)

    Returns:
        (고유값 (3,), 축 행렬 (3, 3) 열 = 단위 벡터)
    """
    if isinstance(spec, Sphere):
        return np.full(3, spec.radius ** 2 / 5.0), np.eye(3)
    if isinstance(spec, Ellipsoid):
        return spec.semi_axes ** 2 / 5.0, spec.rotation_matrix
    if isinstance(spec, Cylinder):
        radial = spec.radius ** 2 / 4.0
        return np.array([radial, radial, spec.height ** 2 / 12.0]), spec.frame
    if isinstance(spec, TriPrism):
        in_plane = spec.edge_length ** 2 / 24.0
        return np.array([in_plane, in_plane, spec.height ** 2 / 12.0]), spec.pose.matrix()
    raise InvalidInputError(f"지원하지 않는 형상입니다: {type(spec).__name__}")


def _feret(spec: ShapeSpec) -> float:
    if isinstance(spec, Sphere):
        return 2.0 * spec.radius
    if isinstance(spec, Ellipsoid):
        return 2.0 * float(spec.semi_axes.max())
    if isinstance(spec, Cylinder):
        return float(np.hypot(2.0 * spec.radius, spec.height))
    return float(np.hypot(spec.edge_length, spec.height))


def analytic_descriptors(spec: ShapeSpec) -> DescriptorRecord:
    """
    형상의 닫힌 형식 기술자를 반환합니다.

    신장도/평탄도는 재구성 성분과 같은 공분산 고유값 규약으로 계산합니다
    (타원체에서는 장축/단축 비와 같습니다).

    Args:
        spec: 형상

    Returns:
        DescriptorRecord
    """
    eigvals, axes = _solid_moments(spec)
    order = np.argsort(eigvals, kind="stable")[::-1]
    eigvals = eigvals[order]
    elongation, flatness = axis_ratios(eigvals)
    return DescriptorRecord(
        volume=spec.volume,
        surface_area=spec.surface_area,
        centroid=spec.centroid,
        feret_max=_feret(spec),
        roundness=roundness(spec.volume, spec.surface_area),
        flatness=flatness,
        elongation=elongation,
        principal_axes=axes[:, order].T.copy(),
        eigenvalues=eigvals,
    )
