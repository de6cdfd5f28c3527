"""
포함체 형상 모듈
구, 타원체, 원기둥, 정삼각 프리즘의 해석적 정의와 부호 거리 함수를 제공합니다.
"""
from dataclasses import dataclass, field
from typing import Any, ClassVar, Dict, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation
from scipy.special import ellipeinc, ellipkinc

from ..transforms.rigid import RigidTransform, compose
from ..utils.errors import InvalidInputError

SQRT3 = np.sqrt(3.0)


def _vec3(value, name: str) -> np.ndarray:
    v = np.array(value, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} 값이 유한하지 않습니다")
    v.setflags(write=False)
    return v


def _positive(value, name: str) -> float:
    v = float(value)
    if not np.isfinite(v) or v <= 0:
        raise InvalidInputError(f"{name}은(는) 양수여야 합니다: {value}")
    return v


def _points(points) -> np.ndarray:
    return np.asarray(points, dtype=float).reshape(-1, 3)


def _extrude(d2: np.ndarray, dz: np.ndarray) -> np.ndarray:
    """2D 단면 거리와 축 방향 거리로 돌출체의 정확한 부호 거리를 계산합니다."""
    inside = np.minimum(np.maximum(d2, dz), 0.0)
    outside = np.hypot(np.maximum(d2, 0.0), np.maximum(dz, 0.0))
    return inside + outside


def frame_from_axis(axis) -> np.ndarray:
    """
    세 번째 열이 axis인 오른손 정규직교 좌표계(3×3)를 만듭니다.
    """
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(helper, a)
    u /= np.linalg.norm(u)
    v = np.cross(a, u)
    return np.column_stack([u, v, a])


def solve_ellipsoid_foot(y: np.ndarray, semi_axes: np.ndarray, max_iter: int = 200) -> Tuple[np.ndarray, np.ndarray]:
    """
    타원체 국소 좌표의 점들에 대해 표면 최근접점(foot point)을 구합니다.

    최근접점 x_i = e_i² y_i / (s + d_i), d_i = e_i² − e_min² 에 대해
    Σ(x_i/e_i)² = 1 을 만족하는 s > 0을 뉴턴법으로 풉니다. 함수가 볼록
    감소이므로 근의 왼쪽에서 출발하면 단조 수렴합니다.

    Args:
        y: (N, 3) 국소 좌표 (mm)
        semi_axes: (3,) 반축 길이

    Returns:
        (최근접점 (N, 3), 거리 (N,))
    """
    e = np.asarray(semi_axes, dtype=float)
    sign = np.where(y < 0, -1.0, 1.0)
    scale = float(e.max())
    ya = np.maximum(np.abs(y), 1e-12 * scale)

    e2 = e * e
    d = e2 - e2.min()
    ey = e * ya

    s = np.max(ey - d, axis=1)
    s = np.maximum(s, ey[:, int(np.argmin(e2))])
    active = np.ones(len(y), dtype=bool)

    for _ in range(max_iter):
        if not np.any(active):
            break
        sa = s[active][:, None]
        q = ey[active] / (sa + d)
        f = np.sum(q * q, axis=1) - 1.0
        fp = -2.0 * np.sum(q * q / (sa + d), axis=1)
        step = -f / fp
        step = np.where(np.isfinite(step), step, 0.0)
        s_new = s[active] + np.maximum(step, 0.0)
        done = np.abs(s_new - s[active]) <= 1e-15 * (s_new + scale * scale)
        s[active] = s_new
        idx = np.flatnonzero(active)
        active[idx[done]] = False

    foot = sign * (e2 * ya / (s[:, None] + d))
    dist = np.linalg.norm(foot - y, axis=1)
    return foot, dist


@dataclass(frozen=True, eq=False)
class Sphere:
    """구 (중심, 반지름)"""

    center: np.ndarray
    radius: float
    kind: ClassVar[str] = "sphere"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        object.__setattr__(self, "radius", _positive(self.radius, "radius"))

    def signed_distance(self, points) -> np.ndarray:
        p = _points(points)
        return np.linalg.norm(p - self.center, axis=1) - self.radius

    def contains(self, points) -> np.ndarray:
        p = _points(points)
        return np.sum((p - self.center) ** 2, axis=1) <= self.radius ** 2

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * np.pi * self.radius ** 3

    @property
    def surface_area(self) -> float:
        return 4.0 * np.pi * self.radius ** 2

    @property
    def centroid(self) -> np.ndarray:
        return np.array(self.center)

    @property
    def bounding_radius(self) -> float:
        return self.radius

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.center - self.radius, self.center + self.radius

    def transformed(self, transform: RigidTransform) -> "Sphere":
        return Sphere(transform.apply(self.center), self.radius)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "center_mm": self.center.tolist(), "radius_mm": self.radius}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Sphere":
        return cls(data["center_mm"], data["radius_mm"])


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """타원체 (중심, 반축 (a, b, c), 방향 쿼터니언 x, y, z, w)"""

    center: np.ndarray
    semi_axes: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.0, 1.0]))
    kind: ClassVar[str] = "ellipsoid"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        axes = _vec3(self.semi_axes, "semi_axes")
        if np.any(axes <= 0):
            raise InvalidInputError(f"반축 길이는 양수여야 합니다: {axes}")
        object.__setattr__(self, "semi_axes", axes)
        q = RigidTransform(self.orientation, np.zeros(3)).rotation
        object.__setattr__(self, "orientation", q)

    @property
    def rotation_matrix(self) -> np.ndarray:
        return Rotation.from_quat(self.orientation).as_matrix()

    def to_local(self, points) -> np.ndarray:
        return (_points(points) - self.center) @ self.rotation_matrix

    def signed_distance(self, points) -> np.ndarray:
        y = self.to_local(points)
        _, dist = solve_ellipsoid_foot(y, self.semi_axes)
        outside = np.sum((y / self.semi_axes) ** 2, axis=1) > 1.0
        return np.where(outside, dist, -dist)

    def contains(self, points) -> np.ndarray:
        y = self.to_local(points)
        return np.sum((y / self.semi_axes) ** 2, axis=1) <= 1.0

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * np.pi * float(np.prod(self.semi_axes))

    @property
    def surface_area(self) -> float:
        a, b, c = np.sort(self.semi_axes)[::-1]
        if np.isclose(a, c, rtol=0, atol=1e-12 * a):
            return 4.0 * np.pi * a * a
        phi = np.arccos(c / a)
        m = (a * a * (b * b - c * c)) / (b * b * (a * a - c * c))
        s = np.sin(phi)
        return float(
            2.0 * np.pi * c * c
            + 2.0 * np.pi * a * b / s * (ellipeinc(phi, m) * s * s + ellipkinc(phi, m) * np.cos(phi) ** 2)
        )

    @property
    def centroid(self) -> np.ndarray:
        return np.array(self.center)

    @property
    def bounding_radius(self) -> float:
        return float(self.semi_axes.max())

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        half = np.sqrt(np.sum((self.rotation_matrix * self.semi_axes) ** 2, axis=1))
        return self.center - half, self.center + half

    def transformed(self, transform: RigidTransform) -> "Ellipsoid":
        rot = transform.as_rotation() * Rotation.from_quat(self.orientation)
        return Ellipsoid(transform.apply(self.center), self.semi_axes, rot.as_quat())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "center_mm": self.center.tolist(),
            "semi_axes_mm": self.semi_axes.tolist(),
            "orientation_xyzw": self.orientation.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Ellipsoid":
        return cls(data["center_mm"], data["semi_axes_mm"], data.get("orientation_xyzw", [0, 0, 0, 1]))


@dataclass(frozen=True, eq=False)
class Cylinder:
    """원기둥 (중심, 단위 축 벡터, 반지름, 높이)"""

    center: np.ndarray
    axis: np.ndarray
    radius: float
    height: float
    kind: ClassVar[str] = "cylinder"

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        axis = np.array(_vec3(self.axis, "axis"))
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise InvalidInputError("원기둥 축 벡터가 0입니다")
        axis = axis / norm
        axis.setflags(write=False)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "radius", _positive(self.radius, "radius"))
        object.__setattr__(self, "height", _positive(self.height, "height"))

    def _axial_radial(self, points) -> Tuple[np.ndarray, np.ndarray]:
        rel = _points(points) - self.center
        z = rel @ self.axis
        radial = np.linalg.norm(rel - np.outer(z, self.axis), axis=1)
        return z, radial

    def signed_distance(self, points) -> np.ndarray:
        z, radial = self._axial_radial(points)
        return _extrude(radial - self.radius, np.abs(z) - self.height / 2.0)

    def contains(self, points) -> np.ndarray:
        z, radial = self._axial_radial(points)
        return (radial <= self.radius) & (np.abs(z) <= self.height / 2.0)

    @property
    def frame(self) -> np.ndarray:
        return frame_from_axis(self.axis)

    @property
    def volume(self) -> float:
        return np.pi * self.radius ** 2 * self.height

    @property
    def surface_area(self) -> float:
        return 2.0 * np.pi * self.radius * (self.height + self.radius)

    @property
    def centroid(self) -> np.ndarray:
        return np.array(self.center)

    @property
    def bounding_radius(self) -> float:
        return float(np.hypot(self.radius, self.height / 2.0))

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        a = self.axis
        half = self.height / 2.0 * np.abs(a) + self.radius * np.sqrt(np.clip(1.0 - a * a, 0.0, None))
        return self.center - half, self.center + half

    def transformed(self, transform: RigidTransform) -> "Cylinder":
        return Cylinder(
            transform.apply(self.center), transform.apply_vectors(self.axis), self.radius, self.height
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "center_mm": self.center.tolist(),
            "axis": self.axis.tolist(),
            "radius_mm": self.radius,
            "height_mm": self.height,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Cylinder":
        return cls(data["center_mm"], data["axis"], data["radius_mm"], data["height_mm"])


@dataclass(frozen=True, eq=False)
class TriPrism:
    """
    정삼각 프리즘 (모서리 길이 L, 높이 H, 포즈)

    국소 좌표에서 축은 z, 높이 구간은 [−H/2, H/2]이며 단면 꼭짓점은
    외접원 반지름 L/√3 위의 90°, 210°, 330° 방향에 놓입니다.
    """

    edge_length: float
    height: float
    pose: RigidTransform = field(default_factory=RigidTransform.identity)
    kind: ClassVar[str] = "triprism"

    # 변의 바깥 법선 방향 (270°, 30°, 150°)
    EDGE_NORMALS: ClassVar[np.ndarray] = np.array([
        [0.0, -1.0],
        [np.cos(np.pi / 6), np.sin(np.pi / 6)],
        [-np.cos(np.pi / 6), np.sin(np.pi / 6)],
    ])

    def __post_init__(self):
        object.__setattr__(self, "edge_length", _positive(self.edge_length, "edge_length"))
        object.__setattr__(self, "height", _positive(self.height, "height"))
        if not isinstance(self.pose, RigidTransform):
            raise InvalidInputError("pose는 RigidTransform이어야 합니다")

    @property
    def circumradius(self) -> float:
        return self.edge_length / SQRT3

    @property
    def inradius(self) -> float:
        return self.edge_length / (2.0 * SQRT3)

    def profile(self) -> np.ndarray:
        """단면 꼭짓점 (3, 2), 반시계 방향"""
        angles = np.radians([90.0, 210.0, 330.0])
        return self.circumradius * np.column_stack([np.cos(angles), np.sin(angles)])

    def vertices(self) -> np.ndarray:
        """세계 좌표의 꼭짓점 6개"""
        prof = self.profile()
        local = np.vstack([
            np.column_stack([prof, np.full(3, -self.height / 2.0)]),
            np.column_stack([prof, np.full(3, self.height / 2.0)]),
        ])
        return self.pose.apply(local)

    def to_local(self, points) -> np.ndarray:
        return (_points(points) - self.pose.translation) @ self.pose.matrix()

    def triangle_distance(self, xy: np.ndarray) -> np.ndarray:
        """단면 정삼각형에 대한 2D 부호 거리"""
        prof = self.profile()
        starts = prof[[1, 2, 0]]
        ends = prof[[2, 0, 1]]
        best = np.full(len(xy), np.inf)
        for a, b in zip(starts, ends):
            ab = b - a
            t = np.clip((xy - a) @ ab / (ab @ ab), 0.0, 1.0)
            closest = a + np.outer(t, ab)
            best = np.minimum(best, np.linalg.norm(xy - closest, axis=1))
        inside = np.all(xy @ self.EDGE_NORMALS.T <= self.inradius, axis=1)
        return np.where(inside, -best, best)

    def signed_distance(self, points) -> np.ndarray:
        y = self.to_local(points)
        return _extrude(self.triangle_distance(y[:, :2]), np.abs(y[:, 2]) - self.height / 2.0)

    def contains(self, points) -> np.ndarray:
        y = self.to_local(points)
        in_plane = np.all(y[:, :2] @ self.EDGE_NORMALS.T <= self.inradius, axis=1)
        return in_plane & (np.abs(y[:, 2]) <= self.height / 2.0)

    @property
    def axis(self) -> np.ndarray:
        return self.pose.matrix()[:, 2]

    @property
    def volume(self) -> float:
        return SQRT3 / 4.0 * self.edge_length ** 2 * self.height

    @property
    def surface_area(self) -> float:
        return 3.0 * self.edge_length * self.height + SQRT3 / 2.0 * self.edge_length ** 2

    @property
    def centroid(self) -> np.ndarray:
        return np.array(self.pose.translation)

    @property
    def bounding_radius(self) -> float:
        return float(np.hypot(self.circumradius, self.height / 2.0))

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        v = self.vertices()
        return v.min(axis=0), v.max(axis=0)

    def transformed(self, transform: RigidTransform) -> "TriPrism":
        return TriPrism(self.edge_length, self.height, compose(transform, self.pose))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "edge_length_mm": self.edge_length,
            "height_mm": self.height,
            "pose": self.pose.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TriPrism":
        return cls(data["edge_length_mm"], data["height_mm"], RigidTransform.from_dict(data["pose"]))


ShapeSpec = Union[Sphere, Ellipsoid, Cylinder, TriPrism]

SHAPE_TYPES = {cls.kind: cls for cls in (Sphere, Ellipsoid, Cylinder, TriPrism)}


def shape_from_dict(data: Dict[str, Any]) -> ShapeSpec:
    """태그(kind)에 따라 형상을 역직렬화합니다."""
    kind = data.get("kind")
    if kind not in SHAPE_TYPES:
        raise InvalidInputError(f"알 수 없는 형상 종류: {kind}")
    return SHAPE_TYPES[kind].from_dict(data)
