"""
강체 변환 모듈
단위 쿼터니언 회전 + 평행이동(mm)으로 포즈와 정합 결과를 표현합니다.
"""
from dataclasses import dataclass
from typing import Dict, Any, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

from ..utils.errors import InvalidInputError

ArrayLike = Union[np.ndarray, list, tuple]


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """
    강체 변환 (불변 값 객체)

    rotation은 scipy 순서(x, y, z, w)의 단위 쿼터니언이며 w ≥ 0으로 정규화됩니다.
    translation 단위는 mm입니다.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        q = np.array(self.rotation, dtype=float).reshape(4)
        t = np.array(self.translation, dtype=float).reshape(3)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(t))):
            raise InvalidInputError("변환 값이 유한하지 않습니다")

        norm = np.linalg.norm(q)
        if norm < 1e-12:
            raise InvalidInputError("쿼터니언 노름이 0입니다")
        if abs(norm - 1.0) > 1e-14:
            q = q / norm
        if q[3] < 0:
            q = -q

        q.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.array([0.0, 0.0, 0.0, 1.0]), np.zeros(3))

    @classmethod
    def from_rotation(cls, rotation: Rotation, translation: ArrayLike = (0.0, 0.0, 0.0)) -> "RigidTransform":
        return cls(rotation.as_quat(), np.asarray(translation, dtype=float))

    @classmethod
    def from_matrix(cls, matrix: ArrayLike, translation: ArrayLike = None) -> "RigidTransform":
        """
        3×3 회전 행렬(+ 평행이동) 또는 4×4 동차 행렬로부터 생성합니다.

        Args:
            matrix: 3×3 또는 4×4 행렬
            translation: 3×3 행렬일 때의 평행이동 (mm)
        """
        m = np.asarray(matrix, dtype=float)
        if m.shape == (4, 4):
            return cls(Rotation.from_matrix(m[:3, :3]).as_quat(), m[:3, 3])
        if m.shape != (3, 3):
            raise InvalidInputError(f"행렬 크기가 잘못되었습니다: {m.shape}")
        if translation is None:
            translation = np.zeros(3)
        return cls(Rotation.from_matrix(m).as_quat(), translation)

    @classmethod
    def from_rotvec(cls, rotvec: ArrayLike, translation: ArrayLike = (0.0, 0.0, 0.0)) -> "RigidTransform":
        return cls(Rotation.from_rotvec(np.asarray(rotvec, dtype=float)).as_quat(), translation)

    def as_rotation(self) -> Rotation:
        return Rotation.from_quat(self.rotation)

    def matrix(self) -> np.ndarray:
        """3×3 회전 행렬"""
        return self.as_rotation().as_matrix()

    def homogeneous(self) -> np.ndarray:
        """4×4 동차 변환 행렬"""
        h = np.eye(4)
        h[:3, :3] = self.matrix()
        h[:3, 3] = self.translation
        return h

    def apply(self, points: ArrayLike) -> np.ndarray:
        """
        점(들)에 변환을 적용합니다.

        Args:
            points: (3,) 또는 (N, 3) 좌표 (mm)

        Returns:
            변환된 좌표 (입력과 같은 형태)
        """
        p = np.asarray(points, dtype=float)
        if p.size == 0:
            return p.reshape(-1, 3)
        return p @ self.matrix().T + self.translation

    def apply_vectors(self, vectors: ArrayLike) -> np.ndarray:
        """방향 벡터(들)에 회전만 적용합니다."""
        v = np.asarray(vectors, dtype=float)
        return v @ self.matrix().T

    def inverse(self) -> "RigidTransform":
        return invert(self)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return compose(self, other)

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        return {
            "rotation_xyzw": [float(v) for v in self.rotation],
            "translation_mm": [float(v) for v in self.translation],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RigidTransform":
        return cls(data["rotation_xyzw"], data["translation_mm"])

    def __repr__(self) -> str:
        angle = np.degrees(self.as_rotation().magnitude())
        return (
            f"RigidTransform(angle={angle:.4f}deg, "
            f"translation=({self.translation[0]:.4f}, {self.translation[1]:.4f}, {self.translation[2]:.4f}))"
        )


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """
    두 변환을 합성합니다. 결과는 b를 먼저, 그 다음 a를 적용합니다.

    Args:
        a: 나중에 적용할 변환
        b: 먼저 적용할 변환

    Returns:
        합성 변환 a∘b
    """
    ra = a.as_rotation()
    rotation = ra * b.as_rotation()
    translation = ra.apply(b.translation) + a.translation
    return RigidTransform(rotation.as_quat(), translation)


def invert(transform: RigidTransform) -> RigidTransform:
    """역변환을 반환합니다."""
    r_inv = transform.as_rotation().inv()
    return RigidTransform(r_inv.as_quat(), -r_inv.apply(transform.translation))


def transform_distance(a: RigidTransform, b: RigidTransform) -> Tuple[float, float]:
    """
    두 변환 사이의 차이를 회전 각도와 평행이동 크기로 반환합니다.

    Returns:
        (회전 각도 [rad], 평행이동 노름 [mm]) of a⁻¹∘b
    """
    delta = compose(invert(a), b)
    return float(delta.as_rotation().magnitude()), float(np.linalg.norm(delta.translation))


def transforms_close(a: RigidTransform, b: RigidTransform, tol: float = 1e-9) -> bool:
    """회전 각도와 평행이동 차이가 모두 tol 이하인지 확인합니다."""
    angle, dist = transform_distance(a, b)
    return angle <= tol and dist <= tol
