"""
B-모드 영상 근사 모듈
슬랩 점유율 + 스펙클 모델로 추적 프레임 영상을 렌더링합니다.
"""
from dataclasses import asdict, dataclass
from typing import Any, Dict, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from ..phantom.scene import PhantomScene
from ..transforms.rigid import RigidTransform
from ..utils.errors import InvalidInputError

# 영상 x(측방) → 세계 +y, 영상 y(깊이) → 세계 −z, 영상 z(평면 법선) → 세계 −x
BASE_PROBE_ROTATION = np.array([
    [0.0, 0.0, -1.0],
    [1.0, 0.0, 0.0],
    [0.0, -1.0, 0.0],
])

SLAB_SAMPLES = 5


@dataclass(frozen=True)
class FrameSpec:
    """프레임 기하 정보 (픽셀 간격은 등방성)"""

    width: int = 256
    height: int = 320
    pixel_spacing: float = 0.15
    fov_width: float = 38.4
    elevational_thickness: float = 1.0
    frame_rate: float = 20.0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0 or self.pixel_spacing <= 0 or self.frame_rate <= 0:
            raise InvalidInputError("프레임 크기, 픽셀 간격, 프레임률은 양수여야 합니다")
        if abs(self.width * self.pixel_spacing - self.fov_width) > self.pixel_spacing:
            raise InvalidInputError(
                f"width·pixel_spacing({self.width * self.pixel_spacing:.3f} mm)가 "
                f"fov_width({self.fov_width} mm)와 한 픽셀 이상 다릅니다"
            )
        if not 0.1 <= self.elevational_thickness <= 5.0:
            raise InvalidInputError(f"고도 방향 두께는 [0.1, 5] mm 범위여야 합니다: {self.elevational_thickness}")

    @property
    def depth(self) -> float:
        return self.height * self.pixel_spacing

    def pixel_points(self, cols: np.ndarray, rows: np.ndarray, z: float = 0.0) -> np.ndarray:
        """픽셀 (col, row)의 영상 좌표 (mm)"""
        return np.column_stack([
            cols * self.pixel_spacing,
            rows * self.pixel_spacing,
            np.full(len(cols), z),
        ])

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def base_probe_rotation() -> Rotation:
    """팬텀 윗면에 수직으로 놓인 탐촉자의 기본 방향"""
    return Rotation.from_matrix(BASE_PROBE_ROTATION)


def render_frame(
    scene: PhantomScene,
    true_pose: RigidTransform,
    spec: FrameSpec,
    rng_seed: Any
) -> Tuple[np.ndarray, np.ndarray]:
    """
    한 장의 B-모드 프레임과 정답 마스크를 렌더링합니다.

    각 픽셀에서 평면 법선 방향 ±두께/2 구간의 5개 점을 표본화해 포함체 점유율 f를
    구하고, 밝기 = (1−f)·배경 스펙클 + f·포함체 밝기로 합성합니다. 정답 마스크는
    중심 평면 표본이 포함체 안인 픽셀입니다.

    Args:
        scene: 팬텀 장면
        true_pose: 영상 → 세계 실제 포즈
        spec: 프레임 기하
        rng_seed: 난수 시드 (정수, 정수 시퀀스 또는 SeedSequence)

    Returns:
        (uint8 영상 (height, width), 불리언 정답 마스크)
    """
    rng = np.random.default_rng(rng_seed)
    shape = (spec.height, spec.width)

    speckle = scene.background_speckle
    background = speckle.mean * np.exp(rng.normal(0.0, speckle.sigma, shape))
    inclusion = scene.inclusion_intensity.mean + rng.normal(0.0, scene.inclusion_intensity.sigma, shape)

    offsets = np.linspace(-spec.elevational_thickness / 2.0, spec.elevational_thickness / 2.0, SLAB_SAMPLES)
    hits = np.zeros((SLAB_SAMPLES,) + shape, dtype=bool)
    to_image = true_pose.inverse()
    s = spec.pixel_spacing

    for inc in scene.inclusions:
        radius = inc.shape.bounding_radius
        c = to_image.apply(inc.shape.centroid)
        if abs(c[2]) > radius + spec.elevational_thickness / 2.0:
            continue
        col0 = max(int(np.floor((c[0] - radius) / s)), 0)
        col1 = min(int(np.ceil((c[0] + radius) / s)) + 1, spec.width)
        row0 = max(int(np.floor((c[1] - radius) / s)), 0)
        row1 = min(int(np.ceil((c[1] + radius) / s)) + 1, spec.height)
        if col1 <= col0 or row1 <= row0:
            continue

        rr, cc = np.mgrid[row0:row1, col0:col1]
        for k, z in enumerate(offsets):
            world = true_pose.apply(spec.pixel_points(cc.ravel(), rr.ravel(), z))
            inside = inc.shape.contains(world).reshape(rr.shape)
            hits[k, row0:row1, col0:col1] |= inside

    occupancy = hits.mean(axis=0)
    intensity = (1.0 - occupancy) * background + occupancy * inclusion
    image = np.clip(np.rint(intensity), 0, 255).astype(np.uint8)
    gt_mask = hits[SLAB_SAMPLES // 2].copy()
    return image, gt_mask
