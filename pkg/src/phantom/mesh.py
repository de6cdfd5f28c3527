"""
기준 메시 모듈
해석적 형상으로부터 수밀(watertight) 삼각형 메시를 생성하고 내보냅니다.
"""
from pathlib import Path
from typing import Union

import numpy as np
import trimesh
from loguru import logger

from .shapes import Cylinder, Ellipsoid, ShapeSpec, Sphere, TriPrism, frame_from_axis
from ..utils.errors import InvalidInputError

# 단위 정이십면체 모서리 길이 (외접 반지름 1)
_ICOSAHEDRON_EDGE = 1.0515


def _icosphere_subdivisions(radius: float, target_edge_len: float) -> int:
    ratio = _ICOSAHEDRON_EDGE * radius / target_edge_len
    return int(max(0, np.ceil(np.log2(ratio)))) if ratio > 1 else 0


def _extrusion_mesh(profile: np.ndarray, height: float, target_edge_len: float) -> trimesh.Trimesh:
    """
    반시계 방향 2D 단면 다각형을 z축으로 돌출한 메시를 만듭니다 (z ∈ [−h/2, h/2]).

    옆면은 높이 방향으로 분할하고, 뚜껑은 단면을 축소한 동심 링과 중심 부채꼴로 채웁니다.
    """
    n = len(profile)
    n_z = max(1, int(np.ceil(height / target_edge_len)))
    n_r = max(1, int(np.ceil(np.linalg.norm(profile, axis=1).max() / target_edge_len)))
    z_levels = np.linspace(-height / 2.0, height / 2.0, n_z + 1)

    vertices = [np.column_stack([profile, np.full(n, z)]) for z in z_levels]
    faces = []

    def ring(j: int, k: int) -> int:
        return j * n + (k % n)

    for j in range(n_z):
        for k in range(n):
            a, b = ring(j, k), ring(j, k + 1)
            c, d = ring(j + 1, k + 1), ring(j + 1, k)
            faces.append((a, b, c))
            faces.append((a, c, d))

    offset = len(z_levels) * n

    def add_cap(z: float, outer_ring: int, flip: bool):
        nonlocal offset
        # 바깥 링(outer_ring) 안쪽으로 m = n_r-1 ... 1 축소 링, 마지막에 중심점
        ring_index = {n_r: outer_ring * n}
        for m in range(n_r - 1, 0, -1):
            vertices.append(np.column_stack([profile * (m / n_r), np.full(n, z)]))
            ring_index[m] = offset
            offset += n
        vertices.append(np.array([[0.0, 0.0, z]]))
        center = offset
        offset += 1

        cap = []
        for m in range(n_r, 1, -1):
            o, i = ring_index[m], ring_index[m - 1]
            for k in range(n):
                k1 = (k + 1) % n
                cap.append((o + k, o + k1, i + k1))
                cap.append((o + k, i + k1, i + k))
        inner = ring_index[1]
        for k in range(n):
            cap.append((inner + k, inner + (k + 1) % n, center))
        if flip:
            cap = [(a, c, b) for a, b, c in cap]
        faces.extend(cap)

    add_cap(height / 2.0, n_z, flip=False)
    add_cap(-height / 2.0, 0, flip=True)

    return trimesh.Trimesh(
        vertices=np.vstack(vertices), faces=np.asarray(faces, dtype=np.int64), process=False
    )


def _subdivided_polygon(corners: np.ndarray, target_edge_len: float) -> np.ndarray:
    """다각형의 각 변을 목표 길이 이하로 분할한 꼭짓점 열"""
    points = []
    for a, b in zip(corners, np.roll(corners, -1, axis=0)):
        steps = max(1, int(np.ceil(np.linalg.norm(b - a) / target_edge_len)))
        t = np.arange(steps)[:, None] / steps
        points.append(a + t * (b - a))
    return np.vstack(points)


def ground_truth_mesh(spec: ShapeSpec, target_edge_len: float = 0.5) -> trimesh.Trimesh:
    """
    해석적 형상의 수밀 기준 메시를 생성합니다.

    모든 정점은 해석적 표면 위에 놓이며 법선은 바깥을 향합니다.

    Args:
        spec: 형상
        target_edge_len: 목표 모서리 길이 (mm)

    Returns:
        trimesh.Trimesh (세계 좌표 mm)
    """
    if not target_edge_len > 0:
        raise InvalidInputError(f"목표 모서리 길이는 양수여야 합니다: {target_edge_len}")

    if isinstance(spec, Sphere):
        mesh = trimesh.creation.icosphere(
            subdivisions=_icosphere_subdivisions(spec.radius, target_edge_len), radius=1.0
        )
        vertices = spec.center + spec.radius * (
            mesh.vertices / np.linalg.norm(mesh.vertices, axis=1, keepdims=True)
        )
        mesh = trimesh.Trimesh(vertices=vertices, faces=mesh.faces, process=False)
    elif isinstance(spec, Ellipsoid):
        unit = trimesh.creation.icosphere(
            subdivisions=_icosphere_subdivisions(float(spec.semi_axes.max()), target_edge_len), radius=1.0
        )
        local = unit.vertices / np.linalg.norm(unit.vertices, axis=1, keepdims=True) * spec.semi_axes
        vertices = local @ spec.rotation_matrix.T + spec.center
        mesh = trimesh.Trimesh(vertices=vertices, faces=unit.faces, process=False)
    elif isinstance(spec, Cylinder):
        n = max(8, int(np.ceil(2.0 * np.pi * spec.radius / target_edge_len)))
        angles = 2.0 * np.pi * np.arange(n) / n
        profile = spec.radius * np.column_stack([np.cos(angles), np.sin(angles)])
        local = _extrusion_mesh(profile, spec.height, target_edge_len)
        vertices = local.vertices @ spec.frame.T + spec.center
        mesh = trimesh.Trimesh(vertices=vertices, faces=local.faces, process=False)
    elif isinstance(spec, TriPrism):
        profile = _subdivided_polygon(spec.profile(), target_edge_len)
        local = _extrusion_mesh(profile, spec.height, target_edge_len)
        mesh = trimesh.Trimesh(vertices=spec.pose.apply(local.vertices), faces=local.faces, process=False)
    else:
        raise InvalidInputError(f"지원하지 않는 형상입니다: {type(spec).__name__}")

    logger.debug(
        f"기준 메시 생성: {spec.kind}, 정점 {len(mesh.vertices)}, 면 {len(mesh.faces)}, "
        f"부피 {mesh.volume:.2f} mm³"
    )
    return mesh


def export_mesh(mesh: trimesh.Trimesh, path: Union[str, Path]) -> Path:
    """
    메시를 확장자(.stl / .ply)에 맞는 이진 형식으로 저장합니다.

    Args:
        mesh: 삼각형 메시
        path: 출력 경로

    Returns:
        저장된 경로
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in (".stl", ".ply"):
        raise InvalidInputError(f"지원하지 않는 메시 형식입니다: {suffix}")
    path.parent.mkdir(parents=True, exist_ok=True)
    mesh.export(str(path), file_type=suffix[1:])
    return path
