"""
표면 표본화 유틸리티
삼각형 메시 표면을 균일 간격에 가깝게 점으로 표본화합니다.
"""
import numpy as np
import trimesh


def surface_points(mesh: trimesh.Trimesh, spacing: float = 0.25, seed: int = 0) -> np.ndarray:
    """
    메시 정점과 면적 균등 무작위 표본의 합집합을 반환합니다.

    표본 수는 면적 / spacing² 이며 같은 시드면 같은 결과를 냅니다.

    Args:
        mesh: 삼각형 메시
        spacing: 목표 점 간격 (mm)
        seed: 난수 시드

    Returns:
        (N, 3) 표면 점 (mm)
    """
    vertices = np.asarray(mesh.vertices, dtype=float)
    count = int(np.ceil(float(mesh.area) / (spacing * spacing)))
    if count <= 0:
        return vertices.copy()
    samples, _ = trimesh.sample.sample_surface(mesh, count, seed=seed)
    return np.vstack([vertices, np.asarray(samples, dtype=float)])
