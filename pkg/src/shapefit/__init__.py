"""
파라메트릭 형상 피팅 모듈
구, 타원체, 원기둥, 정삼각 프리즘을 표면 점군에 최소제곱으로 맞춥니다.
"""
from .base import FitResult
from .sphere import fit_sphere, algebraic_sphere
from .ellipsoid import fit_ellipsoid
from .cylinder import fit_cylinder
from .prism import fit_triprism, fit_triangle
from .registry import fit_shape, FITTERS

__all__ = [
    "FitResult",
    "fit_sphere",
    "algebraic_sphere",
    "fit_ellipsoid",
    "fit_cylinder",
    "fit_triprism",
    "fit_triangle",
    "fit_shape",
    "FITTERS",
]
