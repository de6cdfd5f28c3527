"""형상 종류별 피팅 함수 선택"""
from typing import Callable, Dict

import numpy as np

from .base import FitResult
from .cylinder import fit_cylinder
from .ellipsoid import fit_ellipsoid
from .prism import fit_triprism
from .sphere import fit_sphere
from ..utils.errors import InvalidInputError

FITTERS: Dict[str, Callable[[np.ndarray], FitResult]] = {
    "sphere": fit_sphere,
    "ellipsoid": fit_ellipsoid,
    "cylinder": fit_cylinder,
    "triprism": fit_triprism,
}


def fit_shape(kind: str, points: np.ndarray) -> FitResult:
    """형상 종류(kind)에 맞는 피팅 함수를 호출합니다."""
    try:
        fitter = FITTERS[kind]
    except KeyError:
        raise InvalidInputError(f"지원하지 않는 형상 종류: {kind}") from None
    return fitter(points)
