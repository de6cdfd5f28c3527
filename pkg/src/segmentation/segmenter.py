"""
프레임 분할 모듈
ROI 자르기 → 중앙값 필터 → Otsu → 어두운 픽셀 선택 → 구멍 채우기 → 닫힘/열림
→ 어두운 세로 열 제거 → 전체 프레임 좌표로 복원 순서의 분할 파이프라인입니다.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from .filters import class_means, close_open, fill_holes, median_filter, otsu_threshold
from ..utils.errors import ConfigError, DegenerateHistogramError, InvalidInputError


@dataclass(frozen=True)
class SegConfig:
    """
    분할 설정

    Attributes:
        roi: (x0, y0, x1, y1) 픽셀 사각형, None이면 영상 경계에서 roi_border만큼 안쪽
        roi_border: 기본 ROI 여백 (px)
        median_kernel: 중앙값 필터 크기 (홀수)
        close_kernel: 닫힘 구조 요소 크기 (홀수)
        open_kernel: 열림 구조 요소 크기 (홀수)
        dropout_column_mean_threshold: 열 평균 밝기 하한, None이면 0.25 × ROI 평균
        min_class_contrast: 밝은/어두운 클래스 평균 비 하한 (미달 시 포함체 없음)
    """

    roi: Optional[Tuple[int, int, int, int]] = None
    roi_border: int = 16
    median_kernel: int = 7
    close_kernel: int = 5
    open_kernel: int = 5
    dropout_column_mean_threshold: Optional[float] = None
    min_class_contrast: float = 2.0

    def __post_init__(self):
        for name in ("median_kernel", "close_kernel", "open_kernel"):
            k = getattr(self, name)
            if int(k) != k or k < 1 or k % 2 == 0:
                raise ConfigError(f"{name}은(는) 1 이상의 홀수여야 합니다: {k}")
        if self.roi is not None:
            roi = tuple(int(v) for v in self.roi)
            if len(roi) != 4 or roi[2] <= roi[0] or roi[3] <= roi[1]:
                raise ConfigError(f"ROI가 잘못되었습니다: {self.roi}")
            object.__setattr__(self, "roi", roi)
        if self.roi_border < 0:
            raise ConfigError("ROI 여백은 음수일 수 없습니다")

    def resolve_roi(self, shape: Tuple[int, int]) -> Tuple[int, int, int, int]:
        """영상 크기에 대한 ROI (x0, y0, x1, y1)"""
        height, width = shape
        if self.roi is None:
            b = self.roi_border
            roi = (b, b, width - b, height - b)
        else:
            roi = self.roi
        x0, y0, x1, y1 = roi
        if x0 < 0 or y0 < 0 or x1 > width or y1 > height or x1 <= x0 or y1 <= y0:
            raise InvalidInputError(f"ROI {roi}가 영상({width}×{height}) 밖으로 나갑니다")
        return roi

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "SegConfig":
        """부분 딕셔너리를 기본값 위에 덮어써 생성합니다."""
        data = dict(data or {})
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"알 수 없는 분할 설정 키: {sorted(unknown)}")
        if data.get("roi") is not None:
            data["roi"] = tuple(data["roi"])
        return cls(**data)


@dataclass
class SegmentationResult:
    """분할 결과: 전체 프레임 마스크, 임계값, 제거된 열, 경고"""

    mask: np.ndarray
    threshold: Optional[int]
    removed_columns: List[int] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def area(self) -> int:
        return int(self.mask.sum())


def segment_frame(img: np.ndarray, cfg: Optional[SegConfig] = None) -> SegmentationResult:
    """
    B-모드 프레임에서 무에코 포함체를 분할합니다.

    Args:
        img: 8비트 영상 (height, width)
        cfg: 분할 설정 (None이면 기본값)

    Returns:
        SegmentationResult
    """
    cfg = cfg or SegConfig()
    img = np.asarray(img, dtype=np.uint8)
    if img.ndim != 2:
        raise InvalidInputError(f"2D 영상이 필요합니다: {img.shape}")
    x0, y0, x1, y1 = cfg.resolve_roi(img.shape)
    full = np.zeros(img.shape, dtype=bool)

    filtered = median_filter(img[y0:y1, x0:x1], cfg.median_kernel)
    try:
        threshold = otsu_threshold(filtered)
    except DegenerateHistogramError:
        logger.warning("분할: 히스토그램이 퇴화되어 빈 마스크를 반환합니다")
        return SegmentationResult(full, None, warnings=["degenerate_histogram"])

    dark_mean, bright_mean = class_means(filtered, threshold)
    if bright_mean < cfg.min_class_contrast * max(dark_mean, 1.0):
        return SegmentationResult(full, threshold, warnings=["low_contrast"])

    mask = filtered < threshold
    mask = fill_holes(mask)
    mask = close_open(mask, cfg.close_kernel, cfg.open_kernel)

    column_means = filtered.mean(axis=0)
    limit = cfg.dropout_column_mean_threshold
    if limit is None:
        limit = 0.25 * float(filtered.mean())
    dark_columns = np.flatnonzero(column_means < limit)
    mask[:, dark_columns] = False

    full[y0:y1, x0:x1] = mask
    return SegmentationResult(full, threshold, removed_columns=[int(c) + x0 for c in dark_columns])
