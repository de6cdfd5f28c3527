"""B-모드 프레임 분할 모듈"""
from .filters import median_filter, otsu_threshold, fill_holes, close_open, class_means
from .segmenter import SegConfig, SegmentationResult, segment_frame
from .scoring import dsc_2d
from .maskio import save_mask, load_mask

__all__ = [
    "median_filter",
    "otsu_threshold",
    "fill_holes",
    "close_open",
    "class_means",
    "SegConfig",
    "SegmentationResult",
    "segment_frame",
    "dsc_2d",
    "save_mask",
    "load_mask",
]
