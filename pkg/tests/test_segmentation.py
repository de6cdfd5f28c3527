from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from src.scansim import FrameSpec, render_frame
from src.segmentation import (
    SegConfig,
    close_open,
    dsc_2d,
    fill_holes,
    load_mask,
    median_filter,
    otsu_threshold,
    save_mask,
    segment_frame,
)
from src.utils.errors import ConfigError, DegenerateHistogramError, InvalidInputError
from tests.utils import probe_pose


def brute_force_median(img: np.ndarray, k: int) -> np.ndarray:
    pad = k // 2
    padded = np.pad(img, pad, mode="edge")
    out = np.empty_like(img)
    for r in range(img.shape[0]):
        for c in range(img.shape[1]):
            out[r, c] = np.sort(padded[r:r + k, c:c + k].ravel())[k * k // 2]
    return out


def brute_force_otsu(img: np.ndarray) -> int:
    values = img.ravel().astype(int)
    n = len(values)
    best_t, best = None, Fraction(-1)
    for t in range(1, 256):
        dark = values[values < t]
        bright = values[values >= t]
        if len(dark) == 0 or len(bright) == 0:
            continue
        diff = Fraction(int(dark.sum()), len(dark)) - Fraction(int(bright.sum()), len(bright))
        between = Fraction(len(dark) * len(bright), n * n) * diff * diff
        if between > best:
            best_t, best = t, between
    return best_t


@pytest.fixture(scope="module")
def disc_frame(scene):
    image, mask = render_frame(scene, probe_pose(17.0), FrameSpec(), 21)
    return image, mask


def test_median_filter_identity_and_salt_removal() -> None:
    img = np.full((9, 9), 100, dtype=np.uint8)
    img[4, 4] = 255
    np.testing.assert_array_equal(median_filter(img, 1), img)
    assert median_filter(img, 3)[4, 4] == 100


def test_median_filter_matches_sort_oracle() -> None:
    rng = np.random.default_rng(0)
    for _ in range(5):
        img = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
        np.testing.assert_array_equal(median_filter(img, 7), brute_force_median(img, 7))
        np.testing.assert_array_equal(median_filter(img, 3), brute_force_median(img, 3))


def test_median_filter_rejects_even_kernel() -> None:
    with pytest.raises(InvalidInputError):
        median_filter(np.zeros((5, 5), dtype=np.uint8), 4)


def test_otsu_separates_two_valued_image() -> None:
    img = np.full((20, 20), 20, dtype=np.uint8)
    img[:, 10:] = 150
    t = otsu_threshold(img)
    assert 20 < t <= 150
    assert np.all((img < t) == (img == 20))


def test_otsu_matches_exhaustive_search() -> None:
    rng = np.random.default_rng(1)
    for _ in range(100):
        img = rng.integers(0, 256, size=(24, 24), dtype=np.uint8)
        assert otsu_threshold(img) == brute_force_otsu(img)
    clustered = np.concatenate([rng.normal(40, 10, 300), rng.normal(170, 25, 500)])
    img = np.clip(clustered, 0, 255).astype(np.uint8).reshape(20, 40)
    assert otsu_threshold(img) == brute_force_otsu(img)


def test_otsu_rejects_constant_image_and_empty_roi() -> None:
    with pytest.raises(DegenerateHistogramError):
        otsu_threshold(np.full((8, 8), 77, dtype=np.uint8))
    with pytest.raises(InvalidInputError):
        otsu_threshold(np.zeros((8, 8), dtype=np.uint8), roi=(4, 4, 4, 8))


def test_fill_holes_fills_only_enclosed_regions() -> None:
    mask = np.zeros((10, 10), dtype=bool)
    mask[2:7, 2:7] = True
    mask[4, 4] = False
    mask[0:3, 8] = True
    filled = fill_holes(mask)
    assert filled[4, 4]
    assert not filled[0, 0]
    np.testing.assert_array_equal(filled[0:3, 8], True)


def test_close_open_is_idempotent() -> None:
    rng = np.random.default_rng(2)
    mask = rng.random((60, 60)) < 0.45
    once = close_open(mask, 5, 5)
    twice = close_open(once, 5, 5)
    np.testing.assert_array_equal(once, twice)


def test_dsc_2d_cases() -> None:
    a = np.zeros((10, 10), dtype=bool)
    a[:, :4] = True
    b = np.zeros((10, 10), dtype=bool)
    b[:, 6:] = True
    c = np.zeros((10, 10), dtype=bool)
    c[:, 2:6] = True
    assert dsc_2d(a, a) == 1.0
    assert dsc_2d(a, b) == 0.0
    assert dsc_2d(a, c) == pytest.approx(0.5)
    assert dsc_2d(np.zeros((3, 3)), np.zeros((3, 3))) == 1.0
    with pytest.raises(InvalidInputError):
        dsc_2d(a, np.zeros((5, 5), dtype=bool))


def test_seg_config_validation() -> None:
    with pytest.raises(ConfigError):
        SegConfig(median_kernel=6)
    with pytest.raises(ConfigError):
        SegConfig.from_dict({"median_kernal": 7})
    cfg = SegConfig.from_dict({"roi": [0, 0, 50, 50], "close_kernel": 3})
    assert cfg.roi == (0, 0, 50, 50)
    assert SegConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(InvalidInputError):
        cfg.resolve_roi((40, 40))


def test_segment_frame_recovers_disc(disc_frame) -> None:
    image, gt = disc_frame
    result = segment_frame(image)
    assert result.mask.shape == image.shape
    assert not result.warnings
    assert dsc_2d(result.mask, gt) >= 0.95


def test_segment_frame_on_pure_speckle_is_nearly_empty(scene) -> None:
    spec = FrameSpec()
    roi_area = (spec.width - 32) * (spec.height - 32)
    for seed in range(10):
        image, gt = render_frame(scene, probe_pose(-50.0), spec, seed)
        assert not gt.any()
        assert segment_frame(image).area < 0.01 * roi_area


def test_segment_frame_removes_dark_columns(disc_frame) -> None:
    image, gt = disc_frame
    image = image.copy()
    band = np.arange(110, 122)
    image[:, band] = 5
    result = segment_frame(image)
    assert set(band[3:-3]).issubset(result.removed_columns)
    assert not result.mask[:, band].any()
    assert result.mask.any()


def test_segment_frame_constant_image_returns_empty_with_warning() -> None:
    result = segment_frame(np.full((100, 100), 90, dtype=np.uint8))
    assert result.area == 0
    assert result.threshold is None
    assert result.warnings == ["degenerate_histogram"]


def test_segment_frame_tolerates_intensity_offset(disc_frame) -> None:
    image, _ = disc_frame
    base = segment_frame(image).mask
    shifted = np.clip(image.astype(int) + 15, 0, 255).astype(np.uint8)
    assert dsc_2d(segment_frame(shifted).mask, base) > 0.99


def test_mask_file_preserves_bits(tmp_path: Path) -> None:
    rng = np.random.default_rng(4)
    mask = rng.random((37, 53)) < 0.3
    path = save_mask(mask, tmp_path / "mask.pbm")
    np.testing.assert_array_equal(load_mask(path), mask)
