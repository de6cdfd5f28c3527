"""
마스크 입출력 모듈
이진 마스크를 1비트 PBM(P4) 파일로 저장하고 읽습니다.
"""
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image


def save_mask(mask: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    gray = Image.fromarray(np.asarray(mask, dtype=bool).astype(np.uint8) * 255)
    gray.convert("1", dither=Image.Dither.NONE).save(path, format="PPM")
    return path


def load_mask(path: Union[str, Path]) -> np.ndarray:
    with Image.open(path) as img:
        return np.array(img.convert("L")) > 127
