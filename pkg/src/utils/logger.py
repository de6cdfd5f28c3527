"""
로깅 유틸리티 모듈
loguru 싱크 설정, 외부 라이브러리 로그 연결, 단계별 소요 시간 기록을 제공합니다.
"""
import logging
import sys
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional, Union

from loguru import logger

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<magenta>{extra[run]}</magenta> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)
FILE_FORMAT = (
    "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {extra[run]} | "
    "{name}:{function}:{line} - {message}"
)

# 표준 logging을 쓰는 의존 라이브러리
LIBRARY_LOGGERS = ("trimesh",)


class InterceptHandler(logging.Handler):
    """표준 logging 레코드를 loguru로 넘깁니다."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno
        logger.opt(depth=6, exception=record.exc_info).log(level, record.getMessage())


def setup_logger(
    log_level: str = "INFO",
    log_file: Optional[Union[str, Path]] = None,
    rotation: str = "10 MB",
    retention: str = "7 days",
    library_level: str = "WARNING"
):
    """
    로거를 설정합니다.

    모든 레코드는 `run` 필드를 가지며, 파이프라인은 반복 실행마다
    `logger.contextualize(run=...)`로 값을 채웁니다.

    Args:
        log_level: 로그 레벨 (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: 로그 파일 경로 (None이면 파일 로깅 비활성화)
        rotation: 로그 파일 회전 크기
        retention: 로그 파일 보관 기간
        library_level: 외부 라이브러리(trimesh 등) 로그의 최소 레벨
    """
    logger.remove()
    logger.configure(extra={"run": "-"})

    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=log_level, colorize=True)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            str(log_path),
            format=FILE_FORMAT,
            level=log_level,
            rotation=rotation,
            retention=retention,
            encoding="utf-8",
        )

    for name in LIBRARY_LOGGERS:
        std = logging.getLogger(name)
        std.handlers = [InterceptHandler()]
        std.setLevel(library_level)
        std.propagate = False

    return logger


@contextmanager
def log_stage(stage: str, level: str = "DEBUG") -> Iterator[None]:
    """
    파이프라인 단계의 소요 시간을 기록합니다.

    Args:
        stage: 단계 이름 (simulate, segment, reconstruct, evaluate 등)
        level: 완료 메시지 레벨
    """
    start = time.perf_counter()
    yield
    logger.log(level, f"{stage} 단계 완료 ({time.perf_counter() - start:.2f} s)")


# 기본 로거 설정
setup_logger()
