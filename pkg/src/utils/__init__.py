"""유틸리티 모듈"""
from .config import ConfigLoader, get_config_loader
from .logger import setup_logger, log_stage
from .errors import (
    QaToolkitError,
    InvalidInputError,
    OutOfRangeError,
    ConfigError,
    DegenerateError,
    DegenerateSignalError,
    DegenerateConfigurationError,
    DegenerateHistogramError,
    DegenerateComponentError,
)

__all__ = [
    "ConfigLoader",
    "get_config_loader",
    "setup_logger",
    "log_stage",
    "QaToolkitError",
    "InvalidInputError",
    "OutOfRangeError",
    "ConfigError",
    "DegenerateError",
    "DegenerateSignalError",
    "DegenerateConfigurationError",
    "DegenerateHistogramError",
    "DegenerateComponentError",
]
