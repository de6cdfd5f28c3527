"""
QA 실험 오케스트레이션 모듈
실험 설정, 단계 실행기, 보고서, 명령줄 진입점을 제공합니다.
"""
from .experiment import ExperimentConfig, load_experiment_config, deep_merge, config_hash
from .report import (
    QaReport,
    build_report,
    export,
    write_sweep_csv,
    sweep_frame,
    mean_std,
    SHAPE_CSV_COLUMNS,
    SPEED_CSV_COLUMNS,
    ANGLE_CSV_COLUMNS,
)
from .runner import (
    QaRunner,
    run_baseline,
    sweep_speed,
    sweep_angle,
    run_single,
    run_seed,
    simulate_stage,
    segment_stage,
    reconstruct_stage,
    evaluate_stage,
    match_components,
)

__all__ = [
    "ExperimentConfig",
    "load_experiment_config",
    "deep_merge",
    "config_hash",
    "QaReport",
    "build_report",
    "export",
    "write_sweep_csv",
    "sweep_frame",
    "mean_std",
    "SHAPE_CSV_COLUMNS",
    "SPEED_CSV_COLUMNS",
    "ANGLE_CSV_COLUMNS",
    "QaRunner",
    "run_baseline",
    "sweep_speed",
    "sweep_angle",
    "run_single",
    "run_seed",
    "simulate_stage",
    "segment_stage",
    "reconstruct_stage",
    "evaluate_stage",
    "match_components",
]
