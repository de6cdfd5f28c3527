"""
QA 보고서 모듈
반복 결과를 형상별 평균 ± 표준편차로 집계하고 JSON/CSV로 내보냅니다.
"""
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from .. import __version__
from ..utils.errors import InvalidInputError

SHAPE_METRICS = (
    "dsc_3d",
    "hd_mm",
    "hd95_mm",
    "volume_error_pct",
    "surface_area_error_pct",
    "roundness",
    "flatness",
    "elongation",
    "feret_max_mm",
    "surface_error_mean_mm",
    "surface_error_rms_mm",
    "surface_error_max_mm",
    "fit_rms_mm",
    "fit_error_center_mm",
    "fit_error_radius_mm",
    "fit_error_minor_radius_mm",
    "fit_error_major_radius_mm",
    "fit_error_height_mm",
    "fit_error_edge_length_mm",
)

# 형상별 CSV 스키마
SHAPE_CSV_COLUMNS = ["shape", "n"] + [f"{m}_{s}" for m in SHAPE_METRICS for s in ("mean", "std")]
SPEED_CSV_COLUMNS = ["speed_mm_s", "mean_dsc_3d", "std_dsc_3d"]
ANGLE_CSV_COLUMNS = ["axial_angle_deg", "lateral_tilt_deg", "multi_sweep", "sweeps", "mean_dsc_3d", "std_dsc_3d"]

REPORT_METADATA = {
    "roundness_convention": "sphericity (36*pi*V^2)^(1/3)/A",
    "elongation_flatness_convention": "sqrt(l1/l2), sqrt(l2/l3) of voxel covariance eigenvalues",
    "prism_length_convention": "L = cross-section edge length of the equilateral triangle",
    "feret_convention": "maximum caliper diameter",
    "std_convention": "sample standard deviation (ddof=1) for n >= 2, 0 for n = 1",
}


def to_builtin(value: Any) -> Any:
    """numpy 값과 튜플을 JSON 직렬화 가능한 기본 타입으로 변환합니다."""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def mean_std(values: Sequence[float]) -> Dict[str, float]:
    """평균과 표준편차 (n ≥ 2면 ddof=1, n = 1이면 0)"""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return {"mean": 0.0, "std": 0.0, "n": 0}
    std = float(np.std(values, ddof=1)) if values.size >= 2 else 0.0
    return {"mean": float(np.mean(values)), "std": std, "n": int(values.size)}


def _aggregate_metrics(records: Iterable[Dict[str, Any]]) -> Dict[str, Dict[str, float]]:
    collected: Dict[str, List[float]] = {}
    for record in records:
        for key, value in record.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                continue
            collected.setdefault(key, []).append(float(value))
    return {key: mean_std(values) for key, values in sorted(collected.items())}


@dataclass
class QaReport:
    """
    QA 보고서

    Attributes:
        config: 병합된 실험 문서
        config_hash: 문서 SHA-256
        seed: 기본 시드
        repeats: 반복 횟수
        runs: 반복별 결과
        aggregates: 형상별 {지표: {mean, std, n}}
        system: 시스템 지표 집계 (FRE, 유효 프레임 수 등)
        flags: 누락/병합 형상, 미수렴 등 플래그
        version: 툴킷 버전
        created_at: 생성 시각 (UTC ISO 8601)
        metadata: 지표 정의 규약
    """

    config: Dict[str, Any]
    config_hash: str
    seed: int
    repeats: int
    runs: List[Dict[str, Any]]
    aggregates: Dict[str, Dict[str, Dict[str, float]]]
    system: Dict[str, Dict[str, float]]
    flags: List[Dict[str, Any]] = field(default_factory=list)
    version: str = __version__
    created_at: str = ""
    metadata: Dict[str, str] = field(default_factory=lambda: dict(REPORT_METADATA))

    @property
    def shapes(self) -> List[str]:
        return list(self.aggregates)

    def run_mean_dsc(self) -> List[float]:
        """반복별 형상 평균 DSC-3D"""
        means = []
        for run in self.runs:
            values = [m["dsc_3d"] for m in run.get("shapes", {}).values() if "dsc_3d" in m]
            if values:
                means.append(float(np.mean(values)))
        return means

    def dsc_summary(self) -> Dict[str, float]:
        """{"mean_dsc_3d", "std_dsc_3d"} (반복 간 표준편차)"""
        stats = mean_std(self.run_mean_dsc())
        return {"mean_dsc_3d": stats["mean"], "std_dsc_3d": stats["std"]}

    def system_summary(self) -> Dict[str, Any]:
        """첫 반복의 시스템 값 위에 수치 평균을 덮어쓴 요약"""
        summary: Dict[str, Any] = dict(self.runs[0].get("system", {})) if self.runs else {}
        for key, stats in self.system.items():
            if not isinstance(summary.get(key), bool):
                summary[key] = stats["mean"]
        return summary

    def metric(self, shape: str, name: str) -> Dict[str, float]:
        return self.aggregates[shape][name]

    def to_dict(self, include_timestamp: bool = True) -> Dict[str, Any]:
        data = {
            "config": self.config,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "repeats": self.repeats,
            "runs": self.runs,
            "aggregates": self.aggregates,
            "system": self.system,
            "flags": self.flags,
            "version": self.version,
            "metadata": self.metadata,
        }
        if include_timestamp:
            data["created_at"] = self.created_at
        return to_builtin(data)

    def to_json(self, include_timestamp: bool = True) -> str:
        """정렬 키, 들여쓰기 2의 결정적 JSON"""
        return json.dumps(self.to_dict(include_timestamp), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "QaReport":
        return cls(
            config=data["config"],
            config_hash=data["config_hash"],
            seed=int(data["seed"]),
            repeats=int(data["repeats"]),
            runs=data["runs"],
            aggregates=data["aggregates"],
            system=data["system"],
            flags=data.get("flags", []),
            version=data.get("version", __version__),
            created_at=data.get("created_at", ""),
            metadata=data.get("metadata", dict(REPORT_METADATA)),
        )

    @classmethod
    def from_json(cls, text: str) -> "QaReport":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "QaReport":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def shape_frame(self) -> pd.DataFrame:
        """형상별 평균/표준편차 표 (SHAPE_CSV_COLUMNS 순서)"""
        rows = []
        for shape, metrics in self.aggregates.items():
            row: Dict[str, Any] = {"shape": shape, "n": metrics.get("dsc_3d", {}).get("n", 0)}
            for name in SHAPE_METRICS:
                stats = metrics.get(name)
                row[f"{name}_mean"] = stats["mean"] if stats else np.nan
                row[f"{name}_std"] = stats["std"] if stats else np.nan
            rows.append(row)
        return pd.DataFrame(rows, columns=SHAPE_CSV_COLUMNS)


def build_report(config, runs: Sequence[Dict[str, Any]], created_at: Optional[str] = None) -> QaReport:
    """
    반복 결과를 집계해 QaReport를 만듭니다.

    Args:
        config: ExperimentConfig
        runs: run_single 결과 목록 (반복 순서)
        created_at: 생성 시각 (None이면 현재 UTC)

    Returns:
        QaReport
    """
    runs = [to_builtin(run) for run in sorted(runs, key=lambda r: r["repeat"])]
    labels: List[str] = []
    for run in runs:
        for label in run.get("shapes", {}):
            if label not in labels:
                labels.append(label)

    aggregates = {
        label: _aggregate_metrics(run["shapes"][label] for run in runs if label in run.get("shapes", {}))
        for label in labels
    }
    system = _aggregate_metrics(run.get("system", {}) for run in runs)
    flags = [flag for run in runs for flag in run.get("flags", [])]
    for label, metrics in aggregates.items():
        n = metrics.get("dsc_3d", {}).get("n", 0)
        if n != len(runs):
            flags.append({"code": "incomplete_aggregate", "shape": label, "n": n, "repeats": len(runs)})

    report = QaReport(
        config=to_builtin(config.to_dict()),
        config_hash=config.config_hash,
        seed=config.seed,
        repeats=len(runs),
        runs=runs,
        aggregates=aggregates,
        system=system,
        flags=flags,
        created_at=created_at or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    )
    summary = report.dsc_summary()
    logger.info(
        f"보고서 집계: 형상 {len(labels)}개, 반복 {len(runs)}회, "
        f"평균 DSC-3D {summary['mean_dsc_3d']:.4f} ± {summary['std_dsc_3d']:.4f}"
    )
    return report


def sweep_frame(rows: Sequence[Dict[str, Any]], kind: str) -> pd.DataFrame:
    """스윕 결과 표 ("speed" 또는 "angle" 스키마)"""
    columns = SPEED_CSV_COLUMNS if kind == "speed" else ANGLE_CSV_COLUMNS
    return pd.DataFrame(list(rows), columns=columns)


def export(report: QaReport, out_dir: Union[str, Path], formats: Sequence[str] = ("json", "csv")) -> List[Path]:
    """
    보고서를 report.json / shapes.csv 로 저장합니다.

    Args:
        report: QA 보고서
        out_dir: 출력 디렉토리
        formats: "json", "csv" 중 선택

    Returns:
        저장된 파일 경로 목록
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        if fmt == "json":
            path = out_dir / "report.json"
            path.write_text(report.to_json(), encoding="utf-8")
        elif fmt == "csv":
            path = out_dir / "shapes.csv"
            report.shape_frame().to_csv(path, index=False)
        else:
            raise InvalidInputError(f"지원하지 않는 출력 형식: {fmt}")
        written.append(path)
    logger.info(f"보고서 저장: {', '.join(str(p) for p in written)}")
    return written


def write_sweep_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path
