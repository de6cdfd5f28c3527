"""
실험 설정 모듈
YAML 기본값 위에 사용자 문서를 병합해 검증된 ExperimentConfig를 만들고 안정 해시를 계산합니다.
"""
import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..phantom.scene import PhantomScene, default_scene, load_scene
from ..scansim.imaging import FrameSpec
from ..scansim.tracker import TrackerModel, tracker_from_dict
from ..scansim.trajectory import TrajectoryPlan, coverage_plan
from ..segmentation.segmenter import SegConfig
from ..utils.config import ConfigLoader, get_config_loader
from ..utils.errors import ConfigError, InvalidInputError

COMPENSATION_MODES = ("none", "known", "calibrated")
DOCUMENT_KEYS = frozenset({
    "scene", "seed", "repeats", "workers", "frame", "trajectory", "tracker", "latency_compensation",
    "max_pose_gap_s", "segmentation", "use_ground_truth_masks", "reconstruction", "evaluation", "sweep",
})


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """override의 값을 base 위에 재귀적으로 덮어쓴 새 딕셔너리"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def canonical_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(document: Dict[str, Any]) -> str:
    """정렬 키 + 압축 구분자 JSON의 SHA-256"""
    return hashlib.sha256(canonical_json(document).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class TrajectorySettings:
    speed: float = 5.0
    axial_angle_deg: float = 0.0
    lateral_tilt_deg: float = 0.0
    margin_mm: float = 5.0
    sweep_overlap: float = 0.2
    multi_sweep_threshold_deg: float = 30.0
    sweep_gap_s: float = 1.0


@dataclass(frozen=True)
class ReconstructionSettings:
    spacing_mm: float = 0.5
    padding_mm: float = 5.0
    iso: int = 128
    min_voxels: int = 100
    link_radius: int = 1
    smoothing_sigma: float = 1.0


@dataclass(frozen=True)
class EvaluationSettings:
    sample_spacing_mm: float = 0.25
    icp_max_iterations: int = 200
    icp_tolerance_mm: float = 1e-6
    fit_max_points: int = 4000
    match_distance_mm: float = 20.0
    expected_components: int = 4
    fiducial_inset_mm: float = 5.0
    export_artifacts: bool = True


@dataclass(frozen=True)
class SweepSettings:
    speeds_mm_s: tuple = (2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5)
    axial_angles_deg: tuple = (0.0, 30.0, 45.0, 90.0)
    lateral_tilts_deg: tuple = (0.0,)


def _settings(cls, data: Optional[Dict[str, Any]], section: str):
    data = dict(data or {})
    unknown = set(data) - set(cls.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"{section}: 알 수 없는 키 {sorted(unknown)}")
    for key, value in data.items():
        if isinstance(value, list):
            data[key] = tuple(value)
    return cls(**data)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    검증된 실험 설정

    document는 기본값이 병합된 원 문서이며 해시와 파생 설정(스윕 지점)의 기준입니다.
    """

    document: Dict[str, Any]
    scene_source: str
    seed: int
    repeats: int
    workers: int
    frame: FrameSpec
    trajectory: TrajectorySettings
    tracker: TrackerModel
    latency_compensation: str
    max_pose_gap_s: Optional[float]
    segmentation: SegConfig
    use_ground_truth_masks: bool
    reconstruction: ReconstructionSettings
    evaluation: EvaluationSettings
    sweep: SweepSettings

    @classmethod
    def from_dict(
        cls,
        data: Optional[Dict[str, Any]] = None,
        loader: Optional[ConfigLoader] = None,
        merge_defaults: bool = True,
    ) -> "ExperimentConfig":
        """
        사용자 문서를 기본값 위에 병합해 설정을 만듭니다.

        Args:
            data: 사용자 문서 (최상위 "experiment" 키는 있어도 되고 없어도 됨)
            loader: 설정 로더 (None이면 전역 로더)
            merge_defaults: False면 data를 완성된 문서로 취급

        Returns:
            ExperimentConfig
        """
        data = dict(data or {})
        if "experiment" in data and isinstance(data["experiment"], dict):
            data = data["experiment"]
        if merge_defaults:
            defaults = (loader or get_config_loader()).get_experiment_config().get("experiment", {})
            document = deep_merge(defaults, data)
        else:
            document = copy.deepcopy(data)

        try:
            return cls._build(document)
        except ConfigError:
            raise
        except (InvalidInputError, TypeError, KeyError, ValueError) as e:
            raise ConfigError(f"실험 설정이 잘못되었습니다: {e}") from e

    @classmethod
    def _build(cls, document: Dict[str, Any]) -> "ExperimentConfig":
        unknown = set(document) - DOCUMENT_KEYS
        if unknown:
            raise ConfigError(f"알 수 없는 설정 키: {sorted(unknown)}")
        repeats = int(document.get("repeats", 3))
        if repeats < 1:
            raise ConfigError(f"repeats는 1 이상이어야 합니다: {repeats}")
        workers = int(document.get("workers", 0))
        if workers < 0:
            raise ConfigError(f"workers는 0 이상이어야 합니다: {workers}")
        mode = str(document.get("latency_compensation", "none"))
        if mode not in COMPENSATION_MODES:
            raise ConfigError(f"지연 보정 모드는 {COMPENSATION_MODES} 중 하나여야 합니다: {mode}")
        gap = document.get("max_pose_gap_s")
        if gap is not None and float(gap) <= 0:
            raise ConfigError("max_pose_gap_s는 양수여야 합니다")

        reconstruction = _settings(ReconstructionSettings, document.get("reconstruction"), "reconstruction")
        if reconstruction.spacing_mm <= 0 or reconstruction.min_voxels < 0 or reconstruction.link_radius < 0:
            raise ConfigError("재구성 설정 값이 범위를 벗어났습니다")
        trajectory = _settings(TrajectorySettings, document.get("trajectory"), "trajectory")
        if trajectory.speed <= 0:
            raise ConfigError(f"주사 속도는 양수여야 합니다: {trajectory.speed}")

        return cls(
            document=document,
            scene_source=str(document.get("scene", "default")),
            seed=int(document.get("seed", 0)),
            repeats=repeats,
            workers=workers,
            frame=FrameSpec(**(document.get("frame") or {})),
            trajectory=trajectory,
            tracker=tracker_from_dict(document.get("tracker") or {}),
            latency_compensation=mode,
            max_pose_gap_s=None if gap is None else float(gap),
            segmentation=SegConfig.from_dict(document.get("segmentation")),
            use_ground_truth_masks=bool(document.get("use_ground_truth_masks", False)),
            reconstruction=reconstruction,
            evaluation=_settings(EvaluationSettings, document.get("evaluation"), "evaluation"),
            sweep=_settings(SweepSettings, document.get("sweep"), "sweep"),
        )

    @property
    def config_hash(self) -> str:
        return config_hash(self.document)

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.document)

    def with_overrides(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        """부분 문서를 덮어쓴 새 설정 (스윕 지점, CLI 플래그)"""
        return ExperimentConfig.from_dict(deep_merge(self.document, overrides), merge_defaults=False)

    def load_scene(self) -> PhantomScene:
        if self.scene_source == "default":
            return default_scene()
        return load_scene(self.scene_source)

    def trajectory_plan(self, scene: PhantomScene) -> TrajectoryPlan:
        t = self.trajectory
        return coverage_plan(
            scene,
            self.frame,
            t.speed,
            axial_angle_deg=t.axial_angle_deg,
            lateral_tilt_deg=t.lateral_tilt_deg,
            margin=t.margin_mm,
            sweep_overlap=t.sweep_overlap,
            multi_sweep_threshold_deg=t.multi_sweep_threshold_deg,
            sweep_gap_s=t.sweep_gap_s,
        )


def load_experiment_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    loader: Optional[ConfigLoader] = None,
) -> ExperimentConfig:
    """
    설정 문서 파일(없으면 기본값)과 덮어쓰기를 병합해 로드합니다.

    Args:
        path: 사용자 .yaml/.json 문서 경로
        overrides: 마지막에 덮어쓸 부분 문서 (CLI 플래그)
        loader: 설정 로더

    Returns:
        ExperimentConfig
    """
    document: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"설정 문서를 찾을 수 없습니다: {path}")
        document = ConfigLoader.load_document(path)
        if "experiment" in document and isinstance(document["experiment"], dict):
            document = document["experiment"]
    if overrides:
        document = deep_merge(document, overrides)
    return ExperimentConfig.from_dict(document, loader=loader)


def sweep_values(values: Optional[List[float]], default: tuple) -> List[float]:
    values = list(default if values is None else values)
    if not values:
        raise ConfigError("스윕 값 목록이 비어 있습니다")
    return [float(v) for v in values]
