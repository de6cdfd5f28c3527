"""
QA 실험 실행 모듈
시뮬레이션 → 분할 → 재구성 → 성분 라벨링 → 정합 → 지표/피팅 단계를 실행하고,
반복과 스윕 지점을 프로세스 풀에서 병렬로 처리합니다.
"""
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import psutil
from loguru import logger
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from .experiment import ExperimentConfig, sweep_values
from .report import QaReport, build_report, sweep_frame
from ..metrics.descriptors import shape_descriptors
from ..metrics.overlap import dsc_3d
from ..metrics.surface import mesh_hausdorff, surface_error_map
from ..phantom.analytic import analytic_descriptors
from ..phantom.mesh import export_mesh, ground_truth_mesh
from ..phantom.scene import PhantomScene, voxelize_shape
from ..phantom.shapes import ShapeSpec
from ..reconstruction.components import LabeledComponents, extract_surface, threshold_and_label
from ..reconstruction.grid import VoxelGrid, auto_grid, reconstruct
from ..reconstruction.volume_io import save_volume
from ..scansim.calibration import fiducial_registration_report, latency_for_compensation
from ..scansim.simulator import ScanResult, TrackedFrame, simulate_scan
from ..segmentation.scoring import dsc_2d
from ..segmentation.segmenter import segment_frame
from ..shapefit.registry import fit_shape
from ..transforms.registration import icp_register
from ..transforms.rigid import RigidTransform
from ..utils.errors import DegenerateError, QaToolkitError
from ..utils.logger import log_stage

ICP_SOURCE_POINTS = 3000


def run_seed(seed: int, repeat: int) -> int:
    """(기본 시드, 반복 번호)에서 반복별 32비트 시드를 유도합니다."""
    return int(np.random.SeedSequence([int(seed), int(repeat)]).generate_state(1)[0])


def resolve_workers(workers: int, n_tasks: int) -> int:
    """0이면 물리 코어 수, 작업 수를 넘지 않음"""
    if n_tasks <= 1 or workers == 1:
        return 1
    if workers <= 0:
        workers = psutil.cpu_count(logical=False) or 1
    return max(1, min(int(workers), n_tasks))


def _subsample(points: np.ndarray, limit: int, seed: int) -> np.ndarray:
    if len(points) <= limit:
        return points
    index = np.sort(np.random.default_rng(seed).choice(len(points), size=limit, replace=False))
    return points[index]


def _finite_metrics(metrics: Dict[str, Any]) -> Tuple[Dict[str, Any], List[str]]:
    clean, dropped = {}, []
    for key, value in metrics.items():
        if isinstance(value, float) and not np.isfinite(value):
            dropped.append(key)
        else:
            clean[key] = value
    return clean, dropped


# ----------------------------------------------------------------------------
# 단계 함수 (CLI 하위 명령과 전체 실행이 공유)
# ----------------------------------------------------------------------------

def simulate_stage(config: ExperimentConfig, seed: int) -> Tuple[PhantomScene, ScanResult]:
    """장면과 주사 계획을 만들고 추적 프레임을 시뮬레이션합니다."""
    scene = config.load_scene()
    plan = config.trajectory_plan(scene)
    compensation = latency_for_compensation(config.latency_compensation, config.tracker, seed)
    scan = simulate_scan(
        scene,
        plan,
        config.frame,
        config.tracker,
        seed,
        latency_compensation=compensation,
        max_pose_gap_s=config.max_pose_gap_s,
    )
    return scene, scan


def segment_stage(frames: Sequence[TrackedFrame], config: ExperimentConfig) -> Tuple[Dict[int, np.ndarray], Optional[float]]:
    """
    프레임별 마스크와 정답 마스크 대비 평균 DSC-2D

    Returns:
        ({프레임 인덱스: 마스크}, 평균 DSC-2D 또는 정답 마스크 사용 시 None)
    """
    if config.use_ground_truth_masks:
        return {f.index: f.gt_mask for f in frames}, None
    masks, scores = {}, []
    for frame in frames:
        result = segment_frame(frame.image, config.segmentation)
        masks[frame.index] = result.mask
        scores.append(dsc_2d(result.mask, frame.gt_mask))
    return masks, (float(np.mean(scores)) if scores else None)


def reconstruct_stage(frames: Sequence[TrackedFrame], masks: Dict[int, np.ndarray], config: ExperimentConfig) -> VoxelGrid:
    """보고 포즈가 있는 프레임의 마스크로 볼륨을 재구성합니다."""
    usable = [(masks[f.index], f.reported_pose, f.pixel_spacing) for f in frames if f.valid]
    settings = config.reconstruction
    spec = auto_grid(usable, spacing=settings.spacing_mm, padding=settings.padding_mm)
    return reconstruct(usable, spec)


def match_components(pred: Sequence[np.ndarray], truth: Sequence[np.ndarray], max_distance: float) -> List[Tuple[int, int]]:
    """
    무게중심 최근접 일대일 대응 (헝가리안 할당, max_distance 이하만)

    Returns:
        [(예측 인덱스, 참 인덱스)]
    """
    if len(pred) == 0 or len(truth) == 0:
        return []
    cost = cdist(np.asarray(pred), np.asarray(truth))
    rows, cols = linear_sum_assignment(cost)
    return [(int(r), int(c)) for r, c in zip(rows, cols) if cost[r, c] <= max_distance]


def evaluate_shape(
    component: np.ndarray,
    components: LabeledComponents,
    label: str,
    shape: ShapeSpec,
    init: RigidTransform,
    config: ExperimentConfig,
    seed: int,
    artifact_dir: Optional[Path] = None,
) -> Tuple[Dict[str, Any], Optional[Dict[str, Any]], List[Dict[str, Any]]]:
    """
    재구성 성분 하나를 참 형상과 비교합니다.

    Args:
        component: 전체 격자 크기의 불리언 성분
        components: 라벨링 결과 (격자 기하)
        label: 형상 라벨
        shape: 참 형상 (팬텀 좌표)
        init: 재구성 좌표 → 팬텀 좌표 초기 변환
        config: 실험 설정
        seed: 표본화 시드
        artifact_dir: 메시/오차 지도 출력 디렉토리

    Returns:
        (지표 딕셔너리, 피팅 결과 딕셔너리, 플래그 목록)
    """
    evaluation = config.evaluation
    spacing = components.spec.spacing
    flags: List[Dict[str, Any]] = []

    indices = np.argwhere(component)
    lo = components.spec.index_to_world(indices.min(axis=0))
    hi = components.spec.index_to_world(indices.max(axis=0))
    coarse_spec, coarse = components.spec.crop(lo, hi, margin=3 * spacing)
    mesh = extract_surface(component[coarse], coarse_spec)

    ref_mesh = ground_truth_mesh(shape)
    source = _subsample(np.asarray(mesh.vertices), ICP_SOURCE_POINTS, seed)
    icp = icp_register(
        source,
        ref_mesh,
        init=init,
        max_iterations=evaluation.icp_max_iterations,
        tolerance=evaluation.icp_tolerance_mm,
        sample_spacing=evaluation.sample_spacing_mm,
        seed=seed,
    )
    if not icp.converged:
        flags.append({"code": "icp_unconverged", "shape": label})
    transform = icp.transform

    # 성분과 정합된 참 형상을 모두 덮는 부분 격자
    ref_lo, ref_hi = shape.bounds()
    corners = np.array([[x, y, z] for x in (ref_lo[0], ref_hi[0]) for y in (ref_lo[1], ref_hi[1]) for z in (ref_lo[2], ref_hi[2])])
    mapped = transform.inverse().apply(corners)
    sub_spec, sub = components.spec.crop(
        np.minimum(lo, mapped.min(axis=0)), np.maximum(hi, mapped.max(axis=0)), margin=3 * spacing
    )
    pred_crop = component[sub]
    truth_crop = voxelize_shape(shape, sub_spec, transform=transform)

    aligned = mesh.copy()
    aligned.apply_transform(transform.homogeneous())
    hd_max, hd95 = mesh_hausdorff(aligned, ref_mesh, evaluation.sample_spacing_mm, seed)
    error_map = surface_error_map(mesh, ref_mesh, transform, evaluation.sample_spacing_mm, seed)

    smooth = extract_surface(pred_crop, sub_spec, smoothing_sigma=config.reconstruction.smoothing_sigma)
    measured = shape_descriptors(pred_crop, sub_spec, smooth)
    truth = analytic_descriptors(shape)
    if measured.roundness_clipped:
        flags.append({"code": "roundness_clipped", "shape": label})

    metrics: Dict[str, Any] = {
        "dsc_3d": dsc_3d(pred_crop, truth_crop),
        "hd_mm": hd_max,
        "hd95_mm": hd95,
        "volume_mm3": measured.volume,
        "volume_error_pct": 100.0 * (measured.volume - truth.volume) / truth.volume,
        "surface_area_mm2": measured.surface_area,
        "surface_area_error_pct": 100.0 * (measured.surface_area - truth.surface_area) / truth.surface_area,
        "roundness": measured.roundness,
        "flatness": measured.flatness,
        "elongation": measured.elongation,
        "feret_max_mm": measured.feret_max,
        "icp_rms_mm": icp.rms,
        "surface_error_mean_mm": error_map.mean,
        "surface_error_rms_mm": error_map.rms,
        "surface_error_max_mm": error_map.max,
    }

    fit_record = None
    try:
        points = _subsample(np.asarray(aligned.vertices), evaluation.fit_max_points, seed)
        fit = fit_shape(shape.kind, points)
        fit_record = fit.to_dict()
        metrics["fit_rms_mm"] = fit.rms_residual
        for key, value in fit.parameter_errors(shape).items():
            metrics[f"fit_error_{key}"] = value
        if not fit.converged:
            flags.append({"code": "fit_unconverged", "shape": label})
    except DegenerateError as e:
        logger.warning(f"{label}: 형상 피팅 실패 ({e})")
        flags.append({"code": "fit_failed", "shape": label, "detail": str(e)})

    metrics = {key: float(value) for key, value in metrics.items()}
    metrics, dropped = _finite_metrics(metrics)
    for key in dropped:
        flags.append({"code": "non_finite_metric", "shape": label, "metric": key})

    if artifact_dir is not None:
        export_mesh(aligned, artifact_dir / f"{label}_reconstructed.stl")
        export_mesh(ref_mesh, artifact_dir / f"{label}_reference.stl")
        if fit_record is not None:
            export_mesh(ground_truth_mesh(fit.shape), artifact_dir / f"{label}_fitted.stl")
        error_map.export_ply(artifact_dir / f"{label}_surface_error.ply")

    logger.info(f"{label}: DSC-3D={metrics['dsc_3d']:.4f}, HD95={metrics['hd95_mm']:.3f} mm")
    return metrics, fit_record, flags


def evaluate_stage(
    grid: VoxelGrid,
    scene: PhantomScene,
    config: ExperimentConfig,
    seed: int,
    artifact_dir: Optional[Path] = None,
) -> Dict[str, Any]:
    """
    재구성 볼륨을 라벨링하고 참 형상과 대응시켜 형상별 지표를 계산합니다.

    기준점 정합(재구성 좌표 → 팬텀 좌표)으로 전역 사전 정렬한 뒤 무게중심
    최근접 대응을 찾고, 형상별 ICP로 정밀 정합합니다.

    Returns:
        {"shapes", "fits", "flags", "system"} 딕셔너리
    """
    recon = config.reconstruction
    evaluation = config.evaluation
    components = threshold_and_label(grid, recon.iso, recon.min_voxels, recon.link_radius)

    fiducial = fiducial_registration_report(scene, config.tracker, [seed, 1], evaluation.fiducial_inset_mm)
    global_transform = RigidTransform.from_dict(fiducial["transform"])

    flags: List[Dict[str, Any]] = []
    if components.num_components != evaluation.expected_components:
        logger.warning(
            f"성분 수 {components.num_components}개 (기대값 {evaluation.expected_components}개), 대응된 형상만 평가합니다"
        )
        flags.append({
            "code": "component_count",
            "found": components.num_components,
            "expected": evaluation.expected_components,
        })

    pred_centroids = [global_transform.apply(c) for c in components.centroids()]
    truth_centroids = [inc.shape.centroid for inc in scene.inclusions]
    pairs = match_components(pred_centroids, truth_centroids, evaluation.match_distance_mm)
    matched_truth = {t for _, t in pairs}
    matched_pred = {p for p, _ in pairs}
    for k, inc in enumerate(scene.inclusions):
        if k not in matched_truth:
            flags.append({"code": "missing_shape", "shape": inc.label})
    for p in range(components.num_components):
        if p not in matched_pred:
            flags.append({"code": "unmatched_component", "component": p + 1, "voxels": components.counts[p]})

    if artifact_dir is not None:
        artifact_dir.mkdir(parents=True, exist_ok=True)
        save_volume(grid, artifact_dir / "volume.mhd")

    shapes: Dict[str, Dict[str, Any]] = {}
    fits: Dict[str, Any] = {}
    for p, t in sorted(pairs, key=lambda pair: pair[1]):
        inc = scene.inclusions[t]
        try:
            metrics, fit_record, shape_flags = evaluate_shape(
                components.component(p + 1), components, inc.label, inc.shape,
                global_transform, config, seed, artifact_dir,
            )
        except QaToolkitError as e:
            logger.warning(f"{inc.label}: 평가 실패 ({e})")
            flags.append({"code": "evaluation_failed", "shape": inc.label, "detail": str(e)})
            continue
        shapes[inc.label] = metrics
        if fit_record is not None:
            fits[inc.label] = fit_record
        flags.extend(shape_flags)

    system = {
        "components": components.num_components,
        "fre_mm": fiducial["fre_mm"],
        "fiducials": fiducial["fiducials"],
        "out_of_grid_pixels": int(grid.out_of_grid),
    }
    return {"shapes": shapes, "fits": fits, "flags": flags, "system": system}


def run_single(document: Dict[str, Any], repeat: int, artifact_dir: Optional[str] = None) -> Dict[str, Any]:
    """
    반복 하나를 처음부터 끝까지 실행합니다 (프로세스 풀 작업 단위).

    Args:
        document: 병합이 끝난 실험 문서
        repeat: 반복 번호
        artifact_dir: 이 반복 전용 출력 디렉토리

    Returns:
        반복 결과 딕셔너리
    """
    config = ExperimentConfig.from_dict(document, merge_defaults=False)
    seed = run_seed(config.seed, repeat)
    with logger.contextualize(run=f"r{repeat}"):
        with log_stage("simulate"):
            scene, scan = simulate_stage(config, seed)
        valid = scan.valid_frames
        with log_stage("segment"):
            masks, seg_dsc = segment_stage(valid, config)
        with log_stage("reconstruct"):
            grid = reconstruct_stage(valid, masks, config)
        out = Path(artifact_dir) if artifact_dir else None
        with log_stage("evaluate", level="INFO"):
            result = evaluate_stage(grid, scene, config, seed, out)

    result["flags"] = [{"run": repeat, **flag} for flag in result["flags"]]
    if scan.dropout_warning:
        result["flags"].append({"run": repeat, "code": "dropout_warning"})
    result["system"].update({
        "frames": len(scan.frames),
        "valid_frames": len(valid),
        "sweeps": len(scan.plan.sweep_offsets),
        "multi_sweep": bool(scan.plan.multi_sweep),
        "latency_compensation_s": float(scan.latency_compensation),
        "dropout_warning": bool(scan.dropout_warning),
    })
    if seg_dsc is not None:
        result["system"]["seg_dsc_2d_mean"] = seg_dsc
    result["repeat"] = int(repeat)
    result["seed"] = seed
    return result


def run_tasks(tasks: Sequence[Tuple[Dict[str, Any], int, Optional[str]]], workers: int) -> List[Dict[str, Any]]:
    """작업들을 실행하고 작업 순서대로 결과를 모읍니다."""
    count = resolve_workers(workers, len(tasks))
    if count == 1:
        return [run_single(*task) for task in tasks]
    logger.info(f"작업 {len(tasks)}개를 프로세스 {count}개로 실행합니다")
    with ProcessPoolExecutor(max_workers=count) as pool:
        futures = [pool.submit(run_single, *task) for task in tasks]
        return [future.result() for future in futures]


class QaRunner:
    """기준 주사와 속도/각도 스윕을 실행하는 QA 실행기"""

    def __init__(self, config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None):
        """
        QaRunner 초기화

        Args:
            config: 실험 설정
            out_dir: 결과 디렉토리 (None이면 파일을 쓰지 않음)
        """
        self.config = config
        self.out_dir = Path(out_dir) if out_dir is not None else None

    def _artifact_dir(self, *parts: str) -> Optional[str]:
        if self.out_dir is None or not self.config.evaluation.export_artifacts:
            return None
        return str(self.out_dir.joinpath(*parts))

    def _reports(self, configs: Sequence[ExperimentConfig], subdirs: Sequence[Optional[Tuple[str, ...]]]) -> List[QaReport]:
        tasks = []
        for config, subdir in zip(configs, subdirs):
            for repeat in range(config.repeats):
                target = None if subdir is None else self._artifact_dir(*subdir, "runs", f"repeat_{repeat:03d}")
                tasks.append((config.document, repeat, target))
        results = run_tasks(tasks, self.config.workers)

        reports, start = [], 0
        for config in configs:
            reports.append(build_report(config, results[start:start + config.repeats]))
            start += config.repeats
        return reports

    def run_baseline(self) -> QaReport:
        """기준 설정으로 반복 실행한 QaReport"""
        logger.info(f"기준 실행 시작: 반복 {self.config.repeats}회, 추적기 {self.config.tracker.kind}")
        return self._reports([self.config], [()])[0]

    def sweep_speed(self, speeds: Optional[Sequence[float]] = None):
        """
        주사 속도별 QaReport와 속도-DSC 표

        Returns:
            (보고서 목록, pandas DataFrame)
        """
        speeds = sweep_values(speeds, self.config.sweep.speeds_mm_s)
        configs = [self.config.with_overrides({"trajectory": {"speed": s}}) for s in speeds]
        reports = self._reports(configs, [None] * len(configs))
        rows = [{"speed_mm_s": s, **r.dsc_summary()} for s, r in zip(speeds, reports)]
        return reports, sweep_frame(rows, "speed")

    def sweep_angle(
        self,
        axial_angles: Optional[Sequence[float]] = None,
        lateral_tilts: Optional[Sequence[float]] = None,
    ):
        """
        축 방향 각도 × 측방 기울기별 QaReport와 각도-DSC 표

        Returns:
            (보고서 목록, pandas DataFrame)
        """
        axial = sweep_values(axial_angles, self.config.sweep.axial_angles_deg)
        lateral = sweep_values(lateral_tilts, self.config.sweep.lateral_tilts_deg)
        points = [(a, b) for a in axial for b in lateral]
        configs = [
            self.config.with_overrides({"trajectory": {"axial_angle_deg": a, "lateral_tilt_deg": b}})
            for a, b in points
        ]
        reports = self._reports(configs, [None] * len(configs))
        rows = []
        for (a, b), report in zip(points, reports):
            system = report.system_summary()
            rows.append({
                "axial_angle_deg": a,
                "lateral_tilt_deg": b,
                "multi_sweep": bool(system.get("multi_sweep", False)),
                "sweeps": int(system.get("sweeps", 1)),
                **report.dsc_summary(),
            })
        return reports, sweep_frame(rows, "angle")


def run_baseline(config: ExperimentConfig, out_dir: Optional[Union[str, Path]] = None) -> QaReport:
    return QaRunner(config, out_dir).run_baseline()


def sweep_speed(config: ExperimentConfig, speeds: Optional[Sequence[float]] = None):
    return QaRunner(config).sweep_speed(speeds)


def sweep_angle(config: ExperimentConfig, axial_angles=None, lateral_tilts=None):
    return QaRunner(config).sweep_angle(axial_angles, lateral_tilts)
