"""
명령줄 진입점
simulate / segment / reconstruct / evaluate / baseline / sweep-speed / sweep-angle /
export / calibrate 하위 명령을 제공합니다.

종료 코드: 0 성공, 2 잘못된 설정/입력, 3 QA 게이트 실패
"""
import argparse
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from loguru import logger

from .experiment import ExperimentConfig, load_experiment_config
from .report import QaReport, build_report, export, write_sweep_csv
from .runner import (
    QaRunner,
    evaluate_stage,
    reconstruct_stage,
    run_seed,
    segment_stage,
    simulate_stage,
)
from ..alert.qa_gate import QaGate
from ..phantom.scene import load_scene, save_scene
from ..reconstruction.volume_io import load_volume, save_volume
from ..scansim.calibration import (
    calibrate_latency,
    fiducial_registration_report,
    simulate_temporal_calibration,
)
from ..scansim.simulator import load_scan, save_scan
from ..segmentation.maskio import load_mask, save_mask
from ..utils.config import ConfigLoader, get_config_loader
from ..utils.errors import ConfigError, InvalidInputError
from ..utils.logger import setup_logger

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_QA_FAILED = 3


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="실험 설정 문서 (.yaml/.json)")
    common.add_argument("--seed", type=int, default=None, help="기본 시드")
    common.add_argument("--out-dir", type=Path, default=Path("outputs"), help="출력 디렉토리")
    common.add_argument("--seg-config", default=None, help="SegConfig 덮어쓰기 (JSON 문자열 또는 파일)")
    common.add_argument("--repeats", type=int, default=None, help="반복 횟수")
    common.add_argument("--workers", type=int, default=None, help="병렬 작업 수 (0 = 물리 코어 수)")
    common.add_argument("--log-level", default="INFO", help="로그 레벨")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(prog="us-qa3d", description="추적 2D 초음파 3D 재구성 QA 툴킷")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="추적 주사를 시뮬레이션해 프레임/포즈를 저장")

    p = sub.add_parser("segment", parents=[common], help="저장된 주사의 프레임을 분할")
    p.add_argument("--scan-dir", type=Path, default=None)

    p = sub.add_parser("reconstruct", parents=[common], help="마스크와 보고 포즈로 볼륨 재구성")
    p.add_argument("--scan-dir", type=Path, default=None)
    p.add_argument("--mask-dir", type=Path, default=None)
    p.add_argument("--ground-truth-masks", action="store_true")

    p = sub.add_parser("evaluate", parents=[common], help="재구성 볼륨을 팬텀과 비교")
    p.add_argument("--volume", type=Path, default=None)
    p.add_argument("--scan-dir", type=Path, default=None)

    sub.add_parser("baseline", parents=[common], help="기준 주사 반복 실행과 QA 게이트")

    p = sub.add_parser("sweep-speed", parents=[common], help="주사 속도 스윕")
    p.add_argument("--speeds", type=float, nargs="+", default=None)

    p = sub.add_parser("sweep-angle", parents=[common], help="삽입 각도 스윕")
    p.add_argument("--axial", type=float, nargs="+", default=None)
    p.add_argument("--lateral", type=float, nargs="+", default=None)

    p = sub.add_parser("export", parents=[common], help="보고서를 JSON/CSV로 다시 내보내기")
    p.add_argument("--report", type=Path, required=True)
    p.add_argument("--formats", nargs="+", default=["json", "csv"], choices=["json", "csv"])

    p = sub.add_parser("calibrate", parents=[common], help="시간 보정과 기준점 정합 보고")
    p.add_argument("--search-window", type=float, default=0.5)
    return parser


def parse_seg_config(value: Optional[str]) -> Optional[Dict[str, Any]]:
    """--seg-config 값을 딕셔너리로 해석합니다 (파일 경로 또는 JSON 문자열)."""
    if value is None:
        return None
    path = Path(value)
    if path.suffix in (".json", ".yaml", ".yml") and path.exists():
        return ConfigLoader.load_document(path)
    try:
        document = json.loads(value)
    except json.JSONDecodeError as e:
        raise ConfigError(f"--seg-config를 JSON으로 해석할 수 없습니다: {e}") from e
    if not isinstance(document, dict):
        raise ConfigError("--seg-config는 JSON 객체여야 합니다")
    return document


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides: Dict[str, Any] = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.repeats is not None:
        overrides["repeats"] = args.repeats
    if args.workers is not None:
        overrides["workers"] = args.workers
    seg = parse_seg_config(args.seg_config)
    if seg is not None:
        overrides["segmentation"] = seg
    return load_experiment_config(args.config, overrides)


def _write_json(path: Path, data: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def apply_gate(report: QaReport, out_dir: Path) -> int:
    """QA 게이트를 적용하고 gate.json을 씁니다."""
    gate = QaGate.from_config(get_config_loader().get_qa_config())
    alerts = gate.evaluate(report)
    passed = gate.passed(alerts)
    _write_json(out_dir / "gate.json", {"passed": passed, "alerts": [a.to_dict() for a in alerts]})
    if not passed:
        logger.error("QA 게이트 실패")
        return EXIT_QA_FAILED
    logger.info("QA 게이트 통과")
    return EXIT_OK


def cmd_simulate(config: ExperimentConfig, args: argparse.Namespace) -> int:
    scene, scan = simulate_stage(config, run_seed(config.seed, 0))
    scan_dir = args.out_dir / "scan"
    save_scan(scan, scan_dir)
    save_scene(scene, scan_dir / "scene.json")
    logger.info(f"주사 저장: {scan_dir} {scan.get_stats()}")
    return EXIT_OK


def _scan_dir(args: argparse.Namespace) -> Path:
    scan_dir = args.scan_dir or args.out_dir / "scan"
    if not (scan_dir / "meta.json").exists():
        raise InvalidInputError(f"주사 디렉토리가 아닙니다: {scan_dir}")
    return scan_dir


def cmd_segment(config: ExperimentConfig, args: argparse.Namespace) -> int:
    scan = load_scan(_scan_dir(args))
    masks, mean_dsc = segment_stage(scan.frames, config)
    mask_dir = args.out_dir / "masks"
    for index, mask in masks.items():
        save_mask(mask, mask_dir / f"{index:05d}.pbm")
    _write_json(args.out_dir / "segmentation.json", {"frames": len(masks), "mean_dsc_2d": mean_dsc})
    logger.info(f"분할 완료: 프레임 {len(masks)}개, 평균 DSC-2D {mean_dsc}")
    return EXIT_OK


def cmd_reconstruct(config: ExperimentConfig, args: argparse.Namespace) -> int:
    scan = load_scan(_scan_dir(args))
    frames = scan.valid_frames
    if args.mask_dir is not None:
        masks = {f.index: load_mask(args.mask_dir / f"{f.index:05d}.pbm") for f in frames}
    elif args.ground_truth_masks:
        masks = {f.index: f.gt_mask for f in frames}
    else:
        masks, _ = segment_stage(frames, config)
    grid = reconstruct_stage(frames, masks, config)
    path = save_volume(grid, args.out_dir / "volume.mhd")
    _write_json(args.out_dir / "volume.json", {"grid": grid.spec.to_dict(), **grid.get_stats()})
    logger.info(f"볼륨 저장: {path}")
    return EXIT_OK


def cmd_evaluate(config: ExperimentConfig, args: argparse.Namespace) -> int:
    grid = load_volume(args.volume or args.out_dir / "volume.mhd")
    scene_path = (args.scan_dir or args.out_dir / "scan") / "scene.json"
    scene = load_scene(scene_path) if scene_path.exists() else config.load_scene()
    seed = run_seed(config.seed, 0)
    artifacts = args.out_dir / "runs" / "repeat_000" if config.evaluation.export_artifacts else None
    result = evaluate_stage(grid, scene, config, seed, artifacts)
    result.update({"repeat": 0, "seed": seed})
    report = build_report(config, [result])
    export(report, args.out_dir)
    return apply_gate(report, args.out_dir)


def cmd_baseline(config: ExperimentConfig, args: argparse.Namespace) -> int:
    report = QaRunner(config, args.out_dir).run_baseline()
    export(report, args.out_dir)
    return apply_gate(report, args.out_dir)


def cmd_sweep_speed(config: ExperimentConfig, args: argparse.Namespace) -> int:
    reports, frame = QaRunner(config).sweep_speed(args.speeds)
    for speed, report in zip(frame["speed_mm_s"], reports):
        export(report, args.out_dir / "sweep_speed" / f"speed_{speed:g}", formats=("json",))
    write_sweep_csv(frame, args.out_dir / "sweep_speed.csv")
    return EXIT_OK


def cmd_sweep_angle(config: ExperimentConfig, args: argparse.Namespace) -> int:
    reports, frame = QaRunner(config).sweep_angle(args.axial, args.lateral)
    for (_, row), report in zip(frame.iterrows(), reports):
        name = f"axial_{row['axial_angle_deg']:g}_lateral_{row['lateral_tilt_deg']:g}"
        export(report, args.out_dir / "sweep_angle" / name, formats=("json",))
    write_sweep_csv(frame, args.out_dir / "sweep_angle.csv")
    return EXIT_OK


def cmd_export(config: ExperimentConfig, args: argparse.Namespace) -> int:
    report = QaReport.load(args.report)
    export(report, args.out_dir, formats=args.formats)
    return EXIT_OK


def cmd_calibrate(config: ExperimentConfig, args: argparse.Namespace) -> int:
    seed = run_seed(config.seed, 0)
    signals = simulate_temporal_calibration(config.tracker.latency, seed=seed)
    estimate = calibrate_latency(signals, search_window=args.search_window)
    fiducial = fiducial_registration_report(
        config.load_scene(), config.tracker, [seed, 1], config.evaluation.fiducial_inset_mm
    )
    result = {
        "true_latency_s": float(config.tracker.latency),
        "estimated_latency_s": float(estimate),
        "latency_error_s": float(estimate - config.tracker.latency),
        **fiducial,
    }
    _write_json(args.out_dir / "calibration.json", result)
    logger.info(f"시간 보정: 추정 지연 {estimate * 1000:.2f} ms, FRE {fiducial['fre_mm']:.3f} mm")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "segment": cmd_segment,
    "reconstruct": cmd_reconstruct,
    "evaluate": cmd_evaluate,
    "baseline": cmd_baseline,
    "sweep-speed": cmd_sweep_speed,
    "sweep-angle": cmd_sweep_angle,
    "export": cmd_export,
    "calibrate": cmd_calibrate,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    CLI 실행

    Args:
        argv: 인자 목록 (None이면 sys.argv)

    Returns:
        종료 코드
    """
    args = build_parser().parse_args(argv)
    setup_logger(args.log_level, log_file=args.out_dir / "logs" / "qa.log")
    try:
        config = config_from_args(args)
    except (ConfigError, InvalidInputError) as e:
        logger.error(f"설정 오류: {e}")
        return EXIT_INVALID_CONFIG

    logger.info(f"{args.command} 실행 (config_hash={config.config_hash[:12]}, seed={config.seed})")
    try:
        return COMMANDS[args.command](config, args)
    except InvalidInputError as e:
        logger.error(f"입력 오류: {e}")
        return EXIT_INVALID_CONFIG
