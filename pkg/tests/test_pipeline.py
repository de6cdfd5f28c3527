from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
import yaml
from loguru import logger

from src.alert import QaGate
from src.pipeline import (
    ANGLE_CSV_COLUMNS,
    SHAPE_CSV_COLUMNS,
    SPEED_CSV_COLUMNS,
    ExperimentConfig,
    QaReport,
    build_report,
    config_hash,
    export,
    load_experiment_config,
    match_components,
    mean_std,
    run_seed,
    sweep_frame,
)
from src.pipeline.cli import EXIT_INVALID_CONFIG, EXIT_OK, main
from src.scansim import EMTracker
from src.utils.errors import ConfigError, InvalidInputError
from src.utils.logger import log_stage, setup_logger

CREATED_AT = "2024-01-01T00:00:00Z"


def _runs() -> list:
    return [
        {
            "repeat": 1,
            "shapes": {"sphere": {"dsc_3d": 0.94, "hd95_mm": 1.2}},
            "system": {"components": 4, "fre_mm": 0.1, "multi_sweep": False},
            "flags": [],
        },
        {
            "repeat": 0,
            "shapes": {
                "sphere": {"dsc_3d": 0.96, "hd95_mm": 1.0},
                "cylinder": {"dsc_3d": 0.93, "hd95_mm": 1.1},
            },
            "system": {"components": 4, "fre_mm": 0.3, "multi_sweep": False},
            "flags": [{"run": 0, "code": "icp_unconverged", "shape": "cylinder"}],
        },
    ]


def _report(aggregates: dict, flags: list | None = None, components: float = 4.0) -> QaReport:
    return QaReport(
        config={},
        config_hash="0" * 64,
        seed=0,
        repeats=1,
        runs=[],
        aggregates=aggregates,
        system={"components": {"mean": components, "std": 0.0, "n": 1}},
        flags=flags or [],
        created_at=CREATED_AT,
    )


def _stats(mean: float) -> dict:
    return {"mean": mean, "std": 0.0, "n": 1}


def test_default_config_matches_yaml_defaults() -> None:
    config = ExperimentConfig.from_dict({})
    assert config.scene_source == "default"
    assert config.repeats == 3
    assert config.trajectory.speed == 5.0
    assert config.reconstruction.spacing_mm == 0.5
    assert config.frame.width == 256
    assert config.tracker.kind == "kinematic"
    assert config.sweep.speeds_mm_s == (2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5)


def test_icp_stop_rule_defaults() -> None:
    defaults = ExperimentConfig.from_dict({}).evaluation
    assert (defaults.icp_max_iterations, defaults.icp_tolerance_mm) == (200, 1e-6)
    shipped = load_experiment_config(Path(__file__).resolve().parents[1] / "configs" / "config_experiment.yaml")
    assert (shipped.evaluation.icp_max_iterations, shipped.evaluation.icp_tolerance_mm) == (200, 1e-6)


def test_config_hash_is_stable_and_order_independent() -> None:
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})

    config = ExperimentConfig.from_dict({"seed": 5})
    assert config.config_hash == ExperimentConfig.from_dict({"experiment": {"seed": 5}}).config_hash
    faster = config.with_overrides({"trajectory": {"speed": 10.0}})
    assert faster.trajectory.speed == 10.0
    assert faster.trajectory.axial_angle_deg == config.trajectory.axial_angle_deg
    assert faster.config_hash != config.config_hash


def test_tracker_section_builds_tracker_model() -> None:
    config = ExperimentConfig.from_dict({
        "tracker": {"kind": "em", "pos_noise_rms_mm": 0.2, "distortion": {"amplitude_mm": 2.0}},
    })
    assert isinstance(config.tracker, EMTracker)
    assert config.tracker.distortion.amplitude == 2.0


@pytest.mark.parametrize(
    "document",
    [
        {"sped": 5.0},
        {"trajectory": {"velocity": 5.0}},
        {"repeats": 0},
        {"latency_compensation": "guess"},
        {"trajectory": {"speed": -1.0}},
        {"frame": {"width": 100}},
        {"segmentation": {"median_kernel": 4}},
        {"tracker": {"kind": "sonar"}},
        {"max_pose_gap_s": 0.0},
    ],
)
def test_invalid_documents_raise_config_error(document: dict) -> None:
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(document)


def test_load_experiment_config_from_yaml(tmp_path: Path) -> None:
    path = tmp_path / "experiment.yaml"
    path.write_text(yaml.safe_dump({"experiment": {"seed": 9, "trajectory": {"speed": 7.5}}}), encoding="utf-8")
    config = load_experiment_config(path, overrides={"repeats": 1})
    assert (config.seed, config.repeats, config.trajectory.speed) == (9, 1, 7.5)

    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("- just\n- a list\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_experiment_config(broken)


def test_run_seed_is_deterministic_per_repeat() -> None:
    assert run_seed(0, 0) == run_seed(0, 0)
    assert len({run_seed(0, r) for r in range(5)}) == 5
    assert run_seed(1, 0) != run_seed(0, 0)


def test_match_components_pairs_nearest_centroids() -> None:
    pred = [np.array([110.0, 40.0, 30.0]), np.array([17.5, 40.0, 30.0]), np.array([400.0, 0.0, 0.0])]
    truth = [np.array([17.0, 40.0, 30.0]), np.array([109.0, 40.0, 30.0])]
    assert sorted(match_components(pred, truth, 20.0)) == [(0, 1), (1, 0)]
    assert match_components([], truth, 20.0) == []
    assert match_components(pred[:1], truth[:1], 20.0) == []


def test_mean_std_uses_sample_deviation() -> None:
    assert mean_std([1.0]) == {"mean": 1.0, "std": 0.0, "n": 1}
    stats = mean_std([1.0, 2.0, 3.0])
    assert stats["mean"] == pytest.approx(2.0)
    assert stats["std"] == pytest.approx(1.0)


def test_build_report_aggregates_over_repeats() -> None:
    config = ExperimentConfig.from_dict({"repeats": 2})
    report = build_report(config, _runs(), created_at=CREATED_AT)

    assert [run["repeat"] for run in report.runs] == [0, 1]
    assert report.shapes == ["sphere", "cylinder"]
    sphere = report.metric("sphere", "dsc_3d")
    assert sphere["mean"] == pytest.approx(0.95)
    assert sphere["std"] == pytest.approx(np.std([0.94, 0.96], ddof=1))
    assert report.system["fre_mm"]["mean"] == pytest.approx(0.2)
    assert "multi_sweep" not in report.system
    assert report.system_summary()["multi_sweep"] is False

    codes = [flag["code"] for flag in report.flags]
    assert "icp_unconverged" in codes
    assert {"code": "incomplete_aggregate", "shape": "cylinder", "n": 1, "repeats": 2} in report.flags

    summary = report.dsc_summary()
    assert summary["mean_dsc_3d"] == pytest.approx(np.mean([0.945, 0.94]))
    assert report.config_hash == config.config_hash


def test_report_json_is_deterministic_and_round_trips(tmp_path: Path) -> None:
    config = ExperimentConfig.from_dict({"repeats": 2})
    first = build_report(config, _runs(), created_at=CREATED_AT)
    second = build_report(config, _runs(), created_at="2030-06-01T12:00:00Z")
    assert first.to_json(include_timestamp=False) == second.to_json(include_timestamp=False)

    text = first.to_json()
    assert QaReport.from_json(text).to_json() == text
    assert json.loads(text)["metadata"]["roundness_convention"].startswith("sphericity")


def test_shape_frame_and_export(tmp_path: Path) -> None:
    config = ExperimentConfig.from_dict({"repeats": 2})
    report = build_report(config, _runs(), created_at=CREATED_AT)
    frame = report.shape_frame()
    assert list(frame.columns) == SHAPE_CSV_COLUMNS
    sphere = frame.set_index("shape").loc["sphere"]
    assert sphere["n"] == 2
    assert sphere["dsc_3d_mean"] == pytest.approx(0.95)
    assert np.isnan(sphere["hd_mm_mean"])

    written = export(report, tmp_path)
    assert [p.name for p in written] == ["report.json", "shapes.csv"]
    assert list(pd.read_csv(tmp_path / "shapes.csv").columns) == SHAPE_CSV_COLUMNS
    assert QaReport.load(tmp_path / "report.json").config_hash == report.config_hash
    with pytest.raises(InvalidInputError):
        export(report, tmp_path, formats=("xml",))


def test_sweep_frames_follow_csv_schemas() -> None:
    speed = sweep_frame([{"speed_mm_s": 5.0, "mean_dsc_3d": 0.9, "std_dsc_3d": 0.01}], "speed")
    assert list(speed.columns) == SPEED_CSV_COLUMNS
    angle = sweep_frame([], "angle")
    assert list(angle.columns) == ANGLE_CSV_COLUMNS
    assert angle.empty


def test_gate_passes_healthy_report() -> None:
    gate = QaGate()
    report = _report({"sphere": {"dsc_3d": _stats(0.95), "hd95_mm": _stats(1.0), "volume_error_pct": _stats(10.0)}})
    alerts = gate.evaluate(report)
    assert [a.level for a in alerts] == ["info"]
    assert gate.passed(alerts)


def test_gate_flags_threshold_violations() -> None:
    gate = QaGate(min_dsc_3d=0.9, max_hd95_mm=2.0)
    report = _report({
        "sphere": {"dsc_3d": _stats(0.85), "hd95_mm": _stats(1.0)},
        "cylinder": {"dsc_3d": _stats(0.91), "hd95_mm": _stats(2.5)},
    })
    alerts = gate.evaluate(report)
    levels = {(a.details.get("shape"), a.details.get("metric")): a.level for a in alerts}
    assert levels[("sphere", "dsc_3d")] == "critical"
    assert levels[("cylinder", "dsc_3d")] == "warning"
    assert levels[("cylinder", "hd95_mm")] == "critical"
    assert not gate.passed(alerts)
    assert gate.get_stats()["level_counts"]["critical"] == 2


def test_gate_flags_and_component_count() -> None:
    report = _report(
        {"sphere": {"dsc_3d": _stats(0.99)}},
        flags=[{"code": "missing_shape", "shape": "triprism"}, {"code": "dropout_warning"}],
        components=3.0,
    )
    alerts = QaGate().evaluate(report)
    assert sum(a.level == "critical" for a in alerts) == 2
    assert sum(a.level == "warning" for a in alerts) == 1

    lenient = QaGate.from_config({"qa": {"min_components": 3, "fail_on": "warning"}})
    only_warning = _report({"sphere": {"dsc_3d": _stats(0.99)}}, flags=[{"code": "fit_failed", "shape": "sphere"}])
    assert not lenient.passed(lenient.evaluate(only_warning))
    with pytest.raises(ValueError):
        QaGate(fail_on="info")


def test_cli_returns_invalid_config_code(tmp_path: Path) -> None:
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({"repeats": 0}), encoding="utf-8")
    out = tmp_path / "out"
    assert main(["baseline", "--config", str(path), "--out-dir", str(out)]) == EXIT_INVALID_CONFIG
    assert main(["baseline", "--seg-config", '{"median_kernel": 4}', "--out-dir", str(out)]) == EXIT_INVALID_CONFIG
    assert main(["baseline", "--seg-config", "not json", "--out-dir", str(out)]) == EXIT_INVALID_CONFIG
    assert not (out / "report.json").exists()


def test_cli_export_rewrites_report(tmp_path: Path) -> None:
    config = ExperimentConfig.from_dict({"repeats": 2})
    source = tmp_path / "source"
    export(build_report(config, _runs(), created_at=CREATED_AT), source, formats=("json",))
    out = tmp_path / "exported"
    assert main(["export", "--report", str(source / "report.json"), "--out-dir", str(out), "--formats", "csv"]) == EXIT_OK
    assert (out / "shapes.csv").exists()
    assert not (out / "report.json").exists()


def test_cli_segment_without_scan_is_input_error(tmp_path: Path) -> None:
    assert main(["segment", "--out-dir", str(tmp_path)]) == EXIT_INVALID_CONFIG


def test_cli_calibrate_writes_report(tmp_path: Path) -> None:
    assert main(["calibrate", "--seed", "3", "--out-dir", str(tmp_path)]) == EXIT_OK
    result = json.loads((tmp_path / "calibration.json").read_text(encoding="utf-8"))
    assert result["fiducials"] == 8
    assert abs(result["latency_error_s"]) < 5e-3
    assert result["fre_mm"] < 1e-6


def test_log_stage_records_run_and_duration() -> None:
    setup_logger("WARNING")
    records = []
    sink = logger.add(lambda message: records.append(message.record), level="DEBUG", format="{message}")
    try:
        with logger.contextualize(run="r7"):
            with log_stage("reconstruct"):
                pass
    finally:
        logger.remove(sink)
    assert len(records) == 1
    assert records[0]["extra"]["run"] == "r7"
    assert records[0]["message"].startswith("reconstruct 단계 완료")
