"""
QA 게이트
보고서 집계값을 임계값과 비교해 info / warning / critical 알림을 생성합니다.
"""
from collections import deque
from datetime import datetime
from typing import Any, Dict, List, Optional

from loguru import logger

LEVELS = ("info", "warning", "critical")

# 경고로만 다루는 플래그 코드
WARNING_FLAGS = {
    "icp_unconverged",
    "fit_unconverged",
    "fit_failed",
    "dropout_warning",
    "unmatched_component",
    "incomplete_aggregate",
    "non_finite_metric",
}
CRITICAL_FLAGS = {"missing_shape", "evaluation_failed"}


class QaAlert:
    """QA 알림 클래스"""

    def __init__(
        self,
        level: str,
        message: str,
        details: Dict[str, Any],
        timestamp: Optional[str] = None
    ):
        """
        QaAlert 초기화

        Args:
            level: 알림 레벨 ('info', 'warning', 'critical')
            message: 알림 메시지
            details: 상세 정보 (형상, 지표, 값, 임계값 등)
            timestamp: 타임스탬프 (None이면 현재 시간)
        """
        if level not in LEVELS:
            raise ValueError(f"알 수 없는 알림 레벨: {level}")
        self.level = level
        self.message = message
        self.details = details
        self.timestamp = timestamp or datetime.now().strftime("%Y-%m-%d %H:%M:%S")

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환"""
        return {
            "level": self.level,
            "message": self.message,
            "details": self.details,
            "timestamp": self.timestamp,
        }


class QaGate:
    """QA 임계값 게이트"""

    def __init__(
        self,
        min_dsc_3d: float = 0.90,
        max_hd95_mm: float = 2.0,
        max_volume_error_pct: float = 25.0,
        min_components: int = 4,
        warning_margin: float = 0.02,
        fail_on: str = "critical",
        max_alerts: int = 1000
    ):
        """
        QaGate 초기화

        Args:
            min_dsc_3d: 형상별 평균 DSC-3D 하한
            max_hd95_mm: 형상별 평균 HD95 상한 (mm)
            max_volume_error_pct: 평균 부피 오차 절대값 상한 (%)
            min_components: 재구성 성분 수 하한
            warning_margin: 임계값 근접 경고 여유 (상대값)
            fail_on: 실패로 판정할 최소 레벨 ('warning' 또는 'critical')
            max_alerts: 보관할 최대 알림 수
        """
        if fail_on not in ("warning", "critical"):
            raise ValueError(f"fail_on은 warning 또는 critical이어야 합니다: {fail_on}")
        self.min_dsc_3d = min_dsc_3d
        self.max_hd95_mm = max_hd95_mm
        self.max_volume_error_pct = max_volume_error_pct
        self.min_components = min_components
        self.warning_margin = warning_margin
        self.fail_on = fail_on
        self.alerts: deque = deque(maxlen=max_alerts)

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> "QaGate":
        """config_qa.yaml의 qa 섹션으로 생성"""
        section = config.get("qa", config)
        keys = ("min_dsc_3d", "max_hd95_mm", "max_volume_error_pct", "min_components", "warning_margin", "fail_on")
        return cls(**{k: section[k] for k in keys if k in section})

    def _add(self, level: str, message: str, **details) -> QaAlert:
        alert = QaAlert(level, message, details)
        self.alerts.append(alert)
        log = logger.warning if level != "info" else logger.info
        log(f"QA 알림: [{level.upper()}] {message}")
        return alert

    def _check_lower(self, shape: str, name: str, value: float, limit: float) -> Optional[QaAlert]:
        if value < limit:
            return self._add("critical", f"[{shape}] {name} {value:.4f} < {limit}", shape=shape, metric=name, value=value, limit=limit)
        if value < limit * (1.0 + self.warning_margin):
            return self._add("warning", f"[{shape}] {name} {value:.4f}가 하한 {limit}에 근접", shape=shape, metric=name, value=value, limit=limit)
        return None

    def _check_upper(self, shape: str, name: str, value: float, limit: float) -> Optional[QaAlert]:
        if value > limit:
            return self._add("critical", f"[{shape}] {name} {value:.4f} > {limit}", shape=shape, metric=name, value=value, limit=limit)
        if value > limit * (1.0 - self.warning_margin):
            return self._add("warning", f"[{shape}] {name} {value:.4f}가 상한 {limit}에 근접", shape=shape, metric=name, value=value, limit=limit)
        return None

    def evaluate(self, report) -> List[QaAlert]:
        """
        보고서를 평가해 이번 평가의 알림 목록을 반환합니다.

        Args:
            report: QaReport

        Returns:
            QaAlert 리스트
        """
        raised: List[Optional[QaAlert]] = []
        for shape, metrics in report.aggregates.items():
            if "dsc_3d" in metrics:
                raised.append(self._check_lower(shape, "dsc_3d", metrics["dsc_3d"]["mean"], self.min_dsc_3d))
            if "hd95_mm" in metrics:
                raised.append(self._check_upper(shape, "hd95_mm", metrics["hd95_mm"]["mean"], self.max_hd95_mm))
            if "volume_error_pct" in metrics:
                raised.append(self._check_upper(
                    shape, "|volume_error_pct|", abs(metrics["volume_error_pct"]["mean"]), self.max_volume_error_pct
                ))

        components = report.system.get("components", {}).get("mean")
        if components is not None and components < self.min_components:
            raised.append(self._add(
                "critical", f"재구성 성분 수 {components:.1f} < {self.min_components}",
                metric="components", value=components, limit=self.min_components,
            ))

        for flag in report.flags:
            code = flag.get("code", "")
            if code in CRITICAL_FLAGS:
                raised.append(self._add("critical", f"플래그 {code}: {flag.get('shape', '')}", **flag))
            elif code in WARNING_FLAGS:
                raised.append(self._add("warning", f"플래그 {code}", **flag))

        alerts = [a for a in raised if a is not None]
        if not alerts:
            alerts.append(self._add("info", "모든 QA 임계값 통과", shapes=len(report.aggregates)))
        return alerts

    def passed(self, alerts: List[QaAlert]) -> bool:
        """fail_on 이상 레벨의 알림이 없으면 True"""
        threshold = LEVELS.index(self.fail_on)
        return all(LEVELS.index(a.level) < threshold for a in alerts)

    def get_recent_alerts(self, count: int = 50, level: Optional[str] = None) -> List[QaAlert]:
        alerts = list(self.alerts)
        if level:
            alerts = [a for a in alerts if a.level == level]
        return alerts[-count:]

    def get_stats(self) -> Dict[str, Any]:
        """알림 통계 정보 반환"""
        level_counts: Dict[str, int] = {}
        for alert in self.alerts:
            level_counts[alert.level] = level_counts.get(alert.level, 0) + 1
        return {"total_alerts": len(self.alerts), "level_counts": level_counts, "fail_on": self.fail_on}
