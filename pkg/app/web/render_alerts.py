"""
알림 렌더링 모듈
QA 게이트 결과 패널
"""
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import streamlit as st

from src.alert import QaGate
from src.pipeline.report import QaReport


def load_gate_alerts(results_dir: Path, report: Optional[QaReport], qa_config: Dict[str, Any]) -> List[Dict[str, Any]]:
    """
    gate.json 이 있으면 읽고, 없으면 보고서를 QaGate로 다시 평가합니다.

    Returns:
        알림 dict 리스트
    """
    gate_path = Path(results_dir) / "gate.json"
    if gate_path.exists():
        return json.loads(gate_path.read_text(encoding="utf-8")).get("alerts", [])
    if report is None:
        return []
    gate = QaGate.from_config(qa_config)
    return [alert.to_dict() for alert in gate.evaluate(report)]


def render_alerts_panel(alerts: List[Dict[str, Any]], max_alerts: int = 50):
    """알림 패널 렌더링"""
    st.subheader("🚨 QA 게이트")

    if not alerts:
        st.info("평가 결과가 없습니다")
        return

    critical = [a for a in alerts if a.get("level") == "critical"]
    warnings = [a for a in alerts if a.get("level") == "warning"]

    if critical:
        st.error(f"임계값 위반 {len(critical)}건")
    elif warnings:
        st.warning(f"경고 {len(warnings)}건")
    else:
        st.success("모든 QA 임계값을 통과했습니다")

    for alert in (critical + warnings)[:max_alerts]:
        with st.container():
            st.markdown(f"**{alert.get('level', 'info').upper()}** - {alert.get('message', '')}")
            st.caption(f"Time: {alert.get('timestamp', 'unknown')}")
            st.markdown("---")
