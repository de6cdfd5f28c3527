"""
메트릭 렌더링 모듈
DSC-3D 요약, 시스템 지표, 형상별 표 표시
"""
import streamlit as st
import pandas as pd

from src.pipeline.report import QaReport

TABLE_METRICS = ["dsc_3d", "hd95_mm", "volume_error_pct", "roundness", "feret_max_mm", "fit_rms_mm"]


def shape_table(report: QaReport) -> pd.DataFrame:
    """형상별 '평균 ± 표준편차' 문자열 표"""
    rows = []
    for shape, metrics in report.aggregates.items():
        row = {"shape": shape, "n": metrics.get("dsc_3d", {}).get("n", 0)}
        for name in TABLE_METRICS:
            stats = metrics.get(name)
            row[name] = f"{stats['mean']:.4f} ± {stats['std']:.4f}" if stats else "-"
        rows.append(row)
    return pd.DataFrame(rows, columns=["shape", "n"] + TABLE_METRICS)


def render_main_metrics(report: QaReport):
    """주요 메트릭 렌더링"""
    summary = report.dsc_summary()
    system = report.system
    col1, col2, col3, col4 = st.columns(4)

    with col1:
        st.metric(
            "Mean DSC-3D",
            f"{summary['mean_dsc_3d']:.4f}",
            delta=f"± {summary['std_dsc_3d']:.4f}",
            delta_color="off",
        )

    with col2:
        components = system.get("components", {}).get("mean")
        st.metric("Components", f"{components:.1f}" if components is not None else "-")

    with col3:
        fre = system.get("fre_mm", {}).get("mean")
        st.metric("FRE", f"{fre:.3f} mm" if fre is not None else "-")

    with col4:
        st.metric("Repeats", report.repeats)


def render_statistics(report: QaReport):
    """형상별 통계 표와 실행 정보"""
    st.markdown("---")
    st.dataframe(shape_table(report), use_container_width=True, hide_index=True)
    st.caption(
        f"seed {report.seed} | config {report.config_hash[:12]} | "
        f"version {report.version} | {report.created_at or '-'}"
    )
