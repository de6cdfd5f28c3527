"""
US-QA 3D Report Viewer
Streamlit 기반 재구성 QA 결과 조회 대시보드
"""
import streamlit as st
import pandas as pd

# 프로젝트 모듈 임포트
import sys
from pathlib import Path
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from app.web.render_charts import plot_speed_sweep, plot_angle_sweep, plot_shape_metric
from app.web.render_metrics import render_main_metrics, render_statistics
from app.web.render_alerts import load_gate_alerts, render_alerts_panel

from src.pipeline.report import QaReport, SHAPE_METRICS
from src.utils.config import get_config_loader

config_loader = get_config_loader()
dashboard_config = config_loader.get_dashboard_config().get("dashboard", {})
streamlit_config = dashboard_config.get("streamlit", {})
chart_config = dashboard_config.get("charts", {})

# 페이지 설정
st.set_page_config(
    page_title=streamlit_config.get("page_title", "US-QA 3D Report Viewer"),
    page_icon=streamlit_config.get("page_icon"),
    layout=streamlit_config.get("layout", "wide"),
    initial_sidebar_state="expanded",
)


@st.cache_data
def load_report(path: str):
    report_path = Path(path)
    if not report_path.exists():
        return None
    return QaReport.load(report_path)


@st.cache_data
def load_csv(path: str):
    csv_path = Path(path)
    if not csv_path.exists():
        return None
    return pd.read_csv(csv_path)


def main():
    st.title(streamlit_config.get("page_title", "US-QA 3D Report Viewer"))

    with st.sidebar:
        st.header("설정")
        results_dir = Path(st.text_input("결과 디렉토리", value=dashboard_config.get("results_dir", "outputs")))
        metric = st.selectbox("형상 지표", SHAPE_METRICS, index=0)
        if st.button("다시 읽기"):
            st.cache_data.clear()

    report = load_report(str(results_dir / "report.json"))
    shapes_df = load_csv(str(results_dir / "shapes.csv"))
    speed_df = load_csv(str(results_dir / "sweep_speed.csv"))
    angle_df = load_csv(str(results_dir / "sweep_angle.csv"))

    if report is None and speed_df is None and angle_df is None:
        st.info(f"{results_dir} 에 결과가 없습니다. `python -m src.pipeline baseline` 으로 먼저 실행하세요.")
        return

    height = chart_config.get("height", 400)
    dsc_range = chart_config.get("dsc_range")

    col_main, col_alerts = st.columns([3, 1])
    with col_main:
        if report is not None:
            render_main_metrics(report)
            if shapes_df is None:
                shapes_df = report.shape_frame()
            fig = plot_shape_metric(shapes_df, metric, height=height)
            if fig is not None:
                st.plotly_chart(fig, use_container_width=True)
            render_statistics(report)

        st.subheader("스윕")
        col_speed, col_angle = st.columns(2)
        with col_speed:
            fig = plot_speed_sweep(speed_df, height=height, dsc_range=dsc_range)
            if fig is not None:
                st.plotly_chart(fig, use_container_width=True)
            else:
                st.caption("sweep_speed.csv 없음")
        with col_angle:
            fig = plot_angle_sweep(angle_df, height=height, dsc_range=dsc_range)
            if fig is not None:
                st.plotly_chart(fig, use_container_width=True)
            else:
                st.caption("sweep_angle.csv 없음")

    with col_alerts:
        alerts = load_gate_alerts(results_dir, report, config_loader.get_qa_config())
        render_alerts_panel(alerts, max_alerts=dashboard_config.get("alerts", {}).get("max_alerts", 50))


main()
