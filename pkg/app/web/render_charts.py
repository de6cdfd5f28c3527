"""
차트 렌더링 모듈
스윕 결과와 형상별 지표를 Plotly 차트로 생성합니다.
"""
from typing import Optional, Sequence

import pandas as pd
import plotly.graph_objects as go

SHAPE_COLORS = {
    "sphere": "#1f77b4",
    "ellipsoid": "#ff7f0e",
    "cylinder": "#2ca02c",
    "triprism": "#d62728",
}


def plot_speed_sweep(
    df: pd.DataFrame,
    height: int = 400,
    dsc_range: Optional[Sequence[float]] = None,
) -> Optional[go.Figure]:
    """
    스캔 속도별 평균 DSC-3D 차트 (표준편차 오차 막대)

    Args:
        df: sweep_speed.csv 표 (speed_mm_s, mean_dsc_3d, std_dsc_3d)
        height: 차트 높이
        dsc_range: y축 범위

    Returns:
        Figure (데이터가 없으면 None)
    """
    if df is None or len(df) == 0 or "speed_mm_s" not in df.columns:
        return None

    df = df.sort_values("speed_mm_s")
    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=df["speed_mm_s"],
        y=df["mean_dsc_3d"],
        error_y=dict(type="data", array=df["std_dsc_3d"], visible=True),
        mode="lines+markers",
        name="DSC-3D",
        line=dict(color="blue", width=1),
        marker=dict(size=6),
        hovertemplate="속도: %{x:.1f} mm/s<br>DSC: %{y:.4f}<extra></extra>",
    ))
    fig.update_layout(
        height=height,
        xaxis_title="Scan speed (mm/s)",
        yaxis_title="Mean DSC-3D",
        showlegend=False,
    )
    if dsc_range:
        fig.update_yaxes(range=list(dsc_range))
    return fig


def plot_angle_sweep(
    df: pd.DataFrame,
    height: int = 400,
    dsc_range: Optional[Sequence[float]] = None,
) -> Optional[go.Figure]:
    """축 방향 각도별 평균 DSC-3D 차트. 측면 기울기마다 한 줄, 다중 스윕 지점은 다이아몬드로 표시"""
    if df is None or len(df) == 0 or "axial_angle_deg" not in df.columns:
        return None

    fig = go.Figure()
    for tilt, group in df.sort_values("axial_angle_deg").groupby("lateral_tilt_deg", sort=True):
        symbols = ["diamond" if bool(m) else "circle" for m in group["multi_sweep"]]
        fig.add_trace(go.Scatter(
            x=group["axial_angle_deg"],
            y=group["mean_dsc_3d"],
            error_y=dict(type="data", array=group["std_dsc_3d"], visible=True),
            mode="lines+markers",
            name=f"tilt {tilt:g}°",
            marker=dict(size=8, symbol=symbols),
            text=group["sweeps"].astype(str),
            hovertemplate="각도: %{x:g}°<br>DSC: %{y:.4f}<br>스윕: %{text}<extra></extra>",
        ))
    fig.update_layout(
        height=height,
        xaxis_title="Axial angle (deg)",
        yaxis_title="Mean DSC-3D",
        showlegend=True,
    )
    if dsc_range:
        fig.update_yaxes(range=list(dsc_range))
    return fig


def plot_shape_metric(shape_df: pd.DataFrame, metric: str, height: int = 400) -> Optional[go.Figure]:
    """형상별 지표 막대 차트 (shapes.csv 의 <metric>_mean / <metric>_std)"""
    mean_col, std_col = f"{metric}_mean", f"{metric}_std"
    if shape_df is None or len(shape_df) == 0 or mean_col not in shape_df.columns:
        return None

    fig = go.Figure()
    fig.add_trace(go.Bar(
        x=shape_df["shape"],
        y=shape_df[mean_col],
        error_y=dict(type="data", array=shape_df[std_col].fillna(0.0), visible=True),
        marker_color=[SHAPE_COLORS.get(s, "gray") for s in shape_df["shape"]],
        name=metric,
    ))
    fig.update_layout(
        height=height,
        xaxis_title="Shape",
        yaxis_title=metric,
        showlegend=False,
    )
    return fig
