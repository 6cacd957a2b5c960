"""
UI components for the categorical morphology explorer
Reusable Streamlit elements, plotly figures and styling
"""

from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
import streamlit as st

from categorical import CategoricalImage, DirichletImage, dirichlet_expectation, entropy_map
from constants import GEODESIC_BACKENDS, NORMS, OPS, PROTECTION_MODES
from imaging import as_raster, render
from pipeline import PipelineStep

EXPLORER_BACKENDS = ("categorical", "dirichlet", "dirichlet-subset")


def apply_custom_css():
    """Apply custom CSS styling to the app"""
    st.markdown("""
    <style>
        .stApp {
            background-color: #1a1a2e;
        }

        h1, h2, h3, h4 {
            color: #e94560 !important;
        }

        [data-testid="stSidebar"] {
            background-color: #16213e;
        }

        .info-box {
            background: #0f3460;
            border-radius: 8px;
            padding: 15px;
            margin: 10px 0;
        }

        .warning-box {
            background: #5c4033;
            border: 1px solid #d4a373;
            border-radius: 8px;
            padding: 15px;
            margin: 10px 0;
        }

        [data-testid="stMetricValue"] {
            color: #e94560;
        }

        .legend-item {
            display: flex;
            align-items: center;
            margin: 5px 0;
        }

        .legend-color {
            width: 20px;
            height: 20px;
            border-radius: 4px;
            margin-right: 10px;
        }
    </style>
    """, unsafe_allow_html=True)


def render_header(title: str, subtitle: str = None, icon: str = "🧩"):
    """Render a styled page header"""
    st.markdown(f"# {icon} {title}")
    if subtitle:
        st.markdown(f"*{subtitle}*")
    st.markdown("---")


def render_info_box(content: str, box_type: str = "info"):
    """Render a styled info/warning box"""
    st.markdown(f'<div class="{box_type}-box">{content}</div>', unsafe_allow_html=True)


def render_metrics_row(metrics: list):
    """
    Render a row of metrics

    Args:
        metrics: List of dicts with 'label', 'value', and optional 'delta'
    """
    cols = st.columns(len(metrics))
    for col, metric in zip(cols, metrics):
        with col:
            st.metric(label=metric['label'], value=metric['value'], delta=metric.get('delta'))


def legend_html(names: Sequence[str], palette: Sequence[Sequence[int]]) -> str:
    """Colour legend for the category palette"""
    items = []
    for name, color in zip(names, palette):
        hex_color = "#{:02x}{:02x}{:02x}".format(*color)
        items.append(
            f'<div class="legend-item"><div class="legend-color" style="background-color: {hex_color};"></div>'
            f'<span style="color: #eaeaea;">{name}</span></div>'
        )
    return "\n".join(items)


def category_names(channels: int, names: Optional[List[str]] = None) -> List[str]:
    """Known names for the built-in fixtures, 'category k' otherwise"""
    if names and len(names) == channels:
        return [f"{k}: {name}" for k, name in enumerate(names)]
    return [f"category {k}" for k in range(channels)]


def render_operation_controls(channels: int, dirichlet: bool, names: Optional[List[str]] = None) -> dict:
    """
    Sidebar controls for one morphology step

    Returns:
        Dictionary of control values, turned into a step by `build_step`
    """
    labels = category_names(channels, names)
    controls = {}
    with st.sidebar:
        st.markdown("### 🎛️ Operation")
        controls['op'] = st.selectbox("Operation:", OPS)
        backends = EXPLORER_BACKENDS[1:] if dirichlet else EXPLORER_BACKENDS[:1]
        controls['backend'] = st.selectbox("Backend:", backends)
        if controls['backend'] == "dirichlet-subset":
            controls['subset'] = st.multiselect("Channels:", range(channels), format_func=lambda k: labels[k])
        elif controls['backend'] == "categorical":
            controls['category'] = st.selectbox("Category:", range(channels), format_func=lambda k: labels[k])
        controls['radius'] = st.slider("Radius:", min_value=0.5, max_value=6.0, value=1.0, step=0.5)
        controls['norm'] = st.selectbox("Norm:", NORMS)

        if controls['backend'] == "categorical":
            st.markdown("### 🛡️ Protection")
            others = [k for k in range(channels) if k != controls['category']]
            controls['protect'] = st.multiselect("Protected categories:", others, format_func=lambda k: labels[k])
            controls['mode'] = st.radio("Mode:", PROTECTION_MODES, horizontal=True)
            controls['geodesic'] = st.selectbox("Geodesic solver:", GEODESIC_BACKENDS, index=len(GEODESIC_BACKENDS) - 1)
    return controls


def build_step(controls: dict) -> PipelineStep:
    """Pipeline step for the sidebar control values"""
    step = PipelineStep(
        controls['op'],
        backend=controls.get('backend', "categorical"),
        category=controls.get('category'),
        subset=tuple(sorted(controls.get('subset') or ())),
        radius=float(controls.get('radius', 1.0)),
        norm=controls.get('norm', "euclidean"),
        protect=tuple(sorted(controls.get('protect') or ())),
        mode=controls.get('mode', "literal"),
        geodesic=controls.get('geodesic', "auto"),
    )
    step.check()
    return step


# =============================================================================
# Figures
# =============================================================================

def _as_categorical(image) -> CategoricalImage:
    return dirichlet_expectation(image) if isinstance(image, DirichletImage) else image


def rgb_figure(image, style: str = "rgb-mixture", title: str = "") -> go.Figure:
    """RGB view (rgb-mixture or argmax) of a 1-D or 2-D image"""
    rgb = as_raster(render(image, style), len(image.shape))
    fig = px.imshow(rgb, title=title)
    fig.update_layout(margin=dict(l=0, r=0, t=30, b=0), coloraxis_showscale=False)
    fig.update_xaxes(showticklabels=False)
    fig.update_yaxes(showticklabels=False)
    return fig


def scalar_figure(values: np.ndarray, title: str = "", zmax: Optional[float] = 1.0, scale: str = "Viridis") -> go.Figure:
    """Heat map of a per-pixel scalar (probability, entropy, magnitude)"""
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[None]
    fig = px.imshow(values, zmin=0.0, zmax=zmax, color_continuous_scale=scale, title=title)
    fig.update_layout(margin=dict(l=0, r=0, t=30, b=0))
    fig.update_xaxes(showticklabels=False)
    fig.update_yaxes(showticklabels=False)
    return fig


def entropy_figure(image, title: str = "") -> go.Figure:
    image = _as_categorical(image)
    return scalar_figure(entropy_map(image), title, zmax=float(np.log(image.channels)), scale="Magma")


def channel_figure(image, k: int, title: str = "") -> go.Figure:
    return scalar_figure(_as_categorical(image).data[..., k], title)


def summary_frame(before, after, names: Optional[List[str]] = None) -> pd.DataFrame:
    """Per-category mean probability before and after, plus the largest change"""
    before, after = _as_categorical(before), _as_categorical(after)
    axes = tuple(range(before.ndim))
    delta = np.abs(after.data - before.data)
    return pd.DataFrame({
        "category": category_names(before.channels, names),
        "mean before": before.data.mean(axis=axes),
        "mean after": after.data.mean(axis=axes),
        "max |change|": delta.max(axis=axes),
    })
