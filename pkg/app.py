"""
Categorical Morphology Explorer
A Streamlit application for applying one morphology step to a categorical or
Dirichlet image and comparing the result with the input
"""

from typing import Optional, Tuple

import streamlit as st

from catd import decode_catd, encode_catd
from categorical import CategoricalImage, DirichletImage
from constants import ANNOTATOR_CATEGORIES, DENOISE_CATEGORIES
from errors import CatMorphError
from imaging import default_palette
from pipeline import PipelineSpec, run_pipeline
from synthetic import SYNTHETIC_FIXTURES, make_fixture
from ui import (
    apply_custom_css,
    build_step,
    category_names,
    channel_figure,
    entropy_figure,
    legend_html,
    render_header,
    render_info_box,
    render_metrics_row,
    render_operation_controls,
    rgb_figure,
    summary_frame,
)
from utils.logger import get_logger

logger = get_logger(__name__)

FIXTURE_NAMES = {
    "noisy-blobs": DENOISE_CATEGORIES,
    "annotators": ANNOTATOR_CATEGORIES,
}


@st.cache_data
def load_fixture_bytes(name: str, seed: int) -> bytes:
    """Synthetic fixture as CATD bytes (cached per name and seed)"""
    return encode_catd(make_fixture(name, seed))


def load_image(payload: bytes):
    """
    Decode an uploaded or generated CATD payload

    Raises:
        CatMorphError: malformed file, off-simplex data, a scalar payload, or
            more categories than the default palette covers
    """
    image = decode_catd(payload)
    if not isinstance(image, (CategoricalImage, DirichletImage)):
        raise CatMorphError("the explorer needs a categorical or Dirichlet image, not a scalar payload")
    if image.ndim > 2:
        raise CatMorphError(f"the explorer shows 1-D and 2-D images, got a rank-{image.ndim} image")
    default_palette(image.channels)
    return image


@st.cache_data
def apply_operation(payload: bytes, canonical: str) -> Tuple[bytes, dict]:
    """
    Run one canonical step on a CATD payload

    Returns:
        (result as CATD bytes, log row as a dict)
    """
    result = run_pipeline(PipelineSpec.parse(canonical), load_image(payload))
    return encode_catd(result.image), result.log.iloc[0].to_dict()


def _source(sidebar) -> Tuple[Optional[bytes], Optional[list]]:
    with sidebar:
        st.markdown("### 📂 Image")
        source = st.radio("Source:", ["Synthetic", "Upload CATD"], horizontal=True)
        if source == "Synthetic":
            name = st.selectbox("Fixture:", sorted(SYNTHETIC_FIXTURES))
            seed = st.number_input("Seed:", min_value=0, value=0, step=1)
            return load_fixture_bytes(name, int(seed)), FIXTURE_NAMES.get(name)
        upload = st.file_uploader("CATD file:", type=["catd"])
        return (upload.getvalue() if upload else None), None


def main():
    st.set_page_config(
        page_title="Categorical Morphology Explorer",
        page_icon="🧩",
        layout="wide",
        initial_sidebar_state="expanded"
    )
    apply_custom_css()
    render_header("Categorical Morphology Explorer", "Dilate, erode, open and close one category at a time")

    payload, names = _source(st.sidebar)
    if payload is None:
        st.info("👈 Pick a synthetic fixture or upload a CATD file.")
        return

    try:
        image = load_image(payload)
    except CatMorphError as e:
        render_info_box(f"⚠️ Could not load the image: {e}", "warning")
        return

    controls = render_operation_controls(image.channels, isinstance(image, DirichletImage), names)
    if image.channels <= 8:
        with st.sidebar:
            st.markdown("### 📊 Legend")
            st.markdown(legend_html(category_names(image.channels, names), default_palette(image.channels)),
                        unsafe_allow_html=True)

    try:
        step = build_step(controls)
        result_bytes, row = apply_operation(payload, step.canonical().strip())
    except (ValueError, CatMorphError) as e:
        logger.warning("Step failed: %s", e)
        render_info_box(f"⚠️ {e}", "warning")
        return
    result = decode_catd(result_bytes, validate=False)

    render_metrics_row([
        {'label': "Shape", 'value': " × ".join(str(n) for n in image.shape)},
        {'label': "Categories", 'value': image.channels},
        {'label': "Step time", 'value': f"{row['seconds']:.2f}s"},
        {'label': "Renormalization drift", 'value': f"{row['max_drift']:.1e}"},
    ])
    st.code(step.canonical().strip(), language="text")

    views = st.tabs(["RGB mixture", "Argmax", "Entropy", "Channels"])
    with views[0]:
        left, right = st.columns(2)
        left.plotly_chart(rgb_figure(image, title="Input"), use_container_width=True)
        right.plotly_chart(rgb_figure(result, title="Result"), use_container_width=True)
    with views[1]:
        left, right = st.columns(2)
        left.plotly_chart(rgb_figure(image, "argmax", "Input"), use_container_width=True)
        right.plotly_chart(rgb_figure(result, "argmax", "Result"), use_container_width=True)
    with views[2]:
        left, right = st.columns(2)
        left.plotly_chart(entropy_figure(image, "Input"), use_container_width=True)
        right.plotly_chart(entropy_figure(result, "Result"), use_container_width=True)
    with views[3]:
        labels = category_names(image.channels, names)
        k = st.selectbox("Channel:", range(image.channels), format_func=lambda c: labels[c])
        left, right = st.columns(2)
        left.plotly_chart(channel_figure(image, k, "Input"), use_container_width=True)
        right.plotly_chart(channel_figure(result, k, "Result"), use_container_width=True)

    with st.expander("📊 Per-category summary", expanded=False):
        st.dataframe(summary_frame(image, result, names), hide_index=True)
        st.download_button(
            label="📥 Download result (CATD)",
            data=result_bytes,
            file_name="result.catd",
            mime="application/octet-stream"
        )


if __name__ == "__main__":
    main()
