"""
Tests for imaging.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent.parent))

from categorical import CategoricalImage, CrispImage, DirichletImage, one_hot  # noqa: E402
from constants import BOTTOM, TOP  # noqa: E402
from errors import ImageValidationError, PaletteError  # noqa: E402
from imaging import (  # noqa: E402
    as_raster,
    count_components,
    default_palette,
    import_png_labels,
    labels_from_rgb,
    parse_color,
    parse_palette,
    quantize,
    render,
    render_labels,
    save_png,
)

RED, GREEN, BLUE = (255, 0, 0), (0, 255, 0), (0, 0, 255)


def write_mask(path, rgb):
    Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(path)
    return path


class TestPalettes:
    """Colour parsing"""

    @pytest.mark.unit
    def test_parse_color_forms(self):
        assert parse_color("#1f77b4") == (31, 119, 180)
        assert parse_color(" 1, 2, 3 ") == (1, 2, 3)

    @pytest.mark.unit
    @pytest.mark.parametrize("text", ["#12345", "1,2", "256,0,0", "red"])
    def test_parse_color_rejects(self, text):
        with pytest.raises(PaletteError):
            parse_color(text)

    @pytest.mark.unit
    def test_parse_palette(self):
        assert parse_palette("#ff0000;0,255,0;") == [RED, GREEN]
        with pytest.raises(PaletteError):
            parse_palette(" ; ")

    @pytest.mark.unit
    def test_default_palettes(self):
        assert default_palette(3) == [RED, GREEN, BLUE]
        assert len(default_palette(5)) == 5
        with pytest.raises(PaletteError):
            default_palette(100)


class TestImport:
    """import_png_labels / labels_from_rgb"""

    @pytest.mark.unit
    def test_two_colour_mask(self, tmp_path):
        rgb = [[RED, GREEN], [GREEN, GREEN]]
        f = import_png_labels(write_mask(tmp_path / "m.png", rgb), [RED, GREEN])
        np.testing.assert_array_equal(f.data, one_hot(np.array([[0, 1], [1, 1]]), 2).data)

    @pytest.mark.unit
    def test_unmapped_colour_reports_location(self, tmp_path):
        rgb = [[RED, GREEN], [BLUE, GREEN]]
        with pytest.raises(PaletteError) as info:
            import_png_labels(write_mask(tmp_path / "m.png", rgb), [RED, GREEN])
        assert info.value.color == BLUE
        assert info.value.index == (1, 0)

    @pytest.mark.unit
    def test_palette_permutation_permutes_channels(self):
        rgb = np.array([[RED, GREEN, BLUE]], dtype=np.uint8)
        a = one_hot(labels_from_rgb(rgb, [RED, GREEN, BLUE]), 3).data
        b = one_hot(labels_from_rgb(rgb, [BLUE, RED, GREEN]), 3).data
        np.testing.assert_array_equal(b, a[..., [2, 0, 1]])

    @pytest.mark.unit
    def test_mapping_palette(self):
        rgb = np.array([[RED, BLUE]], dtype=np.uint8)
        np.testing.assert_array_equal(labels_from_rgb(rgb, {BLUE: 0, RED: 4}), [[4, 0]])

    @pytest.mark.unit
    def test_duplicate_palette_colour(self):
        with pytest.raises(PaletteError):
            labels_from_rgb(np.array([[RED]], dtype=np.uint8), [RED, RED])


class TestRender:
    """render / render_labels / quantize"""

    @pytest.mark.unit
    def test_quantize_rounds_half_up(self):
        np.testing.assert_array_equal(quantize([0.49, 0.5, 84.5, 254.6, 300.0, -3.0]), [0, 1, 85, 255, 255, 0])

    @pytest.mark.unit
    def test_one_hot_pixel_is_palette_colour(self):
        f = one_hot(np.array([[0, 1, 2]]), 3)
        np.testing.assert_array_equal(render(f), [[RED, GREEN, BLUE]])

    @pytest.mark.unit
    def test_uniform_mixture_is_mid_gray(self, uniform_image):
        out = render(uniform_image)
        assert out.dtype == np.uint8
        assert np.all(out == 85)

    @pytest.mark.unit
    def test_palette_size_mismatch(self, uniform_image):
        with pytest.raises(PaletteError):
            render(uniform_image, "rgb-mixture", [RED, GREEN])

    @pytest.mark.unit
    def test_entropy_of_one_hot_is_black(self):
        f = one_hot(np.array([[0, 2], [1, 1]]), 3)
        assert np.all(render(f, "entropy") == 0)

    @pytest.mark.unit
    def test_entropy_of_uniform_is_white(self, uniform_image):
        assert np.all(render(uniform_image, "entropy") == 255)

    @pytest.mark.unit
    def test_magnitude_needs_dirichlet(self, uniform_image):
        with pytest.raises(ImageValidationError):
            render(uniform_image, "magnitude")
        out = render(DirichletImage(np.array([[[3.0, 4.0], [0.6, 0.8]]])), "magnitude")
        np.testing.assert_array_equal(out, [[255, 51]])

    @pytest.mark.unit
    def test_dirichlet_shown_through_expectation(self):
        alpha = DirichletImage(np.array([[[2.0, 2.0, 2.0]]]))
        assert np.all(render(alpha) == 85)

    @pytest.mark.unit
    def test_argmax_style(self):
        f = CategoricalImage(np.array([[[0.2, 0.5, 0.3], [0.6, 0.2, 0.2]]]))
        np.testing.assert_array_equal(render(f, "argmax"), [[GREEN, RED]])

    @pytest.mark.unit
    def test_unknown_style(self, uniform_image):
        with pytest.raises(ValueError):
            render(uniform_image, "sepia")

    @pytest.mark.unit
    def test_sentinel_colours(self):
        labels = CrispImage(np.array([[0, BOTTOM, TOP]]), 3, allow_sentinels=True)
        np.testing.assert_array_equal(render_labels(labels), [[RED, (0, 0, 0), (64, 64, 64)]])

    @pytest.mark.unit
    def test_save_png(self, tmp_path, uniform_image):
        path = save_png(render(uniform_image), tmp_path / "out" / "u.png")
        with Image.open(path) as image:
            assert image.size == (4, 4)
        with pytest.raises(ImageValidationError):
            save_png(np.zeros((2, 2, 2, 3)), tmp_path / "bad.png")

    @pytest.mark.unit
    def test_save_png_writes_1d_colour_view_as_one_row(self, tmp_path):
        line = one_hot(np.array([0, 1, 2]), 3)
        path = save_png(render(line, "argmax"), tmp_path / "line.png", rank=1)
        with Image.open(path) as image:
            assert image.mode == "RGB"
            assert image.size == (3, 1)
            assert list(image.getdata()) == [RED, GREEN, BLUE]

    @pytest.mark.unit
    def test_save_png_writes_1d_grayscale_view_as_one_row(self, tmp_path):
        line = one_hot(np.array([0, 1, 2, 0]), 3)
        path = save_png(render(line, "entropy"), tmp_path / "entropy.png")
        with Image.open(path) as image:
            assert image.mode == "L"
            assert image.size == (4, 1)

    @pytest.mark.unit
    def test_as_raster_rejects_non_rgb_colour_axis(self):
        with pytest.raises(ImageValidationError, match="3 channels"):
            as_raster(np.zeros((4, 4, 2), dtype=np.uint8))
        with pytest.raises(ImageValidationError):
            as_raster(np.zeros((5, 4), dtype=np.uint8), rank=1)


class TestComponents:
    """count_components"""

    @pytest.mark.unit
    def test_edge_versus_full_connectivity(self):
        labels = np.array([
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 2],
        ])
        assert count_components(labels, 1) == 2
        assert count_components(labels, 1, connectivity=2) == 1
        assert count_components(labels, 3) == 0
