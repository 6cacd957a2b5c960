"""
Tests for grayscale.py flat morphology
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from errors import ImageValidationError, StructuringElementError  # noqa: E402
from grayscale import (  # noqa: E402
    closing,
    dilate,
    dilate_naive,
    erode,
    erode_naive,
    extremum_filter,
    opening,
)
from structuring import StructuringElement  # noqa: E402

CITY1 = StructuringElement.ball(1, "city-block")
BALLS = [
    StructuringElement.ball(1, "city-block"),
    StructuringElement.ball(2, "city-block"),
    StructuringElement.ball(1, "chessboard"),
    StructuringElement.ball(2, "chessboard"),
    StructuringElement.ball(1.5, "euclidean"),
    StructuringElement.ball(3, "euclidean"),
]


class TestExamples:
    """Hand-checked 1-D cases"""

    @pytest.mark.unit
    def test_dilate_line(self):
        np.testing.assert_array_equal(dilate(np.array([0.2, 0.8, 0.5]), CITY1), [0.8, 0.8, 0.8])

    @pytest.mark.unit
    def test_erode_line(self):
        np.testing.assert_array_equal(erode(np.array([0.2, 0.8, 0.5]), CITY1), [0.2, 0.2, 0.5])

    @pytest.mark.unit
    def test_binary_dilation(self):
        np.testing.assert_array_equal(dilate(np.array([0.0, 1.0, 0.0, 0.0]), CITY1), [1, 1, 1, 0])

    @pytest.mark.unit
    def test_identity_se(self, rng):
        f = rng.random((5, 6))
        identity = StructuringElement.identity(2)
        np.testing.assert_array_equal(dilate(f, identity), f)
        np.testing.assert_array_equal(erode(f, identity), f)

    @pytest.mark.unit
    def test_constant_field_unchanged(self):
        f = np.full((4, 4), 0.3)
        np.testing.assert_array_equal(erode(f, BALLS[3]), f)
        np.testing.assert_array_equal(dilate(f, BALLS[4]), f)

    @pytest.mark.unit
    def test_opening_removes_isolated_peak(self):
        f = np.zeros((5, 5))
        f[2, 2] = 1.0
        np.testing.assert_array_equal(opening(f, CITY1), np.zeros((5, 5)))

    @pytest.mark.unit
    def test_closing_fills_isolated_hole(self):
        f = np.ones((5, 5))
        f[2, 2] = 0.0
        np.testing.assert_array_equal(closing(f, CITY1), np.ones((5, 5)))

    @pytest.mark.unit
    def test_channels_filtered_independently(self, rng):
        stack = rng.random((6, 6, 3))
        out = extremum_filter(stack, CITY1, "max", ndim=2)
        for k in range(3):
            np.testing.assert_array_equal(out[..., k], dilate(stack[..., k], CITY1))


class TestErrors:
    """Boundary and input errors"""

    @pytest.mark.unit
    def test_empty_neighborhood_names_pixel(self):
        se = StructuringElement.from_offsets([(1,)])
        with pytest.raises(StructuringElementError) as excinfo:
            dilate(np.array([1.0, 2.0, 3.0]), se)
        assert excinfo.value.index == (2,)

    @pytest.mark.unit
    def test_shifted_se_without_origin(self):
        se = StructuringElement.from_offsets([(-1,), (1,)])
        np.testing.assert_array_equal(dilate(np.array([1.0, 5.0, 3.0]), se), [5.0, 3.0, 5.0])

    @pytest.mark.unit
    def test_non_finite_rejected(self):
        with pytest.raises(ImageValidationError):
            erode(np.array([0.0, np.inf]), CITY1)

    @pytest.mark.unit
    def test_separable_needs_chessboard(self):
        with pytest.raises(StructuringElementError):
            dilate(np.zeros((3, 3)), CITY1, engine="separable")


class TestLaws:
    """Adjunction, duality, idempotence and engine equivalence"""

    @pytest.mark.laws
    @pytest.mark.parametrize("se", BALLS, ids=lambda se: se.describe())
    def test_adjunction(self, rng, se):
        for trial in range(100):
            f = rng.random((8, 8))
            g = dilate(f, se)
            if trial % 2:
                g = g.copy()
                g[tuple(rng.integers(0, 8, size=2))] -= rng.random() * 0.5
            lhs = bool(np.all(dilate(f, se) <= g))
            rhs = bool(np.all(f <= erode(g, se)))
            assert lhs == rhs

    @pytest.mark.laws
    @pytest.mark.parametrize("se", BALLS, ids=lambda se: se.describe())
    def test_erode_dilate_extensive(self, rng, se):
        f = rng.random((8, 8))
        assert np.all(erode(dilate(f, se), se) >= f)
        assert np.all(dilate(erode(f, se), se) <= f)

    @pytest.mark.laws
    @pytest.mark.parametrize("se", BALLS, ids=lambda se: se.describe())
    def test_duality(self, rng, se):
        f = rng.random((8, 8))
        np.testing.assert_array_equal(erode(f, se), -dilate(-f, se))

    @pytest.mark.laws
    @pytest.mark.parametrize("se", BALLS, ids=lambda se: se.describe())
    def test_idempotence(self, rng, se):
        f = rng.random((8, 8))
        np.testing.assert_array_equal(opening(opening(f, se), se), opening(f, se))
        np.testing.assert_array_equal(closing(closing(f, se), se), closing(f, se))

    @pytest.mark.laws
    @pytest.mark.parametrize(
        "se",
        BALLS + [StructuringElement.from_offsets([(0, 0), (0, 2), (-1, 1)])],
        ids=lambda se: se.describe(),
    )
    def test_engines_bit_exact(self, rng, se):
        f = rng.random((16, 16))
        np.testing.assert_array_equal(dilate(f, se), dilate_naive(f, se))
        np.testing.assert_array_equal(erode(f, se), erode_naive(f, se))
        np.testing.assert_array_equal(dilate(f, se, engine="shift"), dilate_naive(f, se))

    @pytest.mark.laws
    @pytest.mark.parametrize("radius", [1, 2, 3])
    def test_separable_matches_shift(self, rng, radius):
        se = StructuringElement.ball(radius, "chessboard")
        f = rng.random((12, 9))
        np.testing.assert_array_equal(
            dilate(f, se, engine="separable"), dilate(f, se, engine="shift")
        )
        np.testing.assert_array_equal(
            erode(f, se, engine="separable"), erode(f, se, engine="shift")
        )
