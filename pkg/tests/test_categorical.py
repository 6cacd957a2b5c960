"""
Tests for categorical.py image types, validation and conversions
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from categorical import (  # noqa: E402
    CategoricalImage,
    CrispImage,
    DirichletImage,
    argmax_labels,
    dirichlet_expectation,
    ensure_valid,
    entropy_map,
    finalize,
    magnitude_map,
    membership,
    one_hot,
    renormalize,
    support_sets,
    track_drift,
    validate,
)
from constants import BOTTOM, TOP  # noqa: E402
from errors import CategoryError, ImageValidationError  # noqa: E402


class TestValueTypes:
    """Construction-time layout checks"""

    @pytest.mark.unit
    def test_categorical_shape_accessors(self, uniform_image):
        assert uniform_image.shape == (4, 4)
        assert uniform_image.ndim == 2
        assert uniform_image.channels == 3
        np.testing.assert_allclose(uniform_image.omega(0), np.full((4, 4), 2.0 / 3.0))

    @pytest.mark.unit
    def test_images_are_read_only(self, uniform_image):
        with pytest.raises(ValueError):
            uniform_image.data[0, 0, 0] = 1.0

    @pytest.mark.unit
    def test_single_channel_rejected(self):
        with pytest.raises(ImageValidationError):
            CategoricalImage(np.ones((3, 1)))

    @pytest.mark.unit
    def test_rank_four_rejected(self):
        with pytest.raises(ImageValidationError):
            CategoricalImage(np.full((2, 2, 2, 2, 2), 0.5))

    @pytest.mark.unit
    def test_non_finite_rejected(self):
        data = np.full((3, 2), 0.5)
        data[1, 0] = np.nan
        with pytest.raises(ImageValidationError) as excinfo:
            CategoricalImage(data)
        assert excinfo.value.index == (1,)

    @pytest.mark.unit
    def test_dirichlet_requires_positive_values(self):
        with pytest.raises(ImageValidationError) as excinfo:
            DirichletImage(np.array([[1.0, 1.0], [0.0, 2.0]]))
        assert excinfo.value.index == (1,)

    @pytest.mark.unit
    def test_crisp_label_range(self):
        with pytest.raises(CategoryError):
            CrispImage(np.array([0, 3]), 3)

    @pytest.mark.unit
    def test_crisp_sentinels_only_when_allowed(self):
        with pytest.raises(CategoryError):
            CrispImage(np.array([BOTTOM, 0]), 2)
        crisp = CrispImage(np.array([BOTTOM, 0, TOP]), 2, allow_sentinels=True)
        assert crisp.data.tolist() == [BOTTOM, 0, TOP]

    @pytest.mark.unit
    def test_set_mode_bits_below_category_count(self):
        with pytest.raises(CategoryError):
            CrispImage(np.array([0b100], dtype=np.uint64), 2, mode="set")

    @pytest.mark.unit
    def test_from_sets_round_trip(self):
        crisp = CrispImage.from_sets([[0], [], [0, 1]], 2)
        assert crisp.to_sets().tolist() == [frozenset({0}), frozenset(), frozenset({0, 1})]


class TestValidate:
    """Simplex validation reports"""

    @pytest.mark.unit
    def test_uniform_is_ok(self, uniform_image):
        report = validate(uniform_image, 1e-6)
        assert report.ok
        assert bool(report)

    @pytest.mark.unit
    def test_sum_violation_reports_pixel_and_defect(self):
        img = CategoricalImage(np.array([[0.5, 0.5], [0.5, 0.6]]))
        report = validate(img, 1e-6)
        assert not report
        assert report.index == (1,)
        assert report.defect == pytest.approx(0.1)

    @pytest.mark.unit
    def test_within_tolerance(self):
        img = CategoricalImage(np.array([[1.0000005, -0.0000005, 0.0]]))
        assert validate(img, 1e-6).ok

    @pytest.mark.unit
    def test_negative_value_reported(self):
        img = CategoricalImage(np.array([[1.1, -0.1]]))
        report = validate(img)
        assert not report.ok
        assert "negative" in report.reason

    @pytest.mark.unit
    def test_ensure_valid_raises_with_index(self):
        img = CategoricalImage(np.array([[[0.5, 0.5], [0.2, 0.2]]]))
        with pytest.raises(ImageValidationError) as excinfo:
            ensure_valid(img)
        assert excinfo.value.index == (0, 1)

    @pytest.mark.unit
    def test_one_hot_always_valid(self, rng):
        labels = rng.integers(0, 4, size=(6, 5))
        assert validate(one_hot(labels, 4)).ok


class TestConversions:
    """one_hot, argmax_labels, dirichlet_expectation, support_sets"""

    @pytest.mark.unit
    def test_one_hot_examples(self):
        np.testing.assert_array_equal(
            one_hot([0, 2, 1], 3).data,
            [[1, 0, 0], [0, 0, 1], [0, 1, 0]],
        )
        np.testing.assert_array_equal(one_hot([0], 2).data, [[1, 0]])

    @pytest.mark.unit
    def test_one_hot_out_of_range(self):
        with pytest.raises(CategoryError):
            one_hot([3], 3)

    @pytest.mark.unit
    def test_one_hot_rejects_sentinels(self):
        crisp = CrispImage(np.array([0, BOTTOM]), 2, allow_sentinels=True)
        with pytest.raises(CategoryError):
            one_hot(crisp, 2)

    @pytest.mark.unit
    def test_argmax_examples(self):
        assert argmax_labels(CategoricalImage(np.array([[0.2, 0.7, 0.1]]))).data.tolist() == [1]
        assert argmax_labels(CategoricalImage(np.array([[0.5, 0.5]]))).data.tolist() == [0]

    @pytest.mark.unit
    def test_argmax_inverts_one_hot(self, rng):
        labels = rng.integers(0, 5, size=(7, 9))
        np.testing.assert_array_equal(argmax_labels(one_hot(labels, 5)).data, labels)

    @pytest.mark.unit
    def test_dirichlet_expectation_examples(self):
        img = DirichletImage(np.array([[1.0, 1.0, 1.0], [2.0, 1.0, 1.0]]))
        out = dirichlet_expectation(img)
        np.testing.assert_allclose(out.data[0], [1 / 3, 1 / 3, 1 / 3])
        np.testing.assert_allclose(out.data[1], [0.5, 0.25, 0.25])

    @pytest.mark.unit
    def test_dirichlet_expectation_near_boundary(self):
        out = dirichlet_expectation(DirichletImage(np.array([[1e-6, 1.0]])))
        np.testing.assert_allclose(out.data[0], [1e-6 / (1 + 1e-6), 1 / (1 + 1e-6)])
        assert validate(out, 1e-9).ok

    @pytest.mark.unit
    def test_dirichlet_expectation_always_valid(self, random_dirichlet):
        assert validate(dirichlet_expectation(random_dirichlet), 1e-9).ok

    @pytest.mark.unit
    def test_support_sets_and_membership(self):
        img = CategoricalImage(np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5]]))
        crisp = support_sets(img, threshold=1e-6)
        assert crisp.mode == "set"
        assert crisp.data.tolist() == [0b001, 0b110]
        np.testing.assert_array_equal(membership(crisp), [[True, False, False], [False, True, True]])


class TestDiagnostics:
    """Entropy and magnitude maps"""

    @pytest.mark.unit
    def test_entropy_examples(self):
        assert entropy_map(CategoricalImage(np.array([[1.0, 0.0, 0.0]])))[0] == 0.0
        assert entropy_map(CategoricalImage(np.array([[0.5, 0.5]])))[0] == pytest.approx(np.log(2))
        assert entropy_map(CategoricalImage(np.full((1, 3), 1 / 3)))[0] == pytest.approx(np.log(3))

    @pytest.mark.unit
    def test_entropy_bounds(self, random_image):
        values = entropy_map(random_image)
        assert values.min() >= 0.0
        assert values.max() <= np.log(3) + 1e-12

    @pytest.mark.unit
    def test_magnitude_examples(self):
        img = DirichletImage(np.array([[3.0, 4.0, 1e-9], [1.0, 1.0, 1.0], [2.0, 1.0, 1.0]]))
        np.testing.assert_allclose(magnitude_map(img), [5.0, np.sqrt(3), np.sqrt(6)], rtol=1e-9)


class TestRenormalize:
    """Renormalization keeps fixed channels and records drift"""

    @pytest.mark.unit
    def test_fixed_channel_is_bit_identical(self, rng):
        data = rng.uniform(0.0, 1.0, size=(5, 5, 4))
        data[..., 1] = 0.3
        out, drift = renormalize(data, fixed=[1])
        np.testing.assert_array_equal(out[..., 1], data[..., 1])
        np.testing.assert_allclose(out.sum(axis=-1), 1.0)
        assert drift == pytest.approx(np.abs(data.sum(axis=-1) - 1).max())

    @pytest.mark.unit
    def test_free_ratios_preserved(self):
        data = np.array([[0.5, 0.2, 0.4]])
        out, _ = renormalize(data, fixed=[0])
        assert out[0, 1] / out[0, 2] == pytest.approx(0.5)
        assert out[0].sum() == pytest.approx(1.0)

    @pytest.mark.unit
    def test_tiny_negatives_clamped(self):
        out, _ = renormalize(np.array([[1.0, -5e-10]]))
        assert out.min() == 0.0

    @pytest.mark.unit
    def test_large_negative_raises(self):
        with pytest.raises(ImageValidationError):
            renormalize(np.array([[1.0, -1e-6]]))

    @pytest.mark.unit
    def test_track_drift_collects_records(self):
        with track_drift() as tracker:
            finalize(np.array([[0.5, 0.5 + 1e-12]]), fixed=[0], operation="demo")
        assert tracker.records[0][0] == "demo"
        assert 0 < tracker.max_drift < 1e-11

    @pytest.mark.unit
    def test_renormalize_can_be_disabled(self, fresh_config):
        fresh_config.setenv("RENORMALIZE", "false")
        from utils.config import get_config

        get_config(reload=True)
        out = finalize(np.array([[0.25, 0.5]]), fixed=[], operation="demo")
        np.testing.assert_array_equal(out.data, [[0.25, 0.5]])
