"""
Tests for structuring.py
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from errors import StructuringElementError  # noqa: E402
from structuring import StructuringElement, offset_norm  # noqa: E402


class TestBalls:
    """Ball materialization per norm"""

    @pytest.mark.unit
    @pytest.mark.parametrize(
        "radius,norm,count",
        [
            (1, "city-block", 5),
            (1, "chessboard", 9),
            (1, "euclidean", 5),
            (np.sqrt(2), "euclidean", 9),
            (2, "euclidean", 13),
            (2, "city-block", 13),
            (2, "chessboard", 25),
        ],
    )
    def test_offset_counts_2d(self, radius, norm, count):
        assert len(StructuringElement.ball(radius, norm).offsets(2)) == count

    @pytest.mark.unit
    def test_1d_balls_agree(self):
        for norm in ("euclidean", "city-block", "chessboard"):
            offsets = StructuringElement.ball(2, norm).offsets(1)
            assert sorted(offsets[:, 0].tolist()) == [-2, -1, 0, 1, 2]

    @pytest.mark.unit
    def test_offsets_within_radius(self):
        se = StructuringElement.ball(2.5, "euclidean")
        assert offset_norm(se.offsets(2), "euclidean").max() <= 2.5

    @pytest.mark.unit
    def test_invalid_balls(self):
        with pytest.raises(StructuringElementError):
            StructuringElement.ball(0)
        with pytest.raises(StructuringElementError):
            StructuringElement.ball(np.inf)
        with pytest.raises(StructuringElementError):
            StructuringElement.ball(1, norm="manhattan")

    @pytest.mark.unit
    def test_ball_contains_origin_and_is_symmetric(self):
        se = StructuringElement.ball(1.5, "city-block")
        assert se.contains_origin(2)
        assert se.is_symmetric(2)
        assert se.reflect() is se


class TestLadder:
    """Radii at which a ball grows"""

    @pytest.mark.unit
    def test_integer_ladder(self):
        assert StructuringElement.ball(3, "city-block").ladder(2) == (1.0, 2.0, 3.0)
        assert StructuringElement.ball(2.5, "chessboard").ladder(2) == (1.0, 2.0)

    @pytest.mark.unit
    def test_euclidean_ladder(self):
        ladder = StructuringElement.ball(2, "euclidean").ladder(2)
        np.testing.assert_allclose(ladder, [1.0, np.sqrt(2), 2.0])

    @pytest.mark.unit
    def test_ladder_needs_ball(self):
        with pytest.raises(StructuringElementError):
            StructuringElement.from_offsets([(0,), (1,)]).ladder(1)


class TestExplicitOffsets:
    """Offset-list structuring elements"""

    @pytest.mark.unit
    def test_sorted_and_deduplicated(self):
        se = StructuringElement.from_offsets([(1, 0), (0, 0), (1, 0)])
        assert se.offsets(2).tolist() == [[0, 0], [1, 0]]

    @pytest.mark.unit
    def test_empty_and_mixed_rank_rejected(self):
        with pytest.raises(StructuringElementError):
            StructuringElement.from_offsets([])
        with pytest.raises(StructuringElementError):
            StructuringElement.from_offsets([(0,), (0, 1)])

    @pytest.mark.unit
    def test_rank_mismatch(self):
        with pytest.raises(StructuringElementError):
            StructuringElement.from_offsets([(0, 1)]).offsets(1)

    @pytest.mark.unit
    def test_reflection(self):
        se = StructuringElement.from_offsets([(0,), (2,)])
        assert not se.is_symmetric(1)
        assert se.reflect().offsets(1)[:, 0].tolist() == [-2, 0]

    @pytest.mark.unit
    def test_identity(self):
        se = StructuringElement.identity(2)
        assert se.offsets(2).tolist() == [[0, 0]]
        assert se.contains_origin(2)
