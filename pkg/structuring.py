"""
Flat structuring elements

A structuring element (SE) is either a discrete ball B_r = {y : ||y||_norm <= r}
under one of three norms, or an explicit list of integer offsets. Balls are
dimension-agnostic and materialize their offsets for a given rank on demand.

Usage:
    from structuring import StructuringElement

    se = StructuringElement.ball(2, norm="city-block")
    se.offsets(2)        # (13, 2) int array
    se.ladder(2)         # (1.0, 2.0)
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from constants import (
    EUCLIDEAN_SLACK,
    NORM_CHESSBOARD,
    NORM_CITY_BLOCK,
    NORM_EUCLIDEAN,
    NORMS,
)
from errors import StructuringElementError


def offset_norm(offsets: np.ndarray, norm: str) -> np.ndarray:
    """Norm of each row of an (m, d) offset array"""
    offsets = np.asarray(offsets, dtype=float)
    if norm == NORM_EUCLIDEAN:
        return np.sqrt((offsets ** 2).sum(axis=-1))
    if norm == NORM_CITY_BLOCK:
        return np.abs(offsets).sum(axis=-1)
    if norm == NORM_CHESSBOARD:
        return np.abs(offsets).max(axis=-1, initial=0.0)
    raise StructuringElementError(f"unknown norm {norm!r}, expected one of {NORMS}")


@lru_cache(maxsize=256)
def _ball_offsets(radius: float, norm: str, ndim: int) -> np.ndarray:
    extent = int(np.floor(radius + EUCLIDEAN_SLACK))
    axes = [np.arange(-extent, extent + 1)] * ndim
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, ndim)
    keep = offset_norm(grid, norm) <= radius + EUCLIDEAN_SLACK
    offsets = grid[keep]
    offsets.setflags(write=False)
    return offsets


@lru_cache(maxsize=256)
def _ladder(radius: float, norm: str, ndim: int) -> Tuple[float, ...]:
    if norm in (NORM_CITY_BLOCK, NORM_CHESSBOARD):
        top = int(np.floor(radius + EUCLIDEAN_SLACK))
        return tuple(float(r) for r in range(1, top + 1))
    # Euclidean: the ball only changes at the distinct offset norms
    norms = offset_norm(_ball_offsets(radius, norm, ndim), norm)
    return tuple(float(r) for r in np.unique(norms[norms > 0]))


@dataclass(frozen=True)
class StructuringElement:
    """Flat neighborhood B, a ball or an explicit offset list"""

    kind: str
    radius: float = 0.0
    norm: str = NORM_EUCLIDEAN
    explicit: Optional[Tuple[Tuple[int, ...], ...]] = None

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def ball(cls, radius: float, norm: str = NORM_EUCLIDEAN) -> "StructuringElement":
        """Closed ball of `radius` centered at the origin"""
        if norm not in NORMS:
            raise StructuringElementError(f"unknown norm {norm!r}, expected one of {NORMS}")
        if not np.isfinite(radius) or radius <= 0:
            raise StructuringElementError(f"ball radius must be finite and > 0, got {radius}")
        return cls(kind="ball", radius=float(radius), norm=norm)

    @classmethod
    def from_offsets(cls, offsets: Iterable[Sequence[int]]) -> "StructuringElement":
        """Explicit SE; the origin is only included if listed"""
        rows = tuple(tuple(int(v) for v in row) for row in offsets)
        if not rows:
            raise StructuringElementError("offset list must be non-empty")
        ranks = {len(row) for row in rows}
        if len(ranks) != 1:
            raise StructuringElementError(f"offsets have mixed ranks {sorted(ranks)}")
        return cls(kind="offsets", explicit=tuple(sorted(set(rows))))

    @classmethod
    def identity(cls, ndim: int) -> "StructuringElement":
        """B = {0}"""
        return cls.from_offsets([(0,) * ndim])

    # ------------------------------------------------------------------
    # Materialization
    # ------------------------------------------------------------------

    @property
    def is_ball(self) -> bool:
        return self.kind == "ball"

    def offsets(self, ndim: int) -> np.ndarray:
        """(m, ndim) integer offsets of B"""
        if self.is_ball:
            return _ball_offsets(self.radius, self.norm, ndim)
        offsets = np.array(self.explicit, dtype=int)
        if offsets.shape[1] != ndim:
            raise StructuringElementError(f"SE has rank {offsets.shape[1]}, image has rank {ndim}")
        return offsets

    def contains_origin(self, ndim: int) -> bool:
        return bool(np.any(np.all(self.offsets(ndim) == 0, axis=1)))

    def reflect(self) -> "StructuringElement":
        """-B; balls are their own reflection"""
        if self.is_ball:
            return self
        return StructuringElement.from_offsets([tuple(-v for v in row) for row in self.explicit])

    def is_symmetric(self, ndim: int) -> bool:
        own = {tuple(row) for row in self.offsets(ndim).tolist()}
        return own == {tuple(-v for v in row) for row in own}

    def with_radius(self, radius: float) -> "StructuringElement":
        """Ball of the same norm with another radius"""
        self.require_ball("a radius ladder")
        return StructuringElement.ball(radius, self.norm)

    def ladder(self, ndim: int) -> Tuple[float, ...]:
        """
        Radii at which the ball grows, up to this ball's radius

        City-block and chessboard balls grow at the integers; Euclidean balls at
        the distinct norms of integer offsets.
        """
        self.require_ball("a radius ladder")
        return _ladder(self.radius, self.norm, ndim)

    def require_ball(self, purpose: str) -> None:
        if not self.is_ball:
            raise StructuringElementError(f"{purpose} needs a ball structuring element, got explicit offsets")

    def describe(self) -> str:
        if self.is_ball:
            return f"ball(r={self.radius:g}, {self.norm})"
        return f"offsets({len(self.explicit)})"
