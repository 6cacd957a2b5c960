"""
Crisp categorical morphologies used as baselines

- set mode:   union / intersection of category bit sets
- label mode: single labels with BOTTOM (no category) and TOP (conflict)
- n-ary:      single-category dilation / erosion with a nearest-pixel rule
              for pixels that lose category i

All neighborhoods follow the y - x in B convention of the grayscale module;
for symmetric balls this is the same as the V(x) = {f(x - y)} form.
"""

from typing import Optional, Sequence

import numpy as np

from categorical import CrispImage, check_category
from constants import BOTTOM, NORM_EUCLIDEAN, TOP
from errors import AmbiguousThetaError, CategoryError
from grayscale import neighborhood_reduce, neighborhood_stack
from structuring import StructuringElement, offset_norm
from utils.logger import get_logger

logger = get_logger(__name__)

_ALL_BITS = ~np.uint64(0)
_ABSENT = np.iinfo(np.int64).min


def _require_mode(f: CrispImage, mode: str, sentinels_ok: bool = True) -> None:
    if f.mode != mode:
        raise CategoryError(f"expected a {mode}-mode image, got {f.mode}")
    if not sentinels_ok and np.any(f.data < 0):
        raise CategoryError("n-ary operations need labels without BOTTOM/TOP")


# =============================================================================
# Set mode
# =============================================================================

def set_dilate(f: CrispImage, se: StructuringElement) -> CrispImage:
    """Union of the category sets over the neighborhood"""
    _require_mode(f, "set")
    bits = neighborhood_reduce(f.data, se, np.bitwise_or, np.uint64(0), f.ndim)
    return CrispImage(bits, f.categories, mode="set")


def set_erode(f: CrispImage, se: StructuringElement) -> CrispImage:
    """Intersection of the category sets over the neighborhood"""
    _require_mode(f, "set")
    bits = neighborhood_reduce(f.data, se, np.bitwise_and, _ALL_BITS, f.ndim)
    return CrispImage(bits, f.categories, mode="set")


# =============================================================================
# Label mode with sentinels
# =============================================================================

def _label_summary(f: CrispImage, se: StructuringElement):
    stack, valid = neighborhood_stack(f.data, se, f.ndim, _ABSENT)
    is_category = valid & (stack >= 0)
    has_top = np.any(valid & (stack == TOP), axis=0)
    has_bottom = np.any(valid & (stack == BOTTOM), axis=0)
    any_category = is_category.any(axis=0)
    lowest = np.where(is_category, stack, np.iinfo(np.int64).max).min(axis=0)
    highest = np.where(is_category, stack, -1).max(axis=0)
    unique = any_category & (lowest == highest)
    several = any_category & (lowest != highest)
    return lowest, unique, several, has_top, has_bottom


def label_dilate(f: CrispImage, se: StructuringElement) -> CrispImage:
    """
    TOP if TOP is present or several categories meet, the category if exactly
    one is present, otherwise BOTTOM
    """
    _require_mode(f, "label")
    lowest, unique, several, has_top, _ = _label_summary(f, se)
    out = np.where(has_top | several, TOP, np.where(unique, lowest, BOTTOM))
    return CrispImage(out, f.categories, allow_sentinels=True)


def label_erode(f: CrispImage, se: StructuringElement) -> CrispImage:
    """
    BOTTOM if BOTTOM is present or several categories meet, the category if
    exactly one is present, otherwise TOP
    """
    _require_mode(f, "label")
    lowest, unique, several, _, has_bottom = _label_summary(f, se)
    out = np.where(has_bottom | several, BOTTOM, np.where(unique, lowest, TOP))
    return CrispImage(out, f.categories, allow_sentinels=True)


# =============================================================================
# N-ary
# =============================================================================

def nary_dilate(f: CrispImage, i: int, se: StructuringElement) -> CrispImage:
    """Pixels with category i anywhere in their neighborhood become i"""
    _require_mode(f, "label", sentinels_ok=False)
    i = check_category(i, f.categories)
    reached = neighborhood_reduce(f.data == i, se, np.logical_or, False, f.ndim)
    return CrispImage(np.where(reached, i, f.data), f.categories)


def _theta_norm(se: StructuringElement) -> str:
    return se.norm if se.is_ball else NORM_EUCLIDEAN


def nary_erode(
    f: CrispImage,
    i: int,
    se: StructuringElement,
    ranking: Optional[Sequence[int]] = None,
) -> CrispImage:
    """
    N-ary erosion of category i

    Pixels not labelled i keep their label, pixels whose whole neighborhood is
    i stay i, and the rest take the label of the closest non-i neighbor (in
    the SE's norm; Euclidean for offset lists). Equally close labels are
    resolved by `ranking` (earlier entries win).

    Raises:
        AmbiguousThetaError: equally close labels and no ranking covering them
    """
    _require_mode(f, "label", sentinels_ok=False)
    i = check_category(i, f.categories)
    if ranking is not None:
        ranking = [check_category(k, f.categories) for k in ranking]

    stack, valid = neighborhood_stack(f.data, se, f.ndim, _ABSENT)
    other = valid & (stack != i)
    needs_theta = (f.data == i) & other.any(axis=0)

    out = f.data.copy()
    if not np.any(needs_theta):
        return CrispImage(out, f.categories)

    distances = offset_norm(se.offsets(f.ndim), _theta_norm(se))
    dist = np.where(other, distances.reshape((-1,) + (1,) * f.ndim), np.inf)
    nearest = dist.min(axis=0)
    at_nearest = other & np.isclose(dist, nearest[None], rtol=0.0, atol=1e-9)

    for x in (tuple(int(v) for v in p) for p in np.argwhere(needs_theta)):
        candidates = set(int(v) for v in stack[(slice(None),) + x][at_nearest[(slice(None),) + x]])
        if len(candidates) == 1:
            out[x] = candidates.pop()
            continue
        ranked = [k for k in (ranking or []) if k in candidates]
        if not ranked:
            raise AmbiguousThetaError(x, candidates)
        out[x] = ranked[0]

    logger.debug("nary_erode: %d pixels resolved by nearest label", int(needs_theta.sum()))
    return CrispImage(out, f.categories)
