"""
Image value types for categorical morphology

Three per-pixel value types share one layout: a dense numpy array whose leading
axes are the image shape (rank 1, 2 or 3) and, for the vector types, whose last
axis is the channel axis.

- CategoricalImage: a point of the probability simplex per pixel
- DirichletImage:   a strictly positive parameter vector per pixel
- CrispImage:       one label per pixel (label mode, with optional bottom/top
                    sentinels) or a bit set of categories (set mode)

All images are immutable; operations return new images.
"""

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import entr

from constants import BOTTOM, DRIFT_WARN_LEVEL, MAX_SET_CATEGORIES, NEGATIVE_CLAMP, SIMPLEX_TOL, TOP
from errors import CategoryError, ImageValidationError
from utils.config import get_config
from utils.logger import get_logger

logger = get_logger(__name__)

SUPPORTED_RANKS = (1, 2, 3)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


def _check_shape(shape: Tuple[int, ...]) -> None:
    if len(shape) not in SUPPORTED_RANKS:
        raise ImageValidationError(f"image rank must be one of {SUPPORTED_RANKS}, got {len(shape)}")
    if any(extent < 1 for extent in shape):
        raise ImageValidationError(f"image extents must be >= 1, got {shape}")


# =============================================================================
# Value types
# =============================================================================

@dataclass(frozen=True, eq=False)
class CategoricalImage:
    """
    Per-pixel categorical distributions, data shape = image shape + (channels,)

    Construction checks the layout (rank, extents, channel count, finiteness);
    the simplex invariant itself is checked by `validate` / `ensure_valid` so
    that malformed data can still be loaded and reported on.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim < 2:
            raise ImageValidationError("categorical data needs image axes plus a channel axis")
        _check_shape(data.shape[:-1])
        if data.shape[-1] < 2:
            raise ImageValidationError(f"categorical images need >= 2 channels, got {data.shape[-1]}")
        if not np.all(np.isfinite(data)):
            index = tuple(int(v) for v in np.argwhere(~np.isfinite(data))[0][:-1])
            raise ImageValidationError(f"non-finite probability at pixel {index}", index=index)
        object.__setattr__(self, "data", _frozen(data))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.data.ndim - 1

    @property
    def channels(self) -> int:
        return self.data.shape[-1]

    def channel(self, k: int) -> np.ndarray:
        check_category(k, self.channels)
        return self.data[..., k]

    def omega(self, k: int) -> np.ndarray:
        """1 - f_k, the mass outside category k"""
        return 1.0 - self.channel(k)

    def __repr__(self) -> str:
        return f"CategoricalImage(shape={self.shape}, channels={self.channels})"


@dataclass(frozen=True, eq=False)
class DirichletImage:
    """Per-pixel Dirichlet parameters, every value finite and > 0"""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim < 2:
            raise ImageValidationError("Dirichlet data needs image axes plus a channel axis")
        _check_shape(data.shape[:-1])
        if data.shape[-1] < 2:
            raise ImageValidationError(f"Dirichlet images need order >= 2, got {data.shape[-1]}")
        bad = ~(np.isfinite(data) & (data > 0))
        if np.any(bad):
            where = np.argwhere(bad)[0]
            index = tuple(int(v) for v in where[:-1])
            raise ImageValidationError(
                f"Dirichlet parameter {data[tuple(where)]!r} at pixel {index} is not finite and positive",
                index=index,
            )
        object.__setattr__(self, "data", _frozen(data))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.data.ndim - 1

    @property
    def channels(self) -> int:
        return self.data.shape[-1]

    def __repr__(self) -> str:
        return f"DirichletImage(shape={self.shape}, channels={self.channels})"


@dataclass(frozen=True, eq=False)
class CrispImage:
    """
    One category per pixel

    Label mode stores int64 labels in [0, categories) plus, if allowed, the
    BOTTOM (no category) and TOP (conflicting categories) sentinels. Set mode
    stores a uint64 bit set per pixel; bit k set means category k is present.
    """

    data: np.ndarray
    categories: int
    mode: str = "label"
    allow_sentinels: bool = False

    def __post_init__(self):
        if self.categories < 1:
            raise CategoryError(f"category count must be >= 1, got {self.categories}")
        if self.mode == "label":
            data = np.asarray(self.data)
            if data.size and not np.issubdtype(data.dtype, np.integer):
                if not np.all(np.equal(np.mod(data, 1), 0)):
                    raise CategoryError("label images must hold integers")
            data = data.astype(np.int64)
            _check_shape(data.shape)
            valid = (data >= 0) & (data < self.categories)
            if self.allow_sentinels:
                valid |= (data == BOTTOM) | (data == TOP)
            if not np.all(valid):
                index = tuple(int(v) for v in np.argwhere(~valid)[0])
                raise CategoryError(f"label {data[index]} at pixel {index} outside [0, {self.categories})")
        elif self.mode == "set":
            if self.categories > MAX_SET_CATEGORIES:
                raise CategoryError(f"set mode supports at most {MAX_SET_CATEGORIES} categories")
            data = np.asarray(self.data).astype(np.uint64)
            _check_shape(data.shape)
            if self.categories < MAX_SET_CATEGORIES:
                high = data >> np.uint64(self.categories)
                if np.any(high):
                    index = tuple(int(v) for v in np.argwhere(high != 0)[0])
                    raise CategoryError(f"set at pixel {index} has bits >= {self.categories}")
        else:
            raise CategoryError(f"unknown crisp mode {self.mode!r}")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @classmethod
    def from_sets(cls, sets: Sequence, categories: int) -> "CrispImage":
        """Set-mode image from a list (1-D) or list of rows (2-D) of category collections"""
        rows = list(sets)
        one_d = all(_is_category_collection(pixel) for pixel in rows)
        grid = [rows] if one_d else [list(row) for row in rows]
        bits = np.zeros((len(grid), len(grid[0])), dtype=np.uint64)
        for r, row in enumerate(grid):
            if len(row) != bits.shape[1]:
                raise CategoryError("set rows must all have the same length")
            for c, pixel in enumerate(row):
                for k in pixel:
                    check_category(k, categories)
                    bits[r, c] |= np.uint64(1) << np.uint64(k)
        return cls(bits[0] if one_d else bits, categories, mode="set")

    def to_sets(self) -> np.ndarray:
        """Object array of frozensets (set mode only)"""
        if self.mode != "set":
            raise CategoryError("to_sets needs a set-mode image")
        out = np.empty(self.shape, dtype=object)
        members = membership(self)
        for index in np.ndindex(self.shape):
            out[index] = frozenset(int(k) for k in np.flatnonzero(members[index]))
        return out

    def __repr__(self) -> str:
        return f"CrispImage(mode={self.mode}, shape={self.shape}, categories={self.categories})"


def _is_category_collection(obj) -> bool:
    if isinstance(obj, (set, frozenset)):
        return True
    try:
        return all(isinstance(k, (int, np.integer)) for k in obj)
    except TypeError:
        return False


def check_category(i: int, channels: int) -> int:
    """Validate a category index against a channel count"""
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)):
        raise CategoryError(f"category index must be an integer, got {i!r}")
    if not 0 <= i < channels:
        raise CategoryError(f"category {i} outside [0, {channels})")
    return int(i)


# =============================================================================
# Validation
# =============================================================================

@dataclass(frozen=True)
class ValidationReport:
    """Outcome of `validate`; truthy when the image is on the simplex"""

    ok: bool
    index: Optional[Tuple[int, ...]] = None
    defect: float = 0.0
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return f"violation at pixel {self.index}: {self.reason} (defect {self.defect:.3g})"


def simplex_defect(data: np.ndarray) -> np.ndarray:
    """Per-pixel max(|sum - 1|, largest negative magnitude)"""
    sum_defect = np.abs(data.sum(axis=-1) - 1.0)
    neg_defect = np.maximum(-data.min(axis=-1), 0.0)
    return np.maximum(sum_defect, neg_defect)


def validate(img: CategoricalImage, tol: float = SIMPLEX_TOL) -> ValidationReport:
    """
    Check the simplex invariant: channels >= 0 and summing to 1 within `tol`

    Returns the first violating pixel (C order) and its defect, or ok.
    """
    if tol < 0:
        raise ValueError(f"tolerance must be non-negative, got {tol}")
    defect = simplex_defect(img.data)
    bad = defect > tol
    if not np.any(bad):
        return ValidationReport(ok=True, defect=float(defect.max(initial=0.0)))
    index = tuple(int(v) for v in np.argwhere(bad)[0])
    pixel = img.data[index]
    if pixel.min() < -tol:
        reason = f"negative probability {pixel.min():.3g}"
    else:
        reason = f"channels sum to {pixel.sum():.9g}"
    return ValidationReport(ok=False, index=index, defect=float(defect[index]), reason=reason)


def ensure_valid(img: CategoricalImage, tol: float = SIMPLEX_TOL) -> CategoricalImage:
    """Raise ImageValidationError unless `img` passes `validate`"""
    report = validate(img, tol)
    if not report:
        raise ImageValidationError(report.describe(), index=report.index, defect=report.defect)
    return img


# =============================================================================
# Renormalization and drift tracking
# =============================================================================

@dataclass
class DriftTracker:
    """Collects renormalization drift for every operation run inside `track_drift`"""

    records: List[Tuple[str, float]] = field(default_factory=list)

    @property
    def max_drift(self) -> float:
        return max((drift for _, drift in self.records), default=0.0)


_active_trackers: ContextVar[Tuple[DriftTracker, ...]] = ContextVar("drift_trackers", default=())


@contextmanager
def track_drift() -> Iterator[DriftTracker]:
    """
    Record the renormalization drift of all operations run in this context

    Usage:
        with track_drift() as tracker:
            out = open_i(f, 0, se)
        assert tracker.max_drift <= 1e-9
    """
    tracker = DriftTracker()
    token = _active_trackers.set(_active_trackers.get() + (tracker,))
    try:
        yield tracker
    finally:
        _active_trackers.reset(token)


def renormalize(data: np.ndarray, fixed: Sequence[int] = ()) -> Tuple[np.ndarray, float]:
    """
    Pull per-pixel vectors back onto the simplex

    Negatives down to -1e-9 are clamped to 0 (anything more negative is a bug
    upstream and raises). Channels in `fixed` are left bit-identical; the free
    channels are rescaled to fill 1 - sum(fixed). Without fixed channels every
    channel is divided by the pixel sum.

    Returns:
        (corrected array, max-norm drift |sum - 1| before correction)
    """
    data = np.array(data, dtype=np.float64, copy=True)
    if np.any(data < -NEGATIVE_CLAMP):
        index = tuple(int(v) for v in np.argwhere(data < -NEGATIVE_CLAMP)[0][:-1])
        raise ImageValidationError(f"negative probability {data.min():.3g} after operation", index=index)
    np.maximum(data, 0.0, out=data)

    totals = data.sum(axis=-1)
    drift = float(np.abs(totals - 1.0).max(initial=0.0))

    if not fixed:
        np.divide(data, totals[..., None], out=data, where=totals[..., None] > 0)
        return data, drift

    free = np.ones(data.shape[-1], dtype=bool)
    free[list(fixed)] = False
    target = np.maximum(1.0 - data[..., ~free].sum(axis=-1), 0.0)
    free_sum = data[..., free].sum(axis=-1)
    scale = np.ones_like(free_sum)
    np.divide(target, free_sum, out=scale, where=free_sum > 0)
    data[..., free] *= scale[..., None]
    return data, drift


def finalize(data: np.ndarray, fixed: Sequence[int], operation: str) -> CategoricalImage:
    """Renormalize (if enabled), record drift and wrap the result of an operation"""
    config = get_config()
    if config.RENORMALIZE:
        data, drift = renormalize(data, fixed)
    else:
        drift = float(np.abs(data.sum(axis=-1) - 1.0).max(initial=0.0))

    for tracker in _active_trackers.get():
        tracker.records.append((operation, drift))

    if drift > DRIFT_WARN_LEVEL:
        logger.warning("%s: renormalization drift %.3g exceeds %.1g", operation, drift, DRIFT_WARN_LEVEL)
    else:
        logger.debug("%s: renormalization drift %.3g", operation, drift)
    return CategoricalImage(data)


# =============================================================================
# Conversions
# =============================================================================

def _label_array(labels: Union[CrispImage, np.ndarray, Sequence[int]]) -> np.ndarray:
    if isinstance(labels, CrispImage):
        if labels.mode != "label":
            raise CategoryError("expected a label-mode image")
        return np.asarray(labels.data)
    return np.asarray(labels, dtype=np.int64)


def one_hot(labels: Union[CrispImage, np.ndarray, Sequence[int]], channels: int) -> CategoricalImage:
    """
    Label image -> categorical image on the simplex vertices

    Raises:
        CategoryError: a label (or sentinel) outside [0, channels)
    """
    array = _label_array(labels)
    if channels < 2:
        raise CategoryError(f"one_hot needs >= 2 channels, got {channels}")
    bad = (array < 0) | (array >= channels)
    if np.any(bad):
        index = tuple(int(v) for v in np.argwhere(bad)[0])
        raise CategoryError(f"label {array[index]} at pixel {index} outside [0, {channels})")
    return CategoricalImage(np.eye(channels, dtype=np.float64)[array])


def argmax_labels(img: CategoricalImage) -> CrispImage:
    """Per-pixel most probable category; exact ties go to the lowest channel index"""
    return CrispImage(np.argmax(img.data, axis=-1), img.channels)


def membership(crisp: CrispImage) -> np.ndarray:
    """Boolean (shape + (categories,)) membership array of a set-mode image"""
    if crisp.mode != "set":
        raise CategoryError("membership needs a set-mode image")
    bits = np.arange(crisp.categories, dtype=np.uint64)
    return ((crisp.data[..., None] >> bits) & np.uint64(1)).astype(bool)


def support_sets(img: CategoricalImage, threshold: Optional[float] = None) -> CrispImage:
    """Set-mode image of the categories with probability above `threshold`"""
    if threshold is None:
        threshold = get_config().SET_THRESHOLD
    present = img.data > threshold
    weights = np.uint64(1) << np.arange(img.channels, dtype=np.uint64)
    bits = np.bitwise_or.reduce(np.where(present, weights, np.uint64(0)), axis=-1)
    return CrispImage(bits, img.channels, mode="set")


def dirichlet_expectation(img: DirichletImage) -> CategoricalImage:
    """Expected categorical distribution alpha_k / sum(alpha) per pixel"""
    return CategoricalImage(img.data / img.data.sum(axis=-1, keepdims=True))


# =============================================================================
# Diagnostics
# =============================================================================

def entropy_map(img: CategoricalImage) -> np.ndarray:
    """Per-pixel Shannon entropy in nats, with 0 ln 0 = 0"""
    return entr(np.clip(img.data, 0.0, None)).sum(axis=-1)


def magnitude_map(img: DirichletImage) -> np.ndarray:
    """Per-pixel Euclidean norm of the parameter vector"""
    return np.linalg.norm(img.data, axis=-1)
