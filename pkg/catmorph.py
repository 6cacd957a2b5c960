"""
Single-category morphology on categorical-distribution images

For a category i and a flat structuring element B:

- dilate_i: channel i is the grayscale dilation of f_i; the remaining channels
  share the leftover mass 1 - f_i in their old proportions (all zero where the
  dilated channel reaches 1).
- erode_i: channel i is the grayscale erosion of f_i; the remaining channels
  are rescaled the same way, except where f_i was 1 and drops below 1. There
  the freed mass goes to the categories found in the smallest ball B_r* whose
  erosion drops below 1 (theta), weighted by their dilation over B_r*.

The operators form an adjunction in the preorder "f <=_i g iff f_i <= g_i
everywhere", so open_i and close_i are idempotent. Channel i is never touched
by renormalization; the laws on channel i hold exactly.
"""

from typing import Callable, Dict, List, Tuple

import numpy as np

from categorical import CategoricalImage, check_category, ensure_valid, finalize
from errors import ContractViolation, ImageValidationError, StructuringElementError
from grayscale import dilate, erode, extremum_filter
from structuring import StructuringElement
from utils.config import get_config
from utils.logger import get_logger

logger = get_logger(__name__)


def _others(channels: int, i: int) -> List[int]:
    return [k for k in range(channels) if k != i]


def _prepare(f: CategoricalImage, i: int) -> Tuple[CategoricalImage, int, float]:
    config = get_config()
    i = check_category(i, f.channels)
    ensure_valid(f, config.SIMPLEX_TOL)
    return f, i, config.PLATEAU_TOL


def _saturated(data: np.ndarray, i: int, tol: float) -> np.ndarray:
    """Pixels with no mass outside category i"""
    others = _others(data.shape[-1], i)
    return (data[..., i] > 1.0 - tol) | (data[..., others].sum(axis=-1) <= 0)


def _rescaled(data: np.ndarray, i: int, new_i: np.ndarray) -> np.ndarray:
    """Channel i replaced by new_i, other channels sharing 1 - new_i in their old proportions"""
    # the mass outside i is summed rather than taken as 1 - f_i so the result sums to 1 exactly
    others = _others(data.shape[-1], i)
    omega = data[..., others].sum(axis=-1)
    scale = np.zeros_like(omega)
    np.divide(1.0 - new_i, omega, out=scale, where=omega > 0)
    out = data * scale[..., None]
    out[..., i] = new_i
    return out


def _spread_weights(data: np.ndarray, i: int, se: StructuringElement, ndim: int) -> np.ndarray:
    """Dilation of every channel except i over B (channel i left at 0)"""
    others = _others(data.shape[-1], i)
    weights = np.zeros_like(data)
    weights[..., others] = extremum_filter(data[..., others], se, "max", ndim=ndim)
    return weights


def _distribute(out: np.ndarray, mask: np.ndarray, i: int, weights: np.ndarray) -> None:
    """Give each masked pixel's free mass 1 - out_i to the other channels, proportional to weights"""
    others = _others(out.shape[-1], i)
    w = weights[mask][:, others]
    totals = w.sum(axis=-1)
    if np.any(totals <= 0):
        index = tuple(int(v) for v in np.argwhere(mask)[int(np.argmin(totals))])
        raise ContractViolation(f"no mass to redistribute at pixel {index}")
    free = 1.0 - out[mask][:, i]
    block = out[mask]
    block[:, others] = w / totals[:, None] * free[:, None]
    out[mask] = block


# =============================================================================
# Dilation / erosion
# =============================================================================

def dilate_i(f: CategoricalImage, i: int, se: StructuringElement) -> CategoricalImage:
    """
    Dilate category i

    Args:
        f: valid categorical image
        i: operated category
        se: structuring element

    Returns:
        CategoricalImage whose channel i equals the grayscale dilation of f_i
    """
    f, i, tol = _prepare(f, i)
    data = f.data
    fi = data[..., i]
    d = dilate(fi, se)

    out = _rescaled(data, i, d)
    reached = d > 1.0 - tol
    out[reached] = 0.0
    out[..., i] = d

    # only possible when B omits the origin: f_i(x) = 1 but the dilation is below 1
    stranded = _saturated(data, i, tol) & ~reached
    if np.any(stranded):
        _distribute(out, stranded, i, _spread_weights(data, i, se, f.ndim))

    logger.debug("dilate_i(i=%d, %s) on %s", i, se.describe(), f.shape)
    return finalize(out, [i], "dilate_i")


def _theta_field(
    data: np.ndarray, i: int, se: StructuringElement, mask: np.ndarray, tol: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized theta for every masked pixel

    Returns:
        (weights, r_star): unnormalized weights, r_star is NaN outside the mask
    """
    if not se.is_ball:
        index = tuple(int(v) for v in np.argwhere(mask)[0])
        raise StructuringElementError(
            f"erosion needs theta at pixel {index}, which needs a ball structuring element", index=index
        )
    ndim = data.ndim - 1
    fi = data[..., i]
    weights = np.zeros_like(data)
    r_star = np.full(mask.shape, np.nan)
    pending = mask.copy()

    for radius in se.ladder(ndim):
        if not pending.any():
            break
        ball = se.with_radius(radius)
        hit = pending & (erode(fi, ball) <= 1.0 - tol)
        if np.any(hit):
            weights[hit] = _spread_weights(data, i, ball, ndim)[hit]
            r_star[hit] = radius
            pending &= ~hit

    if np.any(pending):
        index = tuple(int(v) for v in np.argwhere(pending)[0])
        raise ContractViolation(f"theta found no radius with f_i below 1 at pixel {index}")
    return weights, r_star


def erode_i(f: CategoricalImage, i: int, se: StructuringElement) -> CategoricalImage:
    """
    Erode category i

    Where f_i(x) = 1 and the erosion drops below 1, the freed mass is split by
    theta; elsewhere the other channels are rescaled proportionally.

    Raises:
        StructuringElementError: theta is needed but `se` is not a ball
    """
    f, i, tol = _prepare(f, i)
    data = f.data
    fi = data[..., i]
    e = erode(fi, se)

    out = _rescaled(data, i, e)
    needs_theta = _saturated(data, i, tol) & (e <= 1.0 - tol)
    if np.any(needs_theta):
        weights, _ = _theta_field(data, i, se, needs_theta, tol)
        _distribute(out, needs_theta, i, weights)
        logger.debug("erode_i: theta applied at %d pixels", int(needs_theta.sum()))

    logger.debug("erode_i(i=%d, %s) on %s", i, se.describe(), f.shape)
    return finalize(out, [i], "erode_i")


def open_i(f: CategoricalImage, i: int, se: StructuringElement) -> CategoricalImage:
    """dilate_i(erode_i(f))"""
    return dilate_i(erode_i(f, i, se), i, se)


def close_i(f: CategoricalImage, i: int, se: StructuringElement) -> CategoricalImage:
    """erode_i(dilate_i(f))"""
    return erode_i(dilate_i(f, i, se), i, se)


# =============================================================================
# Theta at a single pixel
# =============================================================================

def _local(data: np.ndarray, x: Tuple[int, ...], offsets: np.ndarray) -> np.ndarray:
    """Values at the in-image pixels x + b, one row per offset"""
    shape = np.array(data.shape[: len(x)])
    points = np.asarray(x) + offsets
    inside = np.all((points >= 0) & (points < shape), axis=1)
    return data[tuple(points[inside].T)]


def theta(f: CategoricalImage, i: int, x: Tuple[int, ...], se: StructuringElement) -> Tuple[np.ndarray, float]:
    """
    Replacement weights for a pixel that loses its full category-i mass

    r_star is the smallest ladder radius whose ball around x contains a pixel
    with f_i < 1; the weight of category k is the max of f_k over that ball.

    Args:
        f: categorical image
        i: operated category
        x: pixel index
        se: calling ball B_r

    Returns:
        (weights, r_star); weights[i] is 0

    Raises:
        ContractViolation: f_i(x) < 1, or the erosion over B_r stays at 1
    """
    i = check_category(i, f.channels)
    se.require_ball("theta")
    x = tuple(int(v) for v in x)
    if len(x) != f.ndim:
        raise ImageValidationError(f"pixel {x} does not index a rank-{f.ndim} image")
    tol = get_config().PLATEAU_TOL
    data = f.data

    if data[x][i] <= 1.0 - tol:
        raise ContractViolation(f"theta called at pixel {x} where f_i < 1")
    if _local(data[..., i], x, se.offsets(f.ndim)).min() > 1.0 - tol:
        raise ContractViolation(f"theta called at pixel {x} whose erosion over {se.describe()} stays at 1")

    for radius in se.ladder(f.ndim):
        values = _local(data, x, se.with_radius(radius).offsets(f.ndim))
        if values[:, i].min() <= 1.0 - tol:
            weights = values.max(axis=0)
            weights[i] = 0.0
            if weights.sum() <= 0:
                raise ContractViolation(f"theta found no mass outside category {i} at pixel {x}")
            return weights, radius

    raise ContractViolation(f"theta found no radius with f_i below 1 at pixel {x}")


# =============================================================================
# Preorder and diagnostics
# =============================================================================

def preorder_leq(f: CategoricalImage, g: CategoricalImage, i: int) -> bool:
    """f <=_i g: f_i(x) <= g_i(x) at every pixel"""
    if f.shape != g.shape or f.channels != g.channels:
        raise ImageValidationError(
            f"cannot compare images of shape {f.shape}x{f.channels} and {g.shape}x{g.channels}"
        )
    i = check_category(i, f.channels)
    return bool(np.all(f.data[..., i] <= g.data[..., i]))


def conditional_distribution(f: CategoricalImage, i: int) -> np.ndarray:
    """
    Distribution of the other categories given "not i": f_k / (1 - f_i)

    NaN where f_i is 1 (within the plateau tolerance); the column of i is NaN.
    """
    i = check_category(i, f.channels)
    tol = get_config().PLATEAU_TOL
    omega = f.omega(i)
    out = np.full(f.data.shape, np.nan)
    defined = omega > tol
    out[defined] = f.data[defined] / omega[defined][:, None]
    out[..., i] = np.nan
    return out


CATEGORICAL_OPS: Dict[str, Callable[[CategoricalImage, int, StructuringElement], CategoricalImage]] = {
    "dilate": dilate_i,
    "erode": erode_i,
    "open": open_i,
    "close": close_i,
}
