"""
Protected morphology on categorical-distribution images

Protected categories are frozen: their channels are copied verbatim and their
combined (locked) mass shapes where the operated category may travel. The
remaining free categories absorb the mass that moves.

Neighborhoods are geodesic balls inside the domain of pixels that are not
fully protected (locked mass below 1 - wall_tol).

Two readings of the level domain at p (pixels with locked mass <= 1 - p):
- literal: only fully protected pixels act as walls, and channel i is capped
  at 1 - locked mass at every pixel.
- capacity: a value p may only travel through pixels with room for p, so
  partially protected pixels throttle what dilation carries through them.
  Erosion takes the min over every level domain, which with exact levels is
  the literal erosion.
Both agree when every pixel is either fully locked or not locked at all.
"""

from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np

from categorical import CategoricalImage, check_category, ensure_valid, finalize
from constants import MODE_CAPACITY, MODE_LITERAL, PROTECTION_MODES
from errors import CategoryError, ContractViolation, ImageValidationError
from geodesic import geodesic_max_filter, geodesic_min_filter
from structuring import StructuringElement
from utils.config import get_config
from utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ProtectionSpec:
    """Protected categories and how their mass restricts propagation"""

    protected: frozenset = frozenset()
    mode: str = MODE_LITERAL
    plevels: int = 64
    wall_tol: float = 1e-9
    backend: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "protected", frozenset(int(k) for k in self.protected))
        if self.mode not in PROTECTION_MODES:
            raise ValueError(f"unknown protection mode {self.mode!r}, expected one of {PROTECTION_MODES}")
        if self.plevels < 1:
            raise ValueError(f"plevels must be positive, got {self.plevels}")
        if self.wall_tol < 0:
            raise ValueError(f"wall_tol must be non-negative, got {self.wall_tol}")

    @classmethod
    def from_channels(
        cls,
        channels: Iterable[int] = (),
        mode: str = MODE_LITERAL,
        backend: Optional[str] = None,
    ) -> "ProtectionSpec":
        """Spec with plevels and wall_tol taken from the configuration"""
        config = get_config()
        return cls(frozenset(channels), mode, config.CAPACITY_PLEVELS, config.WALL_TOL, backend)

    def check(self, i: int, channels: int) -> Tuple[List[int], List[int]]:
        """
        Validate against an operated category and channel count

        Returns:
            (sorted locked categories, sorted free categories)
        """
        for k in self.protected:
            check_category(k, channels)
        if i in self.protected:
            raise CategoryError(f"category {i} cannot be both operated on and protected")
        locked = sorted(self.protected)
        free = [k for k in range(channels) if k != i and k not in self.protected]
        return locked, free

    def describe(self) -> str:
        protected = ",".join(str(k) for k in sorted(self.protected)) or "none"
        return f"protect={protected} mode={self.mode}"


# =============================================================================
# Shared helpers
# =============================================================================

class _Context:
    """Per-call arrays: image data, locked and free channel lists and their masses"""

    def __init__(self, f: CategoricalImage, i: int, se: StructuringElement, spec: ProtectionSpec):
        config = get_config()
        self.i = check_category(i, f.channels)
        ensure_valid(f, config.SIMPLEX_TOL)
        se.require_ball("protected morphology")
        self.locked, self.free = spec.check(self.i, f.channels)
        self.se = se
        self.spec = spec
        self.tol = config.PLATEAU_TOL
        self.data = f.data
        self.fi = self.data[..., self.i]
        self.locked_mass = self.data[..., self.locked].sum(axis=-1)
        self.free_mass = self.data[..., self.free].sum(axis=-1)
        self.domain = self.locked_mass < 1.0 - spec.wall_tol

    def geo_max(self, values: np.ndarray, mask: np.ndarray, se: Optional[StructuringElement] = None) -> np.ndarray:
        return geodesic_max_filter(values, mask, se or self.se, self.spec.backend)

    def geo_min(self, values: np.ndarray, mask: np.ndarray, se: Optional[StructuringElement] = None) -> np.ndarray:
        return geodesic_min_filter(values, mask, se or self.se, self.spec.backend)

    def levels(self) -> np.ndarray:
        """Capacity levels p in (wall_tol, 1] at which the level domains change"""
        room = np.unique(1.0 - self.locked_mass[self.domain])
        exact = np.union1d(room[room > self.spec.wall_tol], [1.0])
        if exact.size <= self.spec.plevels:
            return exact
        return np.arange(1, self.spec.plevels + 1) / self.spec.plevels

    def level_domain(self, p: float) -> np.ndarray:
        return self.locked_mass <= 1.0 - p + self.spec.wall_tol

    def rescale_free(self, out: np.ndarray, new_i: np.ndarray, where: np.ndarray) -> None:
        """Free channels share 1 - locked - new_i in their old proportions"""
        room = np.maximum(1.0 - self.locked_mass - new_i, 0.0)
        scale = np.zeros_like(room)
        np.divide(room, self.free_mass, out=scale, where=where & (self.free_mass > 0))
        for k in self.free:
            out[..., k] = np.where(where, self.data[..., k] * scale, out[..., k])


def _nan_to(values: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    return np.where(np.isnan(values), fallback, values)


# =============================================================================
# Dilation
# =============================================================================

def _dilated_channel(ctx: _Context) -> np.ndarray:
    cap = 1.0 - ctx.locked_mass
    if ctx.spec.mode == MODE_LITERAL:
        reach = _nan_to(ctx.geo_max(ctx.fi, ctx.domain), ctx.fi)
    else:
        reach = ctx.fi.copy()
        for p in ctx.levels():
            room = ctx.level_domain(p)
            if not room.any():
                continue
            level = np.minimum(p, ctx.geo_max(ctx.fi, room))
            reach = np.where(room, np.maximum(reach, level), reach)
    return np.where(ctx.domain, np.minimum(cap, np.maximum(reach, ctx.fi)), ctx.fi)


def protected_dilate(f: CategoricalImage, i: int, se: StructuringElement, spec: ProtectionSpec) -> CategoricalImage:
    """
    Dilate category i without touching the protected categories

    Channel i becomes the max of f_i over the geodesic ball around each pixel,
    capped at 1 - locked mass; the free categories are rescaled into what is
    left. Pixels outside the domain keep their values.

    Raises:
        CategoryError: i is protected, or an index is out of range
        StructuringElementError: se is not a ball
    """
    ctx = _Context(f, i, se, spec)
    new_i = _dilated_channel(ctx)

    out = np.array(ctx.data, copy=True)
    out[..., ctx.i] = new_i
    ctx.rescale_free(out, new_i, ctx.domain)

    logger.debug("protected_dilate(i=%d, %s, %s) on %s", ctx.i, se.describe(), spec.describe(), f.shape)
    return finalize(out, [ctx.i] + ctx.locked, "protected_dilate")


# =============================================================================
# Erosion
# =============================================================================

def _eroded_channel(ctx: _Context) -> np.ndarray:
    if ctx.spec.mode == MODE_LITERAL:
        low = _nan_to(ctx.geo_min(ctx.fi, ctx.domain), ctx.fi)
    else:
        # min over levels of the geodesic min inside each level domain
        low = ctx.fi.copy()
        for p in ctx.levels():
            room = ctx.level_domain(p)
            if not room.any():
                continue
            low = np.where(room, np.minimum(low, ctx.geo_min(ctx.fi, room)), low)
    return np.minimum(low, ctx.fi)


def _theta_weights(ctx: _Context, mask: np.ndarray) -> np.ndarray:
    """Protected theta for every masked pixel (unnormalized weights on the free channels)"""
    weights = np.zeros_like(ctx.data)
    pending = mask.copy()
    free = ctx.free
    for radius in ctx.se.ladder(ctx.fi.ndim):
        if not pending.any():
            break
        ball = ctx.se.with_radius(radius)
        residual = 1.0 - ctx.locked_mass - _nan_to(ctx.geo_min(ctx.fi, ctx.domain, ball), ctx.fi)
        reach = _nan_to(ctx.geo_max(ctx.free_mass, ctx.domain, ball), 0.0)
        hit = pending & (residual > ctx.tol) & (reach > ctx.tol)
        if hit.any():
            spread = ctx.geo_max(ctx.data[..., free], ctx.domain, ball)
            weights[..., free] = np.where(hit[..., None], spread, weights[..., free])
            pending &= ~hit
    if pending.any():
        index = tuple(int(v) for v in np.argwhere(pending)[0])
        raise ContractViolation(f"protected theta found no radius with free mass at pixel {index}")
    return weights


def protected_erode(f: CategoricalImage, i: int, se: StructuringElement, spec: ProtectionSpec) -> CategoricalImage:
    """
    Erode category i without touching the protected categories

    Per pixel, in order:
    - no pixel of the geodesic ball holds unprotected mass outside i: unchanged
    - channel i is the min of f_i over the geodesic ball
    - free categories rescaled to fill 1 - locked - f_i where the pixel already
      had free mass, otherwise the freed mass goes to the nearest free categories (protected theta)
    """
    ctx = _Context(f, i, se, spec)
    reach_free = _nan_to(ctx.geo_max(ctx.free_mass, ctx.domain), 0.0) > ctx.tol
    active = ctx.domain & reach_free

    new_i = np.where(active, _eroded_channel(ctx), ctx.fi)
    out = np.array(ctx.data, copy=True)
    out[..., ctx.i] = new_i

    has_free = active & (ctx.free_mass > ctx.tol)
    ctx.rescale_free(out, new_i, has_free)

    freed = 1.0 - ctx.locked_mass - new_i
    needs_theta = active & ~has_free & (freed > ctx.tol)
    if needs_theta.any():
        weights = _theta_weights(ctx, needs_theta)[needs_theta][:, ctx.free]
        totals = weights.sum(axis=-1)
        if np.any(totals <= 0):
            raise ContractViolation("protected theta produced no weight")
        block = out[needs_theta]
        block[:, ctx.free] = weights / totals[:, None] * freed[needs_theta][:, None]
        out[needs_theta] = block
        logger.debug("protected_erode: theta applied at %d pixels", int(needs_theta.sum()))

    logger.debug("protected_erode(i=%d, %s, %s) on %s", ctx.i, se.describe(), spec.describe(), f.shape)
    return finalize(out, [ctx.i] + ctx.locked, "protected_erode")


def protected_theta(
    f: CategoricalImage, i: int, x: Tuple[int, ...], se: StructuringElement, spec: ProtectionSpec
) -> Tuple[np.ndarray, float]:
    """
    Replacement weights for a pixel whose unprotected mass is all category i

    r_star is the smallest ladder radius whose geodesic ball both frees mass
    (1 - locked(x) - min f_i > 0) and reaches free mass; the weight of a free
    category k is the max of f_k over that ball.

    Returns:
        (weights, r_star); weights are 0 outside the free categories

    Raises:
        ContractViolation: x has free mass, or nothing would be freed within se
    """
    ctx = _Context(f, i, se, spec)
    x = tuple(int(v) for v in x)
    if len(x) != f.ndim:
        raise ImageValidationError(f"pixel {x} does not index a rank-{f.ndim} image")
    if ctx.free_mass[x] > ctx.tol:
        raise ContractViolation(f"protected theta called at pixel {x}, which holds unprotected mass")
    if not ctx.domain[x]:
        raise ContractViolation(f"protected theta called at fully protected pixel {x}")

    for radius in se.ladder(f.ndim):
        ball = se.with_radius(radius)
        low = _nan_to(ctx.geo_min(ctx.fi, ctx.domain, ball), ctx.fi)
        reach = _nan_to(ctx.geo_max(ctx.free_mass, ctx.domain, ball), 0.0)
        if 1.0 - ctx.locked_mass[x] - low[x] > ctx.tol and reach[x] > ctx.tol:
            weights = np.zeros(f.channels)
            weights[ctx.free] = ctx.geo_max(ctx.data[..., ctx.free], ctx.domain, ball)[x]
            return weights, radius

    raise ContractViolation(f"protected theta found no free mass within {se.describe()} at pixel {x}")


def protected_open(
    f: CategoricalImage,
    i: int,
    se: StructuringElement,
    spec: ProtectionSpec,
    dilate_spec: Optional[ProtectionSpec] = None,
) -> CategoricalImage:
    """Protected erosion then protected dilation; `dilate_spec` overrides the protection of the second half"""
    return protected_dilate(protected_erode(f, i, se, spec), i, se, dilate_spec or spec)


def protected_close(
    f: CategoricalImage,
    i: int,
    se: StructuringElement,
    spec: ProtectionSpec,
    erode_spec: Optional[ProtectionSpec] = None,
) -> CategoricalImage:
    """Protected dilation then protected erosion; `erode_spec` overrides the protection of the second half"""
    return protected_erode(protected_dilate(f, i, se, spec), i, se, erode_spec or spec)


PROTECTED_OPS = {
    "dilate": protected_dilate,
    "erode": protected_erode,
    "open": protected_open,
    "close": protected_close,
}
