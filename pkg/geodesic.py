"""
Geodesic distances on grid domains with excluded pixels

A domain mask is a boolean array (True = pixel belongs to the domain); a
distance field is a float array of the same shape holding the distance to the
nearest seed, +inf where no path inside the domain exists.

Two solvers:
- dijkstra_distance: exact shortest paths on the pixel graph. The metric picks
  the graph: "euclidean" (8-connected, edge weights 1 and sqrt(2)),
  "city-block" (4-connected, unit weights) or "chessboard" (8-connected,
  unit weights). The last two reproduce their norms exactly on open domains.
- fmm_distance: fast marching solution of the unit-speed eikonal equation
  with a second-order upwind update, exact initialisation near the seeds and
  the 8-connected graph step as a fallback candidate, so its reachability is
  that of the 8-connected graph.

geodesic_ball_query and the geodesic max/min filters build the neighborhoods
{y : d(x, y) <= r} used by protected morphology.
"""

import heapq
from functools import lru_cache
from itertools import product
from typing import FrozenSet, Iterable, List, Optional, Tuple, Union

import numpy as np

from constants import (
    BACKEND_AUTO,
    BACKEND_DIJKSTRA,
    BACKEND_FMM,
    EUCLIDEAN_SLACK,
    GEODESIC_BACKENDS,
    NORM_CHESSBOARD,
    NORM_CITY_BLOCK,
    NORM_EUCLIDEAN,
    NORMS,
)
from errors import ImageValidationError
from grayscale import extremum_filter
from structuring import StructuringElement
from utils.config import get_config
from utils.logger import get_logger

logger = get_logger(__name__)

# Type aliases: both are plain numpy arrays
DomainMask = np.ndarray
DistanceField = np.ndarray
Pixel = Tuple[int, ...]

# Fast marching states
FAR = -1
TRIAL = 0
KNOWN = 1

SECOND_ORDER_WEIGHT = 9.0 / 4.0


def as_mask(mask: Union[np.ndarray, Iterable], shape: Optional[Tuple[int, ...]] = None) -> DomainMask:
    """Validate a domain mask (and its shape against an image)"""
    mask = np.asarray(mask, dtype=bool)
    if shape is not None and mask.shape != tuple(shape):
        raise ImageValidationError(f"mask shape {mask.shape} does not match image shape {tuple(shape)}")
    return mask


def _seed_list(seeds, mask: DomainMask) -> List[Pixel]:
    if isinstance(seeds, np.ndarray) and seeds.dtype == bool:
        if seeds.shape != mask.shape:
            raise ImageValidationError(f"seed mask shape {seeds.shape} does not match domain {mask.shape}")
        points = [tuple(int(v) for v in p) for p in np.argwhere(seeds)]
    else:
        points = [tuple(int(v) for v in p) for p in seeds]
    for p in points:
        if len(p) != mask.ndim or not all(0 <= c < n for c, n in zip(p, mask.shape)):
            raise ImageValidationError(f"seed {p} lies outside the image", index=p)
        if not mask[p]:
            raise ImageValidationError(f"seed {p} lies outside the domain", index=p)
    return points


@lru_cache(maxsize=32)
def graph_neighbors(metric: str, ndim: int) -> Tuple[Tuple[Pixel, float], ...]:
    """(offset, edge weight) pairs of the pixel graph for a metric"""
    if metric not in NORMS:
        raise ValueError(f"unknown metric {metric!r}, expected one of {NORMS}")
    steps = []
    for offset in product((-1, 0, 1), repeat=ndim):
        nonzero = sum(1 for v in offset if v)
        if nonzero == 0:
            continue
        if metric == NORM_CITY_BLOCK:
            if nonzero == 1:
                steps.append((offset, 1.0))
        elif metric == NORM_CHESSBOARD:
            steps.append((offset, 1.0))
        else:
            steps.append((offset, float(np.sqrt(nonzero))))
    return tuple(steps)


def _inside(p: Pixel, shape: Tuple[int, ...]) -> bool:
    return all(0 <= c < n for c, n in zip(p, shape))


def resolve_backend(backend: Optional[str], metric: str, shape: Tuple[int, ...]) -> str:
    """
    Concrete solver for a request

    City-block and chessboard distances always use the exact graph; "auto"
    picks Dijkstra up to DIJKSTRA_MAX_PIXELS pixels and FMM above.
    """
    config = get_config()
    backend = backend or config.GEODESIC_BACKEND
    if backend not in GEODESIC_BACKENDS:
        raise ValueError(f"unknown geodesic backend {backend!r}, expected one of {GEODESIC_BACKENDS}")
    if metric != NORM_EUCLIDEAN:
        return BACKEND_DIJKSTRA
    if backend == BACKEND_AUTO:
        return BACKEND_DIJKSTRA if int(np.prod(shape)) <= config.DIJKSTRA_MAX_PIXELS else BACKEND_FMM
    return backend


# =============================================================================
# Dijkstra
# =============================================================================

def dijkstra_distance(
    seeds,
    mask: DomainMask,
    metric: str = NORM_EUCLIDEAN,
    limit: float = np.inf,
) -> DistanceField:
    """
    Exact shortest-path distance on the pixel graph restricted to the mask

    Args:
        seeds: iterable of pixel tuples or a boolean seed mask (must lie in the domain)
        mask: domain mask
        metric: pixel graph to use (see module docstring)
        limit: stop once every pixel within this distance is settled; farther
            pixels are reported as +inf

    Returns:
        Distance field; an empty seed set gives all +inf
    """
    mask = as_mask(mask)
    shape = mask.shape
    steps = graph_neighbors(metric, mask.ndim)
    dist = np.full(shape, np.inf)
    heap = []
    for s in _seed_list(seeds, mask):
        dist[s] = 0.0
        heap.append((0.0, np.ravel_multi_index(s, shape), s))
    heapq.heapify(heap)

    while heap:
        d, _, p = heapq.heappop(heap)
        if d > dist[p]:
            continue
        if d > limit + EUCLIDEAN_SLACK:
            break
        for offset, weight in steps:
            q = tuple(a + b for a, b in zip(p, offset))
            if not _inside(q, shape) or not mask[q]:
                continue
            nd = d + weight
            if nd < dist[q]:
                dist[q] = nd
                heapq.heappush(heap, (nd, np.ravel_multi_index(q, shape), q))

    if np.isfinite(limit):
        dist[dist > limit + EUCLIDEAN_SLACK] = np.inf
    return dist


# =============================================================================
# Fast marching
# =============================================================================

def line_of_sight(mask: DomainMask, a: Pixel, b: Pixel) -> bool:
    """True if every pixel the straight segment a-b passes through is in the domain"""
    delta = np.subtract(b, a)
    samples = 2 * int(np.abs(delta).max(initial=0)) + 1
    t = np.linspace(0.0, 1.0, samples)[:, None]
    points = np.rint(np.asarray(a) + t * delta).astype(int)
    return bool(np.all(mask[tuple(points.T)]))


class FastMarcher:
    """
    Narrow-band fast marching on a masked grid

    States follow the usual FAR / TRIAL / KNOWN scheme; the narrow band is a
    heap keyed by (tentative value, flat pixel index) so ties resolve the same
    way on every run.
    """

    def __init__(self, mask: DomainMask, init_radius: Optional[float] = None):
        self.mask = as_mask(mask)
        self.shape = self.mask.shape
        self.ndim = self.mask.ndim
        self.init_radius = get_config().FMM_INIT_RADIUS if init_radius is None else init_radius
        self.T = np.full(self.shape, np.inf)
        self.status = np.full(self.shape, FAR, dtype=np.int8)
        self.exact = np.zeros(self.shape, dtype=bool)
        self.tentative: list = []
        self.steps = graph_neighbors(NORM_EUCLIDEAN, self.ndim)

    def seed(self, seeds) -> None:
        """Seeds get 0; domain pixels near a seed with a clear line of sight get their exact distance"""
        points = _seed_list(seeds, self.mask)
        disc = StructuringElement.ball(self.init_radius, NORM_EUCLIDEAN).offsets(self.ndim)
        lengths = np.sqrt((disc.astype(float) ** 2).sum(axis=1))
        for s in points:
            for offset, length in zip(disc, lengths):
                y = tuple(int(c) for c in np.add(s, offset))
                if not _inside(y, self.shape) or not self.mask[y] or length >= self.T[y]:
                    continue
                if line_of_sight(self.mask, s, y):
                    self.exact[y] = True
                    self._push(y, float(length))

    def _push(self, p: Pixel, value: float) -> None:
        self.T[p] = value
        self.status[p] = TRIAL
        heapq.heappush(self.tentative, (value, np.ravel_multi_index(p, self.shape), p))

    def _offer(self, p: Pixel, value: float) -> None:
        # exact seed distances are never lowered by the eikonal update
        if value < self.T[p] and not self.exact[p]:
            self._push(p, value)

    def _known_value(self, p: Pixel) -> Optional[float]:
        if _inside(p, self.shape) and self.status[p] == KNOWN:
            return float(self.T[p])
        return None

    def compute(self, p: Pixel) -> float:
        """Upwind eikonal update at p from its KNOWN neighbors (second order where possible)"""
        terms = []
        for axis in range(self.ndim):
            best = None
            for sign in (-1, 1):
                n1 = tuple(c + sign * (j == axis) for j, c in enumerate(p))
                t1 = self._known_value(n1)
                if t1 is None or (best is not None and t1 >= best[0]):
                    continue
                n2 = tuple(c + 2 * sign * (j == axis) for j, c in enumerate(p))
                best = (t1, self._known_value(n2))
            if best is None:
                continue
            t1, t2 = best
            if t2 is not None and t2 <= t1:
                terms.append(((4.0 * t1 - t2) / 3.0, SECOND_ORDER_WEIGHT))
            else:
                terms.append((t1, 1.0))

        # solve sum alpha (T - c)^2 = 1, adding axes while they stay upwind
        terms.sort()
        result = np.inf
        a = b = cc = 0.0
        for c, alpha in terms:
            if c >= result:
                break
            a += alpha
            b += alpha * c
            cc += alpha * c * c
            disc = b * b - a * (cc - 1.0)
            if disc < 0:
                break
            result = (b + np.sqrt(disc)) / a
        return result

    def update_neighbours(self, p: Pixel) -> None:
        tp = self.T[p]
        for offset, weight in self.steps:
            q = tuple(a + b for a, b in zip(p, offset))
            if not _inside(q, self.shape) or not self.mask[q] or self.status[q] == KNOWN:
                continue
            # the graph step keeps 8-connected reachability and caps the update
            self._offer(q, min(self.compute(q), tp + weight))

    def loop(self, vstop: float = np.inf) -> DistanceField:
        """March until the band is empty or the front passes `vstop`"""
        while self.tentative:
            value, _, p = heapq.heappop(self.tentative)
            if self.status[p] == KNOWN or value > self.T[p]:
                continue
            if value > vstop + EUCLIDEAN_SLACK:
                break
            self.status[p] = KNOWN
            self.update_neighbours(p)

        return np.where(self.status == KNOWN, self.T, np.inf)


def fmm_distance(
    seeds,
    mask: DomainMask,
    limit: float = np.inf,
    init_radius: Optional[float] = None,
) -> DistanceField:
    """
    Eikonal distance (unit speed) from the seeds inside the domain

    Args:
        seeds: iterable of pixel tuples or a boolean seed mask
        mask: domain mask
        limit: stop the front once it passes this value; farther pixels are +inf
        init_radius: exact-initialisation radius around each seed
            (FMM_INIT_RADIUS by default)

    Returns:
        Distance field; +inf exactly where the 8-connected graph has no path
    """
    marcher = FastMarcher(mask, init_radius)
    marcher.seed(seeds)
    return marcher.loop(limit)


def geodesic_distance(
    seeds,
    mask: DomainMask,
    metric: str = NORM_EUCLIDEAN,
    backend: Optional[str] = None,
    limit: float = np.inf,
) -> DistanceField:
    """Distance field with the solver picked by `resolve_backend`"""
    mask = as_mask(mask)
    if resolve_backend(backend, metric, mask.shape) == BACKEND_FMM:
        return fmm_distance(seeds, mask, limit)
    return dijkstra_distance(seeds, mask, metric, limit)


# =============================================================================
# Geodesic balls and filters
# =============================================================================

def _sight_ball(x: Pixel, radius: float, mask: DomainMask) -> np.ndarray:
    """Domain pixels within Euclidean distance r of x that x sees directly"""
    offsets = StructuringElement.ball(radius, NORM_EUCLIDEAN).offsets(mask.ndim)
    points = np.asarray(x) + offsets
    inside = np.all((points >= 0) & (points < np.array(mask.shape)), axis=1)
    points = points[inside]
    points = points[mask[tuple(points.T)]]
    keep = [line_of_sight(mask, x, tuple(p)) for p in points]
    return points[np.asarray(keep, dtype=bool)]


def ball_points(
    x: Pixel,
    radius: float,
    mask: DomainMask,
    metric: str = NORM_EUCLIDEAN,
    backend: Optional[str] = None,
) -> np.ndarray:
    """
    (m, d) indices of the geodesic ball {y in mask : d(x, y) <= r}

    With the Euclidean metric the ball also takes every pixel x sees in a
    straight line within distance r, where the geodesic distance is exactly the
    Euclidean one; on a domain without holes the ball is the Euclidean SE ball.
    """
    mask = as_mask(mask)
    x = tuple(int(c) for c in x)
    if not _inside(x, mask.shape) or not mask[x]:
        return np.empty((0, mask.ndim), dtype=int)
    if radius <= 0:
        return np.array([x], dtype=int)

    dist = geodesic_distance([x], mask, metric, backend, limit=radius)
    within = dist <= radius + EUCLIDEAN_SLACK
    if metric == NORM_EUCLIDEAN:
        sight = _sight_ball(x, radius, mask)
        within[tuple(sight.T)] = True
    return np.argwhere(within)


def geodesic_ball_query(
    x: Pixel,
    radius: float,
    mask: DomainMask,
    metric: str = NORM_EUCLIDEAN,
    backend: Optional[str] = None,
) -> FrozenSet[Pixel]:
    """Set of domain pixels within geodesic distance r of x (empty if x is outside the domain)"""
    return frozenset(tuple(int(c) for c in p) for p in ball_points(x, radius, mask, metric, backend))


def _geodesic_filter(
    values: np.ndarray,
    mask: DomainMask,
    se: StructuringElement,
    filtertype: str,
    backend: Optional[str],
    fill: float,
) -> np.ndarray:
    se.require_ball("a geodesic neighborhood")
    mask = as_mask(mask)
    if values.shape[: mask.ndim] != mask.shape:
        raise ImageValidationError(f"values shape {values.shape} does not match domain {mask.shape}")
    if mask.all():
        # no excluded pixels: the geodesic ball is the SE ball clipped to the image
        return extremum_filter(values, se, filtertype, mask.ndim)
    out = np.full(values.shape, fill, dtype=np.float64)
    reduce = np.max if filtertype == "max" else np.min
    for x in map(tuple, np.argwhere(mask)):
        points = ball_points(x, se.radius, mask, se.norm, backend)
        out[x] = reduce(values[tuple(points.T)], axis=0)
    logger.debug("geodesic %s filter over %d domain pixels (%s)", filtertype, int(mask.sum()), se.describe())
    return out


def geodesic_max_filter(
    values: np.ndarray,
    mask: DomainMask,
    se: StructuringElement,
    backend: Optional[str] = None,
    fill: float = np.nan,
) -> np.ndarray:
    """
    max{ values(y) : d_mask(x, y) <= r } for every domain pixel x

    The ball's norm picks the metric. Trailing axes of `values` (channels) are
    reduced independently; pixels outside the domain get `fill`.
    """
    return _geodesic_filter(np.asarray(values, dtype=np.float64), mask, se, "max", backend, fill)


def geodesic_min_filter(
    values: np.ndarray,
    mask: DomainMask,
    se: StructuringElement,
    backend: Optional[str] = None,
    fill: float = np.nan,
) -> np.ndarray:
    """min{ values(y) : d_mask(x, y) <= r } for every domain pixel x; see geodesic_max_filter"""
    return _geodesic_filter(np.asarray(values, dtype=np.float64), mask, se, "min", backend, fill)
