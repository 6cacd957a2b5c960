"""
Deterministic synthetic images for the built-in recipes, demos and tests

Every generator takes a seed and returns the same image for the same seed.
"""

from typing import Callable, Dict, List, Tuple

import numpy as np

from categorical import CategoricalImage, DirichletImage, one_hot

# Denoise fixture: cytosol 0, membrane 1, mitochondria 2
DENOISE_BLOB_RADIUS = 7
DENOISE_CONFIDENCE = 0.8
# single-pixel mitochondria misclassifications, leaning toward cytosol
NOISE_PIXEL = (0.2, 0.1, 0.7)


def _disk(shape: Tuple[int, int], center: Tuple[float, float], radius: float) -> np.ndarray:
    rows, cols = np.indices(shape)
    return (rows - center[0]) ** 2 + (cols - center[1]) ** 2 <= radius ** 2


def _soften(labels: np.ndarray, channels: int, confidence: float) -> np.ndarray:
    """One-hot labels with `confidence` on the labelled category, the rest spread evenly"""
    spread = (1.0 - confidence) / (channels - 1)
    data = np.full(labels.shape + (channels,), spread)
    np.put_along_axis(data, labels[..., None], confidence, axis=-1)
    return data


def noisy_blob_labels(shape: Tuple[int, int] = (48, 48), blobs: int = 3, noise: int = 12, seed: int = 0
                      ) -> Tuple[np.ndarray, List[Tuple[int, int]]]:
    """
    Clean label map plus the positions of single-pixel noise

    Mitochondria (2) are disks of radius DENOISE_BLOB_RADIUS with a membrane
    (1) rim, on cytosol (0). Noise pixels sit in cytosol at least 3 pixels
    from any other labelled pixel.
    """
    rng = np.random.default_rng(seed)
    labels = np.zeros(shape, dtype=np.int64)
    margin = DENOISE_BLOB_RADIUS + 2
    placed: List[Tuple[int, int]] = []
    while len(placed) < blobs:
        center = tuple(int(v) for v in rng.integers(margin, np.array(shape) - margin))
        if all(np.hypot(center[0] - c[0], center[1] - c[1]) > 2 * margin for c in placed):
            placed.append(center)
    for center in placed:
        labels[_disk(shape, center, DENOISE_BLOB_RADIUS + 1)] = 1
        labels[_disk(shape, center, DENOISE_BLOB_RADIUS)] = 2

    occupied = labels != 0
    noise_pixels: List[Tuple[int, int]] = []
    candidates = rng.permutation(np.argwhere(~occupied))
    for r, c in candidates:
        if len(noise_pixels) == noise:
            break
        if occupied[max(r - 3, 0):r + 4, max(c - 3, 0):c + 4].any():
            continue
        noise_pixels.append((int(r), int(c)))
        occupied[r, c] = True
    return labels, noise_pixels


def noisy_blob_image(shape: Tuple[int, int] = (48, 48), blobs: int = 3, noise: int = 12, seed: int = 0
                     ) -> CategoricalImage:
    """Three-category image with large mitochondria blobs and isolated mitochondria noise pixels"""
    labels, noise_pixels = noisy_blob_labels(shape, blobs, noise, seed)
    data = _soften(labels, 3, DENOISE_CONFIDENCE)
    for pixel in noise_pixels:
        data[pixel] = NOISE_PIXEL
    return CategoricalImage(data)


def annotator_image(shape: Tuple[int, int] = (48, 48), annotators: int = 3, seed: int = 0) -> CategoricalImage:
    """
    Four concentric categories averaged over jittered annotators

    Background 0, edema 1, active core 2, inactive core 3 (innermost). Each
    annotator draws the same lesion with shifted centre and radii; the image
    is the per-pixel label frequency.
    """
    rng = np.random.default_rng(seed)
    center = np.array(shape, dtype=float) / 2.0
    radii = np.array([0.35, 0.22, 0.1]) * min(shape)
    votes = np.zeros(shape + (4,))
    for _ in range(annotators):
        c = center + rng.uniform(-1.5, 1.5, size=2)
        r = radii + rng.uniform(-2.0, 2.0, size=3)
        labels = np.zeros(shape, dtype=np.int64)
        for category, radius in zip((1, 2, 3), r):
            labels[_disk(shape, tuple(c), radius)] = category
        votes += one_hot(labels, 4).data
    return CategoricalImage(votes / annotators)


def dirichlet_subset_demo() -> DirichletImage:
    """
    1-D Dirichlet image showing that subset dilation shifts the expectation
    of channels outside the subset

    Dilating channel 0 alone raises alpha_0 next to the spike, so the expected
    probability of channels 1 and 2 drops there although their parameters are
    untouched.
    """
    data = np.ones((7, 3))
    data[3] = (6.0, 1.0, 1.0)
    return DirichletImage(data)


def random_simplex_image(shape: Tuple[int, ...] = (16, 16), channels: int = 3, seed: int = 0,
                         sharpness: float = 1.0) -> CategoricalImage:
    """Independent Dirichlet(sharpness) draws per pixel"""
    rng = np.random.default_rng(seed)
    data = rng.dirichlet(np.full(channels, sharpness), size=shape)
    return CategoricalImage(data / data.sum(axis=-1, keepdims=True))


SYNTHETIC_FIXTURES: Dict[str, Callable[..., object]] = {
    "noisy-blobs": noisy_blob_image,
    "annotators": annotator_image,
    "dirichlet-subset": dirichlet_subset_demo,
    "random": random_simplex_image,
}


def make_fixture(name: str, seed: int = 0):
    """Build a named fixture (seed ignored by the fixed Dirichlet demo)"""
    if name not in SYNTHETIC_FIXTURES:
        raise KeyError(f"unknown fixture {name!r}, expected one of {sorted(SYNTHETIC_FIXTURES)}")
    if name == "dirichlet-subset":
        return dirichlet_subset_demo()
    return SYNTHETIC_FIXTURES[name](seed=seed)
