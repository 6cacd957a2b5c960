"""
Constants for the categorical morphology toolkit
"""

# Simplex / plateau tolerances
SIMPLEX_TOL = 1e-6
PLATEAU_TOL = 1e-9
NEGATIVE_CLAMP = 1e-9
DRIFT_WARN_LEVEL = 1e-9

# Euclidean ball discretization slack (y in B_r iff ||y||_2 <= r + EUCLIDEAN_SLACK)
EUCLIDEAN_SLACK = 1e-9

# Structuring element norms
NORM_EUCLIDEAN = "euclidean"
NORM_CITY_BLOCK = "city-block"
NORM_CHESSBOARD = "chessboard"
NORMS = (NORM_EUCLIDEAN, NORM_CITY_BLOCK, NORM_CHESSBOARD)

# Label-mode sentinels (bottom = no category, top = conflicting categories)
BOTTOM = -1
TOP = -2

# Set-mode images are fixed-width bit sets
MAX_SET_CATEGORIES = 64

# Geodesic backends
BACKEND_DIJKSTRA = "dijkstra"
BACKEND_FMM = "fmm"
BACKEND_AUTO = "auto"
GEODESIC_BACKENDS = (BACKEND_DIJKSTRA, BACKEND_FMM, BACKEND_AUTO)

# Protection modes
MODE_LITERAL = "literal"
MODE_CAPACITY = "capacity"
PROTECTION_MODES = (MODE_LITERAL, MODE_CAPACITY)

# Pipeline vocabulary
OPS = ("dilate", "erode", "open", "close")
MORPH_BACKENDS = ("categorical", "dirichlet", "dirichlet-subset", "nary", "set", "label")

# CATD container
CATD_MAGIC = b"CATD"
CATD_VERSION = 1
KIND_CATEGORICAL = 0
KIND_DIRICHLET = 1
KIND_SCALAR = 2
CATD_KINDS = {
    KIND_CATEGORICAL: "categorical",
    KIND_DIRICHLET: "dirichlet",
    KIND_SCALAR: "scalar",
}

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

# Render styles
RENDER_STYLES = ("rgb-mixture", "entropy", "magnitude", "argmax")

# Default category palettes (index = category)
RGB_PALETTE = [
    (255, 0, 0),
    (0, 255, 0),
    (0, 0, 255),
]

SEGMENTATION_PALETTE = [
    (255, 255, 255),  # White - background / cytosol
    (31, 119, 180),   # Blue - edema / membrane
    (148, 103, 189),  # Purple - active core / mitochondria
    (255, 221, 87),   # Yellow - inactive core / reticulum
    (23, 190, 207),   # Teal - vesicle
    (214, 39, 40),    # Red
    (44, 160, 44),    # Green
    (127, 127, 127),  # Gray
]

# Category names used by the built-in recipes
DENOISE_CATEGORIES = ["cytosol", "membrane", "mitochondria"]
ANNOTATOR_CATEGORIES = ["background", "edema", "active core", "inactive core"]

# Render colours of the label-mode sentinels
SENTINEL_COLORS = {
    BOTTOM: (0, 0, 0),
    TOP: (64, 64, 64),
}
