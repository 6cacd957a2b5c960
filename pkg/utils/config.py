"""
Configuration management for the categorical morphology toolkit

Every Config field can be set through an environment variable of the same
name. A .env file is read first when present: the one named by
CATMORPH_ENV_FILE, otherwise ./.env or ../.env. Variables already set in the
environment win over the file.

Usage:
    from utils.config import get_config

    config = get_config()
    print(config.SIMPLEX_TOL)
    print(config.GEODESIC_BACKEND)
"""

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, List, Optional

from constants import GEODESIC_BACKENDS, NORMS

ENV_FILE_VARIABLE = "CATMORPH_ENV_FILE"
DEFAULT_ENV_FILES = (Path(".env"), Path("../.env"))

_TRUE = ("1", "true", "yes", "on")
_FALSE = ("0", "false", "no", "off")


def load_dotenv(env_file: Path = Path(".env")) -> Dict[str, str]:
    """
    Read KEY=VALUE pairs from a .env file

    Blank lines, # comments and lines without '=' are skipped; one pair of
    matching quotes around a value is removed. A missing file gives {}.
    """
    env_file = Path(env_file)
    if not env_file.exists():
        return {}

    pairs = {}
    for raw in env_file.read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith('#') or '=' not in line:
            continue
        key, _, value = line.partition('=')
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        pairs[key.strip()] = value
    return pairs


def _coerce(name: str, raw: str, default):
    """Environment string to the type of the field's default"""
    if isinstance(default, bool):
        text = raw.strip().lower()
        if text in _TRUE:
            return True
        if text in _FALSE:
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    try:
        return type(default)(raw.strip())
    except ValueError:
        raise ValueError(f"{name}: expected {type(default).__name__}, got {raw!r}") from None


@dataclass
class Config:
    """Toolkit configuration"""

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_TO_FILE: bool = False
    LOG_FILE_PATH: str = "logs/catmorph.log"

    # Numerics
    SIMPLEX_TOL: float = 1e-6
    PLATEAU_TOL: float = 1e-9
    RENORMALIZE: bool = True
    DEFAULT_NORM: str = "euclidean"

    # Geodesic distances / protected operations
    GEODESIC_BACKEND: str = "auto"
    DIJKSTRA_MAX_PIXELS: int = 128 * 128
    CAPACITY_PLEVELS: int = 64
    WALL_TOL: float = 1e-9
    FMM_INIT_RADIUS: float = 5.0

    # Crisp conversions
    SET_THRESHOLD: float = 1e-6

    # Pipeline output
    OUTPUT_DIR: str = "output"
    RENDER_TAPS: bool = True

    @classmethod
    def from_env(cls, env_file: Optional[Path] = None) -> "Config":
        """
        Build the configuration from the environment (and a .env file)

        Args:
            env_file: .env file to read instead of the default lookup

        Raises:
            ValueError: a variable that cannot be read as its field's type
        """
        if env_file is None and os.environ.get(ENV_FILE_VARIABLE):
            env_file = Path(os.environ[ENV_FILE_VARIABLE])
        candidates = [Path(env_file)] if env_file else DEFAULT_ENV_FILES
        for path in candidates:
            if path.exists():
                for key, value in load_dotenv(path).items():
                    os.environ.setdefault(key, value)
                break

        overrides = {
            f.name: _coerce(f.name, os.environ[f.name], f.default)
            for f in fields(cls)
            if f.name in os.environ
        }
        return cls(**overrides)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def validate(self) -> List[str]:
        """
        Check value ranges and names

        Returns:
            One message per problem (empty if valid)
        """
        errors = []

        if not 0 < self.SIMPLEX_TOL < 1e-2:
            errors.append(f"SIMPLEX_TOL should be in (0, 1e-2), got {self.SIMPLEX_TOL}")

        if not 0 < self.PLATEAU_TOL <= self.SIMPLEX_TOL:
            errors.append(f"PLATEAU_TOL should be in (0, SIMPLEX_TOL], got {self.PLATEAU_TOL}")

        if self.DEFAULT_NORM not in NORMS:
            errors.append(f"DEFAULT_NORM should be one of {NORMS}, got {self.DEFAULT_NORM!r}")

        if self.GEODESIC_BACKEND not in GEODESIC_BACKENDS:
            errors.append(f"GEODESIC_BACKEND should be one of {GEODESIC_BACKENDS}, got {self.GEODESIC_BACKEND!r}")

        if self.DIJKSTRA_MAX_PIXELS < 1:
            errors.append(f"DIJKSTRA_MAX_PIXELS should be positive, got {self.DIJKSTRA_MAX_PIXELS}")

        if self.CAPACITY_PLEVELS < 1:
            errors.append(f"CAPACITY_PLEVELS should be at least 1, got {self.CAPACITY_PLEVELS}")

        if not 0 <= self.WALL_TOL < 1e-3:
            errors.append(f"WALL_TOL should be in [0, 1e-3), got {self.WALL_TOL}")

        if self.FMM_INIT_RADIUS < 1:
            errors.append(f"FMM_INIT_RADIUS should be at least 1 pixel, got {self.FMM_INIT_RADIUS}")

        if not 0 <= self.SET_THRESHOLD < 1:
            errors.append(f"SET_THRESHOLD should be in [0, 1), got {self.SET_THRESHOLD}")

        return errors


_config: Optional[Config] = None


def get_config(reload: bool = False) -> Config:
    """Process-wide configuration, read from the environment on first use or on reload"""
    global _config

    if _config is None or reload:
        _config = Config.from_env()

    return _config
