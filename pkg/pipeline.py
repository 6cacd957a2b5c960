"""
Declarative morphology pipelines

A pipeline is plain text, one step per line:

    # denoise: open the mitochondria class
    open backend=categorical category=2 radius=1 norm=city-block tap=denoised

Keys: backend, category, subset, radius, norm, protect, mode, ranking,
geodesic, tap. Lists are comma separated, "-" means none. `canonical()`
prints every key in a fixed order with defaults filled in.

run_pipeline applies the steps in order, keeps the tapped intermediates,
optionally writes them (CATD plus a PNG render) and returns a step log with
timing and renormalization drift.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from baselines import label_dilate, label_erode, nary_dilate, nary_erode, set_dilate, set_erode
from catd import write_catd
from categorical import (
    CategoricalImage,
    CrispImage,
    DirichletImage,
    argmax_labels,
    membership,
    support_sets,
    track_drift,
    validate,
)
from catmorph import CATEGORICAL_OPS
from constants import BOTTOM, GEODESIC_BACKENDS, MODE_LITERAL, MORPH_BACKENDS, NORMS, OPS, PROTECTION_MODES
from dirichlet import dirichlet_op
from errors import CatMorphError, PipelineError
from imaging import render, render_labels, save_png
from protected import PROTECTED_OPS, ProtectionSpec
from structuring import StructuringElement
from utils.config import get_config
from utils.logger import get_logger, log_operation

logger = get_logger(__name__)

PipelineImage = Union[CategoricalImage, DirichletImage, CrispImage]

KEY_ORDER = ("backend", "category", "subset", "radius", "norm", "protect", "mode", "ranking", "geodesic", "tap")
LOG_COLUMNS = [
    "step", "op", "backend", "category", "radius", "norm", "protect", "mode", "tap", "seconds", "max_drift", "valid",
]


def _int_list(text: str) -> Tuple[int, ...]:
    if text in ("", "-"):
        return ()
    return tuple(int(v) for v in text.split(","))


def _list_text(values: Tuple[int, ...]) -> str:
    return ",".join(str(v) for v in values) if values else "-"


@dataclass(frozen=True)
class PipelineStep:
    """One morphology operation of a pipeline"""

    op: str
    backend: str = "categorical"
    category: Optional[int] = None
    subset: Tuple[int, ...] = ()
    radius: float = 1.0
    norm: str = "euclidean"
    protect: Tuple[int, ...] = ()
    mode: str = MODE_LITERAL
    ranking: Tuple[int, ...] = ()
    geodesic: str = "auto"
    tap: Optional[str] = None

    @property
    def se(self) -> StructuringElement:
        return StructuringElement.ball(self.radius, self.norm)

    def canonical(self) -> str:
        values = {
            "backend": self.backend,
            "category": "-" if self.category is None else str(self.category),
            "subset": _list_text(self.subset),
            "radius": f"{self.radius:g}",
            "norm": self.norm,
            "protect": _list_text(self.protect),
            "mode": self.mode,
            "ranking": _list_text(self.ranking),
            "geodesic": self.geodesic,
            "tap": self.tap or "-",
        }
        return " ".join([self.op] + [f"{key}={values[key]}" for key in KEY_ORDER])

    def check(self, channels: Optional[int] = None) -> None:
        """
        Static checks, plus category ranges when the channel count is known

        Raises:
            ValueError: with a message naming the offending key
        """
        if self.op not in OPS:
            raise ValueError(f"unknown op {self.op!r}, expected one of {OPS}")
        if self.backend not in MORPH_BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}, expected one of {MORPH_BACKENDS}")
        if self.norm not in NORMS:
            raise ValueError(f"unknown norm {self.norm!r}, expected one of {NORMS}")
        if self.mode not in PROTECTION_MODES:
            raise ValueError(f"unknown mode {self.mode!r}, expected one of {PROTECTION_MODES}")
        if self.geodesic not in GEODESIC_BACKENDS:
            raise ValueError(f"unknown geodesic backend {self.geodesic!r}, expected one of {GEODESIC_BACKENDS}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.backend in ("categorical", "nary") and self.category is None:
            raise ValueError(f"backend {self.backend} needs category=")
        if self.backend == "dirichlet-subset" and not self.subset:
            raise ValueError("backend dirichlet-subset needs subset=")
        if self.protect and self.backend != "categorical":
            raise ValueError("protect= is only supported by the categorical backend")
        if self.category is not None and self.category in self.protect:
            raise ValueError(f"category {self.category} cannot also be protected")

        if channels is None:
            return
        for name, values in (("category", () if self.category is None else (self.category,)),
                             ("subset", self.subset), ("protect", self.protect), ("ranking", self.ranking)):
            for k in values:
                if not 0 <= k < channels:
                    raise ValueError(f"{name} {k} outside [0, {channels})")


def parse_step(line: str) -> PipelineStep:
    """Parse one `op key=value ...` line"""
    words = line.split()
    if not words:
        raise ValueError("empty step")
    kwargs: Dict[str, object] = {"norm": get_config().DEFAULT_NORM}
    for word in words[1:]:
        key, sep, value = word.partition("=")
        if not sep or key not in KEY_ORDER:
            raise ValueError(f"cannot parse {word!r}, expected key=value with key in {KEY_ORDER}")
        if key in ("subset", "protect", "ranking"):
            kwargs[key] = _int_list(value)
        elif key == "category":
            kwargs[key] = None if value == "-" else int(value)
        elif key == "radius":
            kwargs[key] = float(value)
        elif key == "tap":
            kwargs[key] = None if value == "-" else value
        else:
            kwargs[key] = value
    step = PipelineStep(words[0], **kwargs)
    step.check()
    return step


@dataclass
class PipelineSpec:
    """Ordered list of steps"""

    steps: List[PipelineStep] = field(default_factory=list)

    @classmethod
    def parse(cls, text: str) -> "PipelineSpec":
        """
        Parse pipeline text; blank lines and # comments are skipped

        Raises:
            PipelineError: (usage) with the index of the offending step
        """
        steps = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                steps.append(parse_step(line))
            except ValueError as e:
                raise PipelineError(str(e), step=len(steps), usage=True) from e
        return cls(steps)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "PipelineSpec":
        return cls.parse(Path(path).read_text())

    def canonical(self) -> str:
        return "".join(step.canonical() + "\n" for step in self.steps)

    def check(self, channels: int) -> None:
        """Check every step against an input channel count"""
        for k, step in enumerate(self.steps):
            try:
                step.check(channels)
            except ValueError as e:
                raise PipelineError(str(e), step=k, usage=True) from e


# =============================================================================
# Step execution
# =============================================================================

def _compose(first, second):
    return lambda f, *args: second(first(f, *args), *args)


_CRISP_OPS = {
    "set": {"dilate": set_dilate, "erode": set_erode},
    "label": {"dilate": label_dilate, "erode": label_erode},
}
for _table in _CRISP_OPS.values():
    _table["open"] = _compose(_table["erode"], _table["dilate"])
    _table["close"] = _compose(_table["dilate"], _table["erode"])


def _nary(step: PipelineStep):
    ranking = list(step.ranking) or None

    def erode(f, i, se):
        return nary_erode(f, i, se, ranking=ranking)

    table = {"dilate": nary_dilate, "erode": erode}
    table["open"] = _compose(erode, nary_dilate)
    table["close"] = _compose(nary_dilate, erode)
    return table[step.op]


def _as_crisp(image: PipelineImage, mode: str) -> CrispImage:
    """Label or set view of a pipeline image; crisp inputs must already be in that mode"""
    if isinstance(image, CrispImage):
        if image.mode != mode:
            raise PipelineError(f"a {image.mode}-mode image cannot feed a {mode}-mode step")
        return image
    if not isinstance(image, CategoricalImage):
        raise PipelineError(f"crisp backends need a categorical input, got {type(image).__name__}")
    if mode == "set":
        return support_sets(image)
    return argmax_labels(image)


def apply_step(image: PipelineImage, step: PipelineStep) -> PipelineImage:
    """Run one step, converting the input to what the backend operates on"""
    se = step.se
    if step.backend in ("dirichlet", "dirichlet-subset"):
        if not isinstance(image, DirichletImage):
            raise PipelineError(f"backend {step.backend} needs a Dirichlet input, got {type(image).__name__}")
        subset = list(step.subset) if step.backend == "dirichlet-subset" else None
        return dirichlet_op(step.op)(image, se, subset)

    if step.backend == "categorical":
        if not isinstance(image, CategoricalImage):
            raise PipelineError(f"backend categorical needs a categorical input, got {type(image).__name__}")
        if step.protect:
            spec = ProtectionSpec.from_channels(step.protect, step.mode, step.geodesic)
            return PROTECTED_OPS[step.op](image, step.category, se, spec)
        return CATEGORICAL_OPS[step.op](image, step.category, se)

    if step.backend == "nary":
        return _nary(step)(_as_crisp(image, "label"), step.category, se)
    mode = "set" if step.backend == "set" else "label"
    return _CRISP_OPS[mode][step.op](_as_crisp(image, mode), se)


def render_image(image: PipelineImage) -> np.ndarray:
    """Default PNG view of a pipeline image"""
    if isinstance(image, (CategoricalImage, DirichletImage)):
        return render(image, "rgb-mixture" if image.channels <= 3 else "argmax")
    if image.mode == "label":
        return render_labels(image)
    # set mode: colour of the lowest present category, BOTTOM for empty sets
    members = membership(image)
    labels = np.where(members.any(axis=-1), np.argmax(members, axis=-1), BOTTOM)
    return render_labels(labels, channels=image.categories)


# =============================================================================
# Running
# =============================================================================

@dataclass
class PipelineResult:
    """Final image, tapped intermediates and the per-step log"""

    image: PipelineImage
    taps: Dict[str, PipelineImage]
    log: pd.DataFrame


def _channels(image: PipelineImage) -> int:
    return image.categories if isinstance(image, CrispImage) else image.channels


def _is_valid(image: PipelineImage) -> bool:
    if isinstance(image, CategoricalImage):
        return validate(image, get_config().SIMPLEX_TOL).ok
    return True


def write_outputs(result: PipelineResult, output_dir: Union[str, Path], render_taps: Optional[bool] = None) -> Path:
    """Write taps (CATD + optional PNG render) and the step log (JSON and CSV)"""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    render_taps = get_config().RENDER_TAPS if render_taps is None else render_taps
    for name, image in result.taps.items():
        write_catd(image, output_dir / f"{name}.catd")
        if render_taps and len(image.shape) == 2:
            save_png(render_image(image), output_dir / f"{name}.png", rank=2)
    result.log.to_json(output_dir / "pipeline_log.json", orient="records", indent=2)
    result.log.to_csv(output_dir / "pipeline_log.csv", index=False)
    logger.info("Wrote %d taps and the step log to %s", len(result.taps), output_dir)
    return output_dir


def run_pipeline(
    spec: PipelineSpec,
    image: PipelineImage,
    output_dir: Optional[Union[str, Path]] = None,
    render_taps: Optional[bool] = None,
) -> PipelineResult:
    """
    Apply every step in order

    Args:
        spec: pipeline
        image: input image
        output_dir: if given, taps and the step log are written there
        render_taps: write a PNG next to each tap (RENDER_TAPS by default)

    Raises:
        PipelineError: the first failing step, with its index
    """
    spec.check(_channels(image))
    rows = []
    taps: Dict[str, PipelineImage] = {}

    for k, step in enumerate(spec.steps):
        try:
            timing = log_operation(logger, f"step {k}", op=step.op, backend=step.backend, radius=f"{step.radius:g}")
            with timing as ctx, track_drift() as tracker:
                image = apply_step(image, step)
        except PipelineError as e:
            raise PipelineError(str(e), step=k, usage=e.usage) from e
        except CatMorphError as e:
            raise PipelineError(str(e), step=k) from e

        valid = _is_valid(image)
        rows.append({
            "step": k,
            "op": step.op,
            "backend": step.backend,
            "category": step.category,
            "radius": step.radius,
            "norm": step.norm,
            "protect": _list_text(step.protect),
            "mode": step.mode,
            "tap": step.tap,
            "seconds": ctx.duration,
            "max_drift": tracker.max_drift,
            "valid": valid,
        })
        if not valid:
            raise PipelineError("output failed simplex validation", step=k)
        if step.tap:
            taps[step.tap] = image

    result = PipelineResult(image, taps, pd.DataFrame(rows, columns=LOG_COLUMNS))
    if output_dir is not None:
        write_outputs(result, output_dir, render_taps)
    return result


# =============================================================================
# Built-in recipes
# =============================================================================

RECIPES: Dict[str, str] = {
    "denoise": (
        "# remove isolated mitochondria misclassifications (cytosol 0, membrane 1, mitochondria 2)\n"
        "open backend=categorical category=2 radius=1 norm=city-block tap=denoised\n"
    ),
    "annotator-bias": (
        "# background 0, edema 1, active core 2, inactive core 3\n"
        "dilate backend=categorical category=2 radius=1 norm=euclidean protect=0,1 tap=active_core\n"
        "dilate backend=categorical category=1 radius=1 norm=euclidean protect=0 tap=edema\n"
    ),
}


def recipe(name: str, radius: Optional[float] = None) -> PipelineSpec:
    """
    Built-in recipe, optionally with every step's radius replaced

    Raises:
        PipelineError: unknown recipe (usage)
    """
    if name not in RECIPES:
        raise PipelineError(f"unknown recipe {name!r}, expected one of {sorted(RECIPES)}", usage=True)
    spec = PipelineSpec.parse(RECIPES[name])
    if radius is not None:
        spec = PipelineSpec([replace(step, radius=float(radius)) for step in spec.steps])
    return spec
