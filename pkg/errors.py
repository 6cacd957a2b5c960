"""
Exception hierarchy for the categorical morphology toolkit

Every error raised on purpose by the toolkit derives from CatMorphError, so the
CLI can map it to the data/invariant exit code.
"""

from typing import Optional, Sequence, Tuple


class CatMorphError(Exception):
    """Base class for toolkit errors"""


class ImageValidationError(CatMorphError, ValueError):
    """An image violates its value-type invariant"""

    def __init__(self, message: str, index: Optional[Tuple[int, ...]] = None, defect: Optional[float] = None):
        super().__init__(message)
        self.index = index
        self.defect = defect


class StructuringElementError(CatMorphError, ValueError):
    """Invalid structuring element, or one that cannot serve the requested operation"""

    def __init__(self, message: str, index: Optional[Tuple[int, ...]] = None):
        super().__init__(message)
        self.index = index


class CategoryError(CatMorphError, ValueError):
    """Category index or label out of range, or inconsistent category sets"""


class AmbiguousThetaError(CatMorphError):
    """N-ary erosion met equally close categories and no ranking was supplied"""

    def __init__(self, index: Tuple[int, ...], categories: Sequence[int]):
        super().__init__(
            f"ambiguous theta at pixel {index}: categories {sorted(categories)} are equally close "
            f"(pass a ranking to break ties)"
        )
        self.index = index
        self.categories = sorted(categories)


class ContractViolation(CatMorphError, AssertionError):
    """A function was called outside its documented precondition"""


class CatdFormatError(CatMorphError):
    """Malformed CATD container"""

    def __init__(self, message: str, offset: int = 0, expected: Optional[int] = None, actual: Optional[int] = None):
        super().__init__(message)
        self.offset = offset
        self.expected = expected
        self.actual = actual


class PaletteError(CatMorphError, ValueError):
    """Palette does not fit the image"""

    def __init__(self, message: str, color: Optional[Tuple[int, ...]] = None, index: Optional[Tuple[int, ...]] = None):
        super().__init__(message)
        self.color = color
        self.index = index


class PipelineError(CatMorphError):
    """A pipeline step failed; `step` is its 0-based index (None for whole-pipeline problems)"""

    def __init__(self, message: str, step: Optional[int] = None, usage: bool = False):
        prefix = f"step {step}: " if step is not None else ""
        super().__init__(prefix + message)
        self.step = step
        self.usage = usage
