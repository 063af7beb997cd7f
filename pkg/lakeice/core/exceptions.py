"""
Exception hierarchy for lakeice

Everything raised on purpose derives from LakeIceError. Validation problems
additionally derive from ValueError so callers that only know the builtin
still catch them. The CLI maps LakeIceError to exit status 1 and OSError to 2.
"""

from pathlib import Path


class LakeIceError(Exception):
    """Base class for all lakeice errors"""


class InvalidInputError(LakeIceError, ValueError):
    """A value or record violates a documented precondition"""


class OutOfSeasonError(InvalidInputError):
    """A date or day index falls outside the Sep 1 - May 31 winter season"""


class ParseError(InvalidInputError):
    """A file row could not be parsed"""

    def __init__(self, path: Path | str, line: int, message: str):
        self.path = Path(path)
        self.line = line
        super().__init__(f"{self.path.name}:{line}: {message}")


class DegenerateGeometryError(InvalidInputError):
    """Polygon or grid geometry cannot be used"""


class TrainingError(InvalidInputError):
    """A classifier cannot be trained on the given samples"""


class UndefinedMetricError(InvalidInputError):
    """A metric term has an empty denominator"""


class ConstraintViolationError(InvalidInputError):
    """Phenology dates break ordering or duration constraints"""


class InsufficientDataError(InvalidInputError):
    """Not enough data points for the requested statistic"""


class SynthesisError(LakeIceError):
    """The synthetic generator could not satisfy its constraints"""


class MissingInputError(LakeIceError):
    """A required input file was not given or does not exist"""
