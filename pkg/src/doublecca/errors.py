"""Error types shared across the package.

Every domain error carries a ``category`` used by the CLI to choose an exit
code and by the service to shape the error response:

  usage      -> exit 1 (bad invocation or malformed request)
  data       -> exit 2 (shape, alignment, file-format, protocol problems)
  numerical  -> exit 3 (the math failed on structurally valid input)
"""

from __future__ import annotations

EXIT_CODES = {"usage": 1, "data": 2, "numerical": 3}


class DccaError(Exception):
    """Base class for all domain errors."""

    category = "data"

    @property
    def name(self) -> str:
        return type(self).__name__

    def to_json(self) -> dict:
        return {"error": self.name, "message": str(self), "category": self.category}


class UsageError(DccaError):
    category = "usage"


# -- shape / alignment -------------------------------------------------------

class ShapeMismatch(DccaError):
    """Operand dimensions do not agree."""


class AlignmentError(DccaError):
    """Row counts or seeds are inconsistent between paired inputs."""


class RankRequestTooLarge(DccaError):
    """Requested output dimension exceeds what the input can support."""


class DimensionTooSmall(DccaError):
    """Embedding dimension too small to hold the requested directions."""


# -- numerical ----------------------------------------------------------------

class NotSymmetric(DccaError):
    category = "numerical"


class NonFinite(DccaError):
    category = "numerical"


class DegenerateView(DccaError):
    """A data view has zero total variance."""

    category = "numerical"


class SingularPA(DccaError):
    """Second-stage projection matrix is numerically singular."""

    category = "numerical"


# -- prompt generation --------------------------------------------------------

class EmptyClassName(DccaError):
    pass


class MissingWordlist(DccaError):
    pass


class ZeroK(DccaError):
    pass


class DuplicateClassNames(DccaError):
    pass


class TooFewClasses(DccaError):
    pass


# -- embedding file format ----------------------------------------------------

class BadMagic(DccaError):
    pass


class UnsupportedVersion(DccaError):
    pass


class TruncatedFile(DccaError):
    pass


class DtypeUnknown(DccaError):
    pass


class ZeroRow(DccaError):
    pass


# -- embedding service client -------------------------------------------------

class HttpError(DccaError):
    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"embedding service returned HTTP {status}")
        self.status = status


class ModelUnknown(DccaError):
    pass


class PayloadTooLarge(DccaError):
    pass


class DimMismatchAcrossBatches(DccaError):
    pass


# -- evaluation ----------------------------------------------------------------

class EmptyGroup(DccaError):
    """No group in the evaluation set has any samples."""


def exit_code_for(err: BaseException) -> int:
    if isinstance(err, DccaError):
        return EXIT_CODES[err.category]
    return EXIT_CODES["numerical"]
