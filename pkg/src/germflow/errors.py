"""Exception hierarchy.

Every domain failure carries a stable machine-readable ``code`` so the CLI
can surface it without string matching.
"""


class GermflowError(Exception):
    """Base class for all library errors."""

    code = "Error"


class ContextMismatchError(GermflowError):
    """Two jets from different contexts were combined."""

    code = "ContextMismatch"


class SpectrumError(GermflowError):
    """Malformed spectrum, basis or eigenvalue-log data."""

    code = "Spectrum"


class SingularLinearPartError(GermflowError):
    """A map that must be invertible has a singular linear part."""

    code = "SingularLinearPart"


class NonUnipotentError(GermflowError):
    """Logarithm requested for a map whose linear part is not unipotent."""

    code = "NonUnipotent"


class ExpSeriesError(GermflowError):
    """The Lie series did not converge within the iteration cutoff."""

    code = "ExpSeries"


class SmallDivisorError(GermflowError):
    """An exactly-nonresonant monomial produced a numerically tiny divisor."""

    code = "SmallDivisor"

    def __init__(self, message, exponents=None, component=None, divisor=None):
        super().__init__(message)
        self.exponents = exponents
        self.component = component
        self.divisor = divisor


class NotSemisimpleError(GermflowError):
    """Linearization hit a nonzero strongly resonant residue."""

    code = "NotSemisimple"

    def __init__(self, message, residue=()):
        super().__init__(message)
        self.residue = tuple(residue)


class EliminationError(GermflowError):
    """Degree-by-degree elimination failed to converge (internal)."""

    code = "Elimination"


class NonRealMapError(GermflowError):
    """A map required to be real failed the reality check."""

    code = "NonRealMap"


class NonRealLinearPartError(GermflowError):
    """A flow whose linear part must be real failed the reality check."""

    code = "NonRealLinearPart"


class PartnerNotFoundError(GermflowError):
    """No weakly resonant partner field found within the search bound."""

    code = "PartnerNotFound"


class PreconditionError(GermflowError):
    """An operation's documented precondition does not hold."""

    code = "Precondition"


class VerificationError(GermflowError):
    """A postcondition the library verifies before returning failed."""

    code = "Verification"


class UnsupportedPrecisionError(GermflowError):
    """Requested coefficient precision is not supported by this build."""

    code = "UnsupportedPrecision"


class ProblemFileError(GermflowError):
    """Problem file failed to parse or validate."""

    code = "Parse"
