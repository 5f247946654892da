"""Error taxonomy shared by all modules.

The CLI maps these onto exit codes: horizon and resource problems are exit 2,
parse/usage problems exit 3, and mathematical refusals (a predicate that is
genuinely false) are reported data, exit 1, not exceptions.
"""


class MoranError(Exception):
    """Base class for all package errors."""


class DomainError(MoranError):
    """Mathematically invalid input (zero where nonzero required, etc.)."""


class UnsupportedCaseError(DomainError):
    """Input outside the supported regime (e.g. signed entries in a
    positive-only diagnostic)."""


class HorizonError(MoranError):
    """A finite-prefix sequence was queried past its horizon, or a claim
    about all indices cannot be certified from the available window."""


class ResourceError(MoranError):
    """An element cap or modulus cap would be exceeded."""


class PreconditionError(MoranError):
    """A documented operation precondition does not hold."""


class ParseError(MoranError):
    """Malformed configuration or certificate input; the message carries
    the source name and line when one is known."""
