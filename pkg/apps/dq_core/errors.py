"""Exception hierarchy for dq_core.

Every error raised by the library derives from DqError and from the builtin
a caller would naturally catch (ValueError), so both styles work.
"""


class DqError(Exception):
    """Base class for all dq_core errors."""


class DimensionMismatchError(DqError, ValueError):
    """Operands have incompatible shapes or subsystem dimensions."""


class NotHermitianError(DqError, ValueError):
    """A matrix that must be Hermitian is not, within tolerance."""


class NotUnitaryError(DqError, ValueError):
    """A matrix that must be unitary is not, within tolerance."""


class NotCPTPError(DqError, ValueError):
    """A Kraus set violates the completeness relation."""


class InvalidStateError(DqError, ValueError):
    """A density matrix or state vector violates its invariants."""


class ParameterError(DqError, ValueError):
    """A numeric parameter is outside its supported range."""


class KLViolationError(DqError, ValueError):
    """An error set does not satisfy the Knill-Laflamme conditions on a code."""


class CodeConstructionError(DqError, ValueError):
    """A code space cannot be built for the requested parameters."""


class ConfigError(DqError, ValueError):
    """Configuration file, environment or flag values are invalid."""


class PayloadError(DqError, ValueError):
    """A JSON exchange payload is malformed."""
