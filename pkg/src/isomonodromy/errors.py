"""Exception hierarchy.

Every class carries a stable ``code`` so that the command line tool can emit
structured error objects; one class maps to exactly one code.
"""


class IsomonodromyError(Exception):
    code = "error"


class InvalidSystemError(IsomonodromyError):
    """The system violates one of its structural invariants."""

    code = "invalid-system"

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class SingularPointError(IsomonodromyError):
    """Evaluation at, or a path through, a pole of the system."""

    code = "singular-point"


class SingularConfigurationError(IsomonodromyError):
    """Two pole loci coincide."""

    code = "singular-configuration"


class IrregularInfinityError(IsomonodromyError):
    """The residues do not sum to zero, so infinity is not a regular point."""

    code = "irregular-infinity"


class ChartSwitchError(IsomonodromyError):
    code = "chart-switch"


class RealizationError(IsomonodromyError):
    """A loop word cannot be realised at the requested clearance."""

    code = "realization-failure"

    def __init__(self, message, blocking_pole=None):
        super().__init__(message)
        self.blocking_pole = blocking_pole


class StepUnderflowError(IsomonodromyError):
    code = "step-underflow"


class NumericalFailure(IsomonodromyError):
    code = "numerical-failure"


class BranchCutError(IsomonodromyError):
    """A defective eigenvalue cluster straddles the logarithm branch cut."""

    code = "branch-cut"


class ConfinementError(IsomonodromyError):
    """A pole leaves its confinement disk, or the disks overlap."""

    code = "confinement-violation"


class ParameterDomainError(IsomonodromyError):
    code = "parameter-domain"


class FileFormatError(IsomonodromyError):
    """Malformed system file; carries the line and column when known."""

    code = "syntax-error"

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


__all__ = [
    "IsomonodromyError", "InvalidSystemError", "SingularPointError", "SingularConfigurationError",
    "IrregularInfinityError", "ChartSwitchError", "RealizationError", "StepUnderflowError",
    "NumericalFailure", "BranchCutError", "ConfinementError", "ParameterDomainError",
    "FileFormatError",
]
