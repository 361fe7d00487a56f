class OracleComplexityError(Exception):
    """Base class for library errors. ``exit_code`` is what the CLI returns."""

    exit_code = 1


class FormatError(OracleComplexityError, ValueError):
    """Malformed input file, label, or fraction string."""

    exit_code = 2


class ProblemError(OracleComplexityError, ValueError):
    """A problem or strategy violates its structural invariants."""

    exit_code = 2


class PreconditionError(OracleComplexityError, ValueError):
    """An operation's hypothesis does not hold (error bounds, mu_min, ...)."""

    exit_code = 3


class InfeasibleError(PreconditionError):
    """No strategy within the depth bound meets the error requirement."""


class CatalogCapError(OracleComplexityError, RuntimeError):
    """Predicted catalog or search size exceeds the configured cap."""

    exit_code = 4
