"""Exception types shared across the verification suites."""


class MinsurfError(Exception):
    """Base class for all package errors."""


class DomainError(MinsurfError):
    """Argument outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at the coordinate pole where a formula is singular."""


class ConfigError(MinsurfError):
    """Scenario or manifest is missing data required by an operation."""


class ScenarioParseError(ConfigError):
    """Malformed scenario/manifest text.  Carries the offending position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {column})" if column is not None else ")")
        super().__init__(message + loc)


class InvariantViolation(ConfigError):
    """A declared scenario fails one of its construction invariants."""

    def __init__(self, message, residual=None):
        self.residual = residual
        if residual is not None:
            message = f"{message} [residual = {residual:.3e}]"
        super().__init__(message)


class NumericError(MinsurfError):
    """A numerical routine failed to converge or produced inconsistent results."""

    def __init__(self, message, detail=None):
        self.detail = detail
        super().__init__(message if detail is None else f"{message}: {detail}")


class Inapplicable(MinsurfError):
    """A check's hypotheses are not met; distinct from pass/fail."""


class VerificationFailure(MinsurfError):
    """A verified identity or inequality fails beyond its tolerance."""

    def __init__(self, message, worst=None):
        self.worst = worst
        super().__init__(message)
