"""Exception types shared across the package.

Each class carries the CLI exit code it maps to.
"""


class NomaError(Exception):
    exit_code = 1


class DomainError(NomaError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 3


class ConfigError(NomaError):
    """Malformed or incomplete scenario file."""

    exit_code = 2

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class InvariantError(NomaError):
    """Well-formed input that violates a domain invariant."""

    exit_code = 3


class InfeasibleError(NomaError):
    exit_code = 4

    def __init__(self, constraint, message):
        self.constraint = constraint
        super().__init__(f"{constraint} violated: {message}")


class NonConvergenceError(NomaError):
    exit_code = 5

    def __init__(self, message, trace=None, diagnostics=None):
        self.trace = list(trace or [])
        self.diagnostics = dict(diagnostics or {})
        super().__init__(message)
