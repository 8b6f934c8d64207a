"""Exception types shared across g2kit."""


class G2KitError(Exception):
    """Base class for all library errors."""


class DegenerateInputError(G2KitError, ValueError):
    """Vectors that should span a k-plane are (numerically) rank deficient."""


class PreconditionError(G2KitError, ValueError):
    """An operation was called with inputs violating its stated precondition."""


class GridMismatchError(G2KitError, ValueError):
    """Two discretized objects do not live on the same grid."""


class SingularOperatorError(G2KitError, ArithmeticError):
    """A linear operator that must be inverted has a nontrivial kernel."""


class SolverError(G2KitError, RuntimeError):
    """An iterative solver stopped without meeting its tolerance."""

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace


class ConfigError(G2KitError, ValueError):
    """Invalid configuration text; carries line number and key when known."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key
