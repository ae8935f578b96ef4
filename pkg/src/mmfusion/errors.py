"""Exception types raised across the package."""


class DegenerateGeometry(ValueError):
    """Raised when two points coincide and a direction or range is undefined."""


class NonConvergence(RuntimeError):
    """Raised when the weight solver cannot produce a usable Newton step.

    ``diagnostics`` carries the per-iteration history collected so far.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = list(diagnostics or [])


class ConfigError(ValueError):
    """Invalid configuration document or value.

    ``field`` names the offending key and ``lineno`` the source line, when known.
    """

    def __init__(self, message, field=None, lineno=None):
        super().__init__(message)
        self.field = field
        self.lineno = lineno
