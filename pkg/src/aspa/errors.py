"""Exception hierarchy shared by all aspa modules."""


class AspaError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(AspaError):
    """Source program rejected; carries the collected diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msg = "; ".join(str(d) for d in self.diagnostics) or "parse error"
        super().__init__(msg)


class EvalTypeError(AspaError):
    """Aggregate evaluation hit a non-integer collected value."""


class ResourceCapError(AspaError):
    """A configured size cap was exceeded (exit code 2 in the CLI).

    ``cap`` names the limit, ``actual``/``limit`` give the numbers, and
    ``hint`` optionally points at a cheaper mode.
    """

    def __init__(self, cap, actual, limit, hint=None):
        self.cap = cap
        self.actual = actual
        self.limit = limit
        self.hint = hint
        msg = f"{cap}: {actual} exceeds limit {limit}"
        if hint:
            msg += f" ({hint})"
        super().__init__(msg)


class NotStratifiedError(AspaError):
    """Operation requires an aggregate-stratified program."""


class NotMonotoneError(AspaError):
    """Operation requires a (verifiably) monotone program."""


class InconsistentProgramError(AspaError):
    """A definite computation derived falsum where a model was required."""


class InternalError(AspaError):
    """An internal invariant failed (exit code 3 in the CLI)."""
