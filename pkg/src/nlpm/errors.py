"""Exception types shared across the package."""


class InvalidSizeError(ValueError):
    """Grid size is not a supported power of two, or shapes disagree."""


class InvalidArgumentError(ValueError):
    """Argument is outside its documented domain."""


class SolverFailure(RuntimeError):
    """A linear solve did not reach its tolerance.

    ``x`` holds the best iterate found and ``report`` the final SolveReport.
    """

    def __init__(self, message, x=None, report=None):
        super().__init__(message)
        self.x = x
        self.report = report


class BreakdownError(SolverFailure):
    """Krylov iteration hit a (near) zero inner product."""


class SingularSystemError(SolverFailure):
    """Dense system is singular or too ill-conditioned to trust."""


class FlowError(RuntimeError):
    """A time step failed inside ``run_flow``.

    Carries the failing ``step`` index and the partial ``result`` collected
    up to (not including) that step.
    """

    def __init__(self, message, step, result):
        super().__init__(message)
        self.step = step
        self.result = result


class PGMFormatError(ValueError):
    """Malformed or unsupported PGM data; ``offset`` is the byte position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ConfigError(ValueError):
    """Bad experiment configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line
