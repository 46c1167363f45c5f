"""Exception hierarchy shared by all modules."""


class ErgodicLabError(Exception):
    """Base class for every error raised by ergodic_lab."""


class ParseError(ErgodicLabError):
    def __init__(self, position, message):
        self.position = position
        self.message = message
        super().__init__(f"{message} (at offset {position})")


class DomainError(ErgodicLabError, ValueError):
    """Evaluation left the natural domain of an expression."""

    def __init__(self, message, subexpression=None, point=None):
        self.message = message
        self.subexpression = subexpression
        self.point = point
        text = message
        if subexpression is not None:
            text += f" in '{subexpression}'"
        if point is not None:
            text += f" at x={point!r}"
        super().__init__(text)


class JetMismatchError(ErgodicLabError, ValueError):
    pass


class OrderCapError(ErgodicLabError, ValueError):
    pass


class OrbitEscapeError(ErgodicLabError):
    """An iterate left the domain X (or the natural domain of the map)."""

    def __init__(self, step, point=None, seed=None, reason="left the domain"):
        self.step = step
        self.point = point
        self.seed = seed
        self.reason = reason
        msg = f"orbit {reason} at step {step}"
        if seed is not None:
            msg += f" (seed {seed!r})"
        if point is not None:
            msg += f": value {point!r}"
        super().__init__(msg)


class NoBracketError(ErgodicLabError):
    """The requested value is not attained on the search bracket."""


class PreconditionError(ErgodicLabError, ValueError):
    pass


class ContractionError(PreconditionError):
    pass


class ConvergenceError(ErgodicLabError):
    pass


class ContractionWarning(UserWarning):
    pass
