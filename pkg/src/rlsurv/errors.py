"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class InvalidState(RuntimeError):
    pass


class NumericFailure(ArithmeticError):
    """An optimizer step produced NaN or Inf parameters."""


class NotReady(RuntimeError):
    """Replay buffer holds fewer transitions than the requested batch."""


class SchemaError(ValueError):
    pass


class ParseError(ValueError):
    pass
