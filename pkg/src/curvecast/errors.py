"""Exception types shared across the estimation engine."""


class CurvecastError(Exception):
    """Base class for all errors raised by this package."""


class EvaluationOverflowError(CurvecastError):
    """Curve evaluation would overflow (b^(c-x) beyond float range)."""


class TooFewPointsError(CurvecastError):
    """Fewer datapoints than the fitter's minimum cardinality."""


class NonFiniteInputError(CurvecastError):
    """An input value is NaN or infinite."""


class OutOfOrderEpochError(CurvecastError):
    """An epoch was reported that is not the previous epoch plus the step size."""


class FirstEpochMismatchError(CurvecastError):
    """History does not start at the configured epochs-per-step."""


class DuplicateModelError(CurvecastError):
    """A session is already active for this model id."""


class SessionFinishedError(CurvecastError):
    """The session has already produced a final decision."""


class MissingTrainLossError(CurvecastError):
    """The baseline rule needs train_loss on every row of the trace."""


class ProtocolError(CurvecastError):
    """A streaming request line is not valid JSON or misses required fields."""


class CorpusFormatError(CurvecastError):
    """A corpus or config file failed to parse (message carries the line number)."""


class CorpusInvariantError(CurvecastError):
    """A loaded trace violates a corpus invariant (message names the model)."""


class InvalidSpecError(CurvecastError):
    """A synthetic curve spec or population definition is invalid."""
