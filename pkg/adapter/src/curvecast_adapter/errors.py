"""Error taxonomy: connection trouble is retryable, contract breaks are not."""


class AdapterError(Exception):
    """Base class for all errors raised by this package."""


class TransportError(AdapterError):
    """The engine connection failed.

    The operation may be retried; the report that triggered it may or may
    not have reached the engine.
    """


class ProtocolViolation(AdapterError):
    """The streaming contract was broken; the handle refuses further use."""
