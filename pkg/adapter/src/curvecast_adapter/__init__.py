"""Stream per-validation metrics from a training loop to the estimation engine.

Attach a handle per model, report each validation result, stop training
when the engine says stop, and finalize to dump a replayable trace file.
The engine is reached over its newline-JSON streaming protocol (a child
process on stdio, or TCP); this package never imports the engine.
"""

from .batching import truncate_for_interval
from .client import RunHandle, StopInfo, TraceProfile, TrainingCallback, attach
from .errors import AdapterError, ProtocolViolation, TransportError
from .transport import DEFAULT_SERVE_COMMAND, StdioTransport, TcpTransport, Transport

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "DEFAULT_SERVE_COMMAND",
    "ProtocolViolation",
    "RunHandle",
    "StdioTransport",
    "StopInfo",
    "TcpTransport",
    "TraceProfile",
    "TrainingCallback",
    "Transport",
    "TransportError",
    "attach",
    "truncate_for_interval",
]
