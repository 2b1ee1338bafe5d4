"""Thin client for training loops: report each validation, stop when told.

``attach`` opens a handle for one model; ``report`` sends the per-validation
tuple over the transport and returns the engine's "continue" or "stop";
``finalize`` dumps everything reported as a trace CSV plus profile sidecar
in the engine's corpus format, so the live run can be replayed offline and
reproduces the same decisions.

The handle owns the epoch bookkeeping: reports must arrive in order, spaced
by the step E given at attach, starting at E.  Breaking that, reporting
after a stop, or any malformed exchange raises ``ProtocolViolation`` and
kills the handle.  Connection failures raise ``TransportError`` and leave
the handle usable, so the caller may retry.
"""

from __future__ import annotations

import csv
import json
import math
import numbers
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import ProtocolViolation
from .transport import Transport

_EPOCH_TOL = 1e-9
_CSV_HEADER = ["model_id", "epoch", "val_acc", "val_loss", "train_loss"]
_ACTIONS = ("continue", "stop")


@dataclass(frozen=True)
class TraceProfile:
    """Dataset description written into the trace sidecar.

    Must match the profile the engine serves with, or the dumped trace will
    not replay to the same decisions.  The default is a balanced dataset,
    which matches an engine running with no profile (loss check off).
    """

    name: str = "unspecified"
    num_classes: int = 2
    class_fractions: Optional[tuple[float, ...]] = None
    balanced: bool = True

    @classmethod
    def from_file(cls, path: str | Path) -> "TraceProfile":
        """Read a ``key = value`` profile file (extra keys are ignored)."""
        pairs: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key = value")
                key, _, value = line.partition("=")
                pairs[key.strip()] = value.strip()
        missing = [k for k in ("name", "num_classes", "balanced") if k not in pairs]
        if missing:
            raise ValueError(f"{path}: missing keys: {', '.join(missing)}")
        fractions = None
        if pairs.get("class_fractions"):
            fractions = tuple(float(f) for f in pairs["class_fractions"].split(","))
        return cls(
            name=pairs["name"],
            num_classes=int(pairs["num_classes"]),
            class_fractions=fractions,
            balanced=pairs["balanced"].lower() == "true",
        )


@dataclass(frozen=True)
class StopInfo:
    """The engine's verdict when it tells a run to stop."""

    estimate: float
    stop_epoch: float
    converged: bool


@dataclass(frozen=True)
class _Row:
    epoch: float
    val_acc: float
    val_loss: float
    train_loss: Optional[float]


class RunHandle:
    """Live reporting session for one model.  Create via ``attach``."""

    def __init__(
        self,
        model: str,
        step: float,
        transport: Transport,
        trace_dir: str | Path,
        profile: TraceProfile,
    ):
        self.model = model
        self.step = step
        self._transport = transport
        self._trace_path = Path(trace_dir) / f"{model}.csv"
        self._profile = profile
        self._rows: list[_Row] = []
        self._stop: Optional[StopInfo] = None
        self._dead: Optional[str] = None
        self._finalized = False

    @property
    def stopped(self) -> bool:
        return self._stop is not None

    @property
    def stop_info(self) -> Optional[StopInfo]:
        return self._stop

    @property
    def last_epoch(self) -> Optional[float]:
        return self._rows[-1].epoch if self._rows else None

    def _fatal(self, message: str) -> ProtocolViolation:
        self._dead = message
        return ProtocolViolation(f"{self.model}: {message}")

    def report(
        self,
        epoch: float,
        val_acc: float,
        val_loss: float,
        train_loss: Optional[float] = None,
    ) -> str:
        """Send one validation result; returns "continue" or "stop"."""
        if self._dead is not None:
            raise ProtocolViolation(f"{self.model}: handle is dead ({self._dead})")
        if self._finalized:
            raise self._fatal("already finalized")
        if self._stop is not None:
            raise self._fatal(
                f"already stopped at epoch {self._stop.stop_epoch}; no further reports"
            )
        expected = (self._rows[-1].epoch if self._rows else 0.0) + self.step
        if not math.isclose(epoch, expected, rel_tol=0, abs_tol=_EPOCH_TOL):
            raise self._fatal(f"expected epoch {expected}, got {epoch}")

        request = json.dumps(
            {
                "model": self.model,
                "epoch": float(epoch),
                "val_acc": float(val_acc),
                "val_loss": float(val_loss),
            }
        )
        reply = self._transport.exchange(request)
        payload = self._decode(reply)
        if "error" in payload:
            raise self._fatal(f"engine error: {payload['error']}")
        if payload.get("model") != self.model:
            raise self._fatal(f"response for wrong model: {payload.get('model')!r}")
        action = payload.get("action")
        if action not in _ACTIONS:
            raise self._fatal(f"unknown action: {action!r}")

        self._rows.append(
            _Row(
                epoch=float(epoch),
                val_acc=float(val_acc),
                val_loss=float(val_loss),
                train_loss=None if train_loss is None else float(train_loss),
            )
        )
        if action == "stop":
            self._stop = StopInfo(
                estimate=self._number(payload, "estimate"),
                stop_epoch=self._number(payload, "stop_epoch"),
                converged=self._flag(payload, "converged"),
            )
        return action

    def _decode(self, reply: str) -> dict:
        try:
            payload = json.loads(reply)
        except json.JSONDecodeError:
            raise self._fatal(f"unparseable response: {reply!r}") from None
        if not isinstance(payload, dict):
            raise self._fatal(f"response is not an object: {reply!r}")
        return payload

    def _number(self, payload: dict, field: str) -> float:
        value = payload.get(field)
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise self._fatal(f"stop response {field} is not a number: {value!r}")
        return float(value)

    def _flag(self, payload: dict, field: str) -> bool:
        value = payload.get(field)
        if not isinstance(value, bool):
            raise self._fatal(f"stop response {field} is not a boolean: {value!r}")
        return value

    def finalize(self) -> Path:
        """Write the recorded trace and its sidecar; returns the CSV path."""
        if self._dead is not None:
            raise ProtocolViolation(f"{self.model}: handle is dead ({self._dead})")
        if self._finalized:
            return self._trace_path
        if not self._rows:
            raise ValueError(f"{self.model}: nothing reported, no trace to write")
        self._trace_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self._trace_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(_CSV_HEADER)
            for row in self._rows:
                train = "" if row.train_loss is None else repr(row.train_loss)
                writer.writerow(
                    [self.model, repr(row.epoch), repr(row.val_acc), repr(row.val_loss), train]
                )
        self._trace_path.with_suffix(".profile").write_text(
            self._sidecar_text(), encoding="utf-8"
        )
        self._finalized = True
        return self._trace_path

    def _sidecar_text(self) -> str:
        profile = self._profile
        fractions = ""
        if profile.class_fractions is not None:
            fractions = ",".join(repr(float(f)) for f in profile.class_fractions)
        pairs = {
            "name": profile.name,
            "num_classes": str(profile.num_classes),
            "class_fractions": fractions,
            "balanced": "true" if profile.balanced else "false",
            "E": repr(float(self.step)),
            "e_full": repr(self._rows[-1].epoch),
        }
        return "".join(f"{key} = {value}\n" for key, value in pairs.items())


def attach(
    model: str,
    step: float,
    transport: Transport,
    trace_dir: str | Path = ".",
    profile: Optional[TraceProfile] = None,
) -> RunHandle:
    """Open a reporting handle for one model.

    ``step`` is the epoch interval between validations (E); reports must
    arrive at E, 2E, 3E, ...  Raises ``TransportError`` if the engine is
    unreachable.  Handles may share a transport; the engine keeps their
    sessions apart by model id.
    """
    if not isinstance(model, str) or not model:
        raise ValueError("model must be a non-empty string")
    if not (isinstance(step, numbers.Real) and math.isfinite(step) and step > 0):
        raise ValueError(f"step must be a positive number, got {step!r}")
    transport.open()
    return RunHandle(
        model=model,
        step=float(step),
        transport=transport,
        trace_dir=trace_dir,
        profile=profile if profile is not None else TraceProfile(),
    )


class TrainingCallback:
    """Minimal loop hook: call after each validation pass, train while True.

    Example::

        callback = TrainingCallback(attach("run-1", 0.5, transport))
        while callback(epoch, val_acc, val_loss, train_loss):
            ...  # keep training
        trace = callback.finalize()
    """

    def __init__(self, handle: RunHandle):
        self.handle = handle

    def __call__(
        self,
        epoch: float,
        val_acc: float,
        val_loss: float,
        train_loss: Optional[float] = None,
    ) -> bool:
        return self.handle.report(epoch, val_acc, val_loss, train_loss) == "continue"

    def finalize(self) -> Path:
        return self.handle.finalize()
