"""Session management and the newline-JSON request/response protocol.

A session owns one model's history and applies the stopping rules after
every report.  The engine keeps sessions keyed by model id so many runs can
be tracked at once; a model id can be reused after its session finished.

Protocol: one JSON object per line.

    request   {"model": str, "epoch": num, "val_acc": num, "val_loss": num}
    response  {"model": str, "action": "continue" | "stop",
               "estimate": num | null, "converged": bool,
               "stop_epoch": num | null}

Malformed or rejected requests produce {"model": str | null, "error": str}.
"""

from __future__ import annotations

import json
import numbers
from typing import Optional

from .analyzer import AnalyzerConfig, DatasetProfile, EngineDecision, analyze
from .curve import ParamBox
from .errors import (
    CurvecastError,
    DuplicateModelError,
    ProtocolError,
    SessionFinishedError,
)
from .fitting import FitConfig
from .history import History

_REQUEST_FIELDS = ("model", "epoch", "val_acc", "val_loss")


class Session:
    """One tracked training run; finished once a stop decision is issued."""

    def __init__(
        self,
        model: str,
        config: AnalyzerConfig | None = None,
        profile: DatasetProfile | None = None,
        fit_config: FitConfig | None = None,
        box: ParamBox | None = None,
    ):
        self.model = model
        self.config = config or AnalyzerConfig()
        self.profile = profile
        self.history = History(model, step=self.config.step, fit_config=fit_config, box=box)
        self.final_decision: Optional[EngineDecision] = None

    @property
    def finished(self) -> bool:
        return self.final_decision is not None

    def step(self, epoch: float, val_acc: float, val_loss: float) -> EngineDecision:
        if self.finished:
            raise SessionFinishedError(f"{self.model}: session already stopped")
        self.history.record_and_predict(epoch, val_acc, val_loss)
        decision = analyze(self.history, self.config, self.profile)
        if decision.stopped:
            self.final_decision = decision
        return decision


class Engine:
    """Tracks any number of concurrent runs, one session per model id."""

    def __init__(
        self,
        config: AnalyzerConfig | None = None,
        profile: DatasetProfile | None = None,
        fit_config: FitConfig | None = None,
        box: ParamBox | None = None,
    ):
        self.config = config or AnalyzerConfig()
        self.profile = profile
        self.fit_config = fit_config
        self.box = box
        self._sessions: dict[str, Session] = {}

    @property
    def sessions(self) -> dict[str, Session]:
        return dict(self._sessions)

    def open_session(
        self,
        model: str,
        config: AnalyzerConfig | None = None,
        profile: DatasetProfile | None = None,
    ) -> Session:
        """Create a session for ``model``; replaces only finished ones.

        Per-session config/profile overrides default to the engine's own.
        """
        existing = self._sessions.get(model)
        if existing is not None and not existing.finished:
            raise DuplicateModelError(f"{model}: session already active")
        session = Session(
            model,
            config=config or self.config,
            profile=profile if profile is not None else self.profile,
            fit_config=self.fit_config,
            box=self.box,
        )
        self._sessions[model] = session
        return session

    def step(self, model: str, epoch: float, val_acc: float, val_loss: float) -> EngineDecision:
        """Route a report to the model's session, opening one if needed."""
        session = self._sessions.get(model)
        if session is None or session.finished:
            session = self.open_session(model)
        return session.step(epoch, val_acc, val_loss)


def parse_request(line: str) -> tuple[str, float, float, float]:
    """Decode one request line into (model, epoch, val_acc, val_loss)."""
    try:
        payload = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ProtocolError("request must be a JSON object")
    missing = [f for f in _REQUEST_FIELDS if f not in payload]
    if missing:
        raise ProtocolError(f"missing fields: {', '.join(missing)}")
    model = payload["model"]
    if not isinstance(model, str) or not model:
        raise ProtocolError("model must be a non-empty string")
    values = []
    for field in ("epoch", "val_acc", "val_loss"):
        value = payload[field]
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise ProtocolError(f"{field} must be a number")
        values.append(float(value))
    return model, values[0], values[1], values[2]


def response_payload(model: str, decision: EngineDecision) -> dict:
    return {
        "model": model,
        "action": "stop" if decision.stopped else "continue",
        "estimate": decision.estimate,
        "converged": decision.converged,
        "stop_epoch": decision.stop_epoch,
    }


def response_line(model: str, decision: EngineDecision) -> str:
    return json.dumps(response_payload(model, decision))


def error_line(model: Optional[str], message: str) -> str:
    return json.dumps({"model": model, "error": message})


def handle_line(engine: Engine, line: str) -> str:
    """One protocol exchange: request line in, response or error line out."""
    model: Optional[str] = None
    try:
        model, epoch, val_acc, val_loss = parse_request(line)
        decision = engine.step(model, epoch, val_acc, val_loss)
    except (CurvecastError, ValueError) as exc:
        return error_line(model, str(exc))
    return response_line(model, decision)
