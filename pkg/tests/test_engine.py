import json

import numpy as np
import pytest

from curvecast.analyzer import AnalyzerConfig, DecisionKind
from curvecast.engine import (
    Engine,
    Session,
    error_line,
    handle_line,
    parse_request,
    response_line,
)
from curvecast.errors import (
    DuplicateModelError,
    ProtocolError,
    SessionFinishedError,
)

from .oracles import curve_value


def run_noisy_curve(session, a, b, c, sigma, seed, step=0.5, max_reports=40):
    rng = np.random.default_rng(seed)
    for i in range(1, max_reports + 1):
        acc = curve_value(a, b, c, float(i)) + rng.normal(0.0, sigma)
        acc = float(np.clip(acc, 0.0, 100.0))
        decision = session.step(i * step, acc, 1.0)
        if decision.stopped:
            return decision
    return decision


def test_session_stops_early_with_accurate_estimate():
    a, b, c = 36.0, 1.8, 1.5
    session = Session("m")
    decision = run_noisy_curve(session, a, b, c, sigma=0.3, seed=11)
    assert decision.kind is DecisionKind.CONVERGED
    assert decision.stop_epoch < 20.0
    assert abs(decision.estimate - a) <= 1.0
    assert session.finished


def test_session_rejects_reports_after_stop():
    session = Session("m")
    decision = run_noisy_curve(session, 36.0, 1.8, 1.5, sigma=0.3, seed=11)
    assert decision.stopped
    with pytest.raises(SessionFinishedError):
        session.step(20.5, 36.0, 1.0)


def test_unsaturated_run_exhausts_budget():
    # linearly rising accuracy never saturates: the fitted asymptote keeps
    # climbing, the prediction window never settles, and the budget triggers
    session = Session("m")
    decision = None
    for i in range(1, 41):
        decision = session.step(i * 0.5, float(i), 1.0)
        if decision.stopped:
            break
    assert decision is not None
    assert decision.kind is DecisionKind.EXHAUSTED
    assert decision.stop_epoch == 20.0
    assert decision.estimate == 40.0  # best accuracy seen
    assert not decision.converged


def test_engine_routes_models_independently():
    engine = Engine()
    d1 = engine.step("m1", 0.5, 10.0, 2.0)
    d2 = engine.step("m2", 0.5, 20.0, 1.5)
    assert d1.kind is DecisionKind.CONTINUE
    assert d2.kind is DecisionKind.CONTINUE
    assert set(engine.sessions) == {"m1", "m2"}
    # m2 advanced on its own grid: m1's next epoch is still 1.0
    engine.step("m2", 1.0, 21.0, 1.4)
    engine.step("m1", 1.0, 11.0, 1.9)


def test_open_session_rejects_active_duplicate():
    engine = Engine()
    engine.open_session("m")
    with pytest.raises(DuplicateModelError):
        engine.open_session("m")


def test_finished_model_id_can_be_reopened():
    cfg = AnalyzerConfig(e_max=1.0)
    engine = Engine(cfg)
    decision = engine.step("m", 1.0, 30.0, 1.0)
    assert decision.kind is DecisionKind.EXHAUSTED
    # same id starts a fresh run instead of raising
    fresh = engine.step("m", 1.0, 5.0, 2.0)
    assert fresh.kind is DecisionKind.EXHAUSTED  # e_max 1.0 stops immediately
    session = engine.open_session("m")
    assert not session.finished


def test_per_session_config_override():
    engine = Engine(AnalyzerConfig(e_max=20.0))
    short = engine.open_session("short", config=AnalyzerConfig(e_max=10.0))
    long = engine.open_session("long")
    for i in range(1, 41):
        if not short.finished:
            short.step(i * 0.5, float(i), 1.0)
        if not long.finished:
            long.step(i * 0.5, float(i), 1.0)
    assert short.final_decision.stop_epoch == 10.0
    assert long.final_decision.stop_epoch == 20.0


def test_engine_step_auto_opens_session():
    engine = Engine()
    engine.step("fresh", 0.5, 10.0, 2.0)
    assert "fresh" in engine.sessions


def test_parse_request_round_trip():
    line = json.dumps({"model": "m", "epoch": 0.5, "val_acc": 12.5, "val_loss": 2.0})
    assert parse_request(line) == ("m", 0.5, 12.5, 2.0)


def test_parse_request_rejects_malformed_lines():
    with pytest.raises(ProtocolError):
        parse_request("not json")
    with pytest.raises(ProtocolError):
        parse_request('["not", "an", "object"]')
    with pytest.raises(ProtocolError):
        parse_request('{"model": "m", "epoch": 0.5}')
    with pytest.raises(ProtocolError):
        parse_request('{"model": "", "epoch": 0.5, "val_acc": 1, "val_loss": 1}')
    with pytest.raises(ProtocolError):
        parse_request('{"model": "m", "epoch": true, "val_acc": 1, "val_loss": 1}')
    with pytest.raises(ProtocolError):
        parse_request('{"model": "m", "epoch": "0.5", "val_acc": 1, "val_loss": 1}')


def test_response_line_field_names_and_values():
    engine = Engine()
    decision = engine.step("m", 0.5, 10.0, 2.0)
    payload = json.loads(response_line("m", decision))
    assert payload == {
        "model": "m",
        "action": "continue",
        "estimate": None,
        "converged": False,
        "stop_epoch": None,
    }


def test_stop_response_carries_estimate():
    cfg = AnalyzerConfig(e_max=0.5)
    engine = Engine(cfg)
    decision = engine.step("m", 0.5, 42.0, 1.0)
    payload = json.loads(response_line("m", decision))
    assert payload["action"] == "stop"
    assert payload["estimate"] == 42.0
    assert payload["converged"] is False
    assert payload["stop_epoch"] == 0.5


def test_handle_line_happy_path():
    engine = Engine()
    line = json.dumps({"model": "m", "epoch": 0.5, "val_acc": 10.0, "val_loss": 2.0})
    payload = json.loads(handle_line(engine, line))
    assert payload["action"] == "continue"


def test_handle_line_reports_json_errors_with_null_model():
    engine = Engine()
    payload = json.loads(handle_line(engine, "{broken"))
    assert payload["model"] is None
    assert "invalid JSON" in payload["error"]


def test_handle_line_reports_session_errors_with_model():
    engine = Engine()
    handle_line(engine, json.dumps({"model": "m", "epoch": 0.5, "val_acc": 1, "val_loss": 1}))
    bad = json.dumps({"model": "m", "epoch": 9.0, "val_acc": 1, "val_loss": 1})
    payload = json.loads(handle_line(engine, bad))
    assert payload["model"] == "m"
    assert "expected epoch" in payload["error"]


def test_error_line_shape():
    assert json.loads(error_line(None, "boom")) == {"model": None, "error": "boom"}
    assert json.loads(error_line("m", "boom")) == {"model": "m", "error": "boom"}
