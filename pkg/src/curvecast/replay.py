"""Offline engine runs over stored traces, and the outcome files they write.

Replay feeds each trace's rows through a fresh session exactly as a live
run would, recording where the engine stopped and what it estimated.  If a
trace ends before the stopping rules fire (possible only when the trace is
shorter than the epoch budget) the run is treated like a budget exhaustion:
best observed accuracy, not converged.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

from .analyzer import AnalyzerConfig, DatasetProfile
from .baseline import baseline_stop_epoch
from .engine import Session
from .errors import CorpusFormatError
from .fitting import FitConfig
from .metrics import ModelOutcome
from .traces import Trace, TraceCorpus


@dataclass(frozen=True)
class EngineOutcome:
    model: str
    stop_epoch: float
    estimate: float
    converged: bool


def replay_trace(
    trace: Trace,
    config: AnalyzerConfig | None = None,
    profile: DatasetProfile | None = None,
    fit_config: FitConfig | None = None,
) -> EngineOutcome:
    session = Session(trace.model, config=config, profile=profile, fit_config=fit_config)
    for row in trace.rows:
        decision = session.step(row.epoch, row.val_acc, row.val_loss)
        if decision.stopped:
            assert decision.estimate is not None and decision.stop_epoch is not None
            return EngineOutcome(
                model=trace.model,
                stop_epoch=decision.stop_epoch,
                estimate=decision.estimate,
                converged=decision.converged,
            )
    return EngineOutcome(
        model=trace.model,
        stop_epoch=trace.rows[-1].epoch,
        estimate=trace.max_val_acc,
        converged=False,
    )


def replay_corpus(
    corpus: TraceCorpus,
    config: AnalyzerConfig | None = None,
    fit_config: FitConfig | None = None,
) -> list[EngineOutcome]:
    """Replay every trace; results ordered by model id."""
    outcomes = [
        replay_trace(trace, config=config, profile=corpus.profile, fit_config=fit_config)
        for trace in corpus
    ]
    return sorted(outcomes, key=lambda o: o.model)


_OUTCOME_HEADER = ["model", "stop_epoch", "estimate", "converged"]
_BASELINE_HEADER = ["model", "stop_epoch"]


def write_outcomes(path: str | os.PathLike, outcomes: list[EngineOutcome]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_OUTCOME_HEADER)
        for o in outcomes:
            writer.writerow(
                [o.model, repr(o.stop_epoch), repr(o.estimate),
                 "true" if o.converged else "false"]
            )


def read_outcomes(path: str | os.PathLike) -> list[EngineOutcome]:
    outcomes = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _OUTCOME_HEADER:
            raise CorpusFormatError(f"{path}:1: expected header {','.join(_OUTCOME_HEADER)}")
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != 4 or cells[3] not in ("true", "false"):
                raise CorpusFormatError(f"{path}:{lineno}: bad outcome row")
            try:
                outcomes.append(
                    EngineOutcome(
                        model=cells[0],
                        stop_epoch=float(cells[1]),
                        estimate=float(cells[2]),
                        converged=cells[3] == "true",
                    )
                )
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
    return outcomes


def baseline_corpus(
    corpus: TraceCorpus, patience: float = 10.0, e_max: float = 20.0
) -> list[tuple[str, float]]:
    """Baseline stop epoch per trace, ordered by model id."""
    stops = [(t.model, baseline_stop_epoch(t, patience=patience, e_max=e_max)) for t in corpus]
    return sorted(stops)


def write_baseline(path: str | os.PathLike, stops: list[tuple[str, float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_BASELINE_HEADER)
        for model, stop in stops:
            writer.writerow([model, repr(stop)])


def read_baseline(path: str | os.PathLike) -> dict[str, float]:
    stops: dict[str, float] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _BASELINE_HEADER:
            raise CorpusFormatError(f"{path}:1: expected header {','.join(_BASELINE_HEADER)}")
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != 2:
                raise CorpusFormatError(f"{path}:{lineno}: bad baseline row")
            try:
                stops[cells[0]] = float(cells[1])
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
    return stops


def build_outcomes(
    engine_outcomes: list[EngineOutcome],
    baseline_stops: dict[str, float],
    corpus: TraceCorpus,
) -> list[ModelOutcome]:
    """Join engine, baseline, and ground-truth views of the same models."""
    outcomes = []
    for o in sorted(engine_outcomes, key=lambda e: e.model):
        if o.model not in baseline_stops:
            raise CorpusFormatError(f"{o.model}: no baseline stop epoch")
        trace = corpus.get(o.model)
        outcomes.append(
            ModelOutcome(
                model=o.model,
                engine_stop=o.stop_epoch,
                engine_estimate=o.estimate,
                engine_converged=o.converged,
                baseline_stop=baseline_stops[o.model],
                ground_truth_best=trace.max_val_acc,
            )
        )
    return outcomes
