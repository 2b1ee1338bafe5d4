"""Stopping rules applied to a model's prediction history.

A run stops early once its final-accuracy predictions have settled:

1. the latest prediction is a plausible accuracy (at most 100), and
2. the last few predictions agree with their mean within a tolerance, and
3. when the prediction says the model is stuck at guessing level, its
   validation loss must also have stopped improving (otherwise keep
   training: a late learner still moves its loss).

Runs that never settle are cut off at a fixed epoch budget, reporting the
best accuracy observed so far as a non-converged estimate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .history import History

_EPOCH_TOL = 1e-9


@dataclass(frozen=True)
class DatasetProfile:
    """What random guessing looks like on the dataset being trained on."""

    name: str
    num_classes: int
    class_fractions: tuple[float, ...] | None = None
    balanced: bool = True

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.class_fractions is not None:
            if len(self.class_fractions) != self.num_classes:
                raise ValueError("class_fractions length must equal num_classes")
            if any(f <= 0 for f in self.class_fractions):
                raise ValueError("class fractions must be positive")
            if abs(sum(self.class_fractions) - 1.0) > 1e-6:
                raise ValueError("class fractions must sum to 1")

    @property
    def guess_rate(self) -> float:
        """Accuracy fraction achievable by always predicting one class."""
        rate = 1.0 / self.num_classes
        if self.class_fractions is not None:
            rate = max(rate, max(self.class_fractions))
        return rate


def never_learn_threshold(profile: DatasetProfile, margin: float = 0.5) -> float:
    """Accuracy (percent) below which a model counts as never learning.

    The margin keeps noisy guessing-level runs on the never-learn side of
    the threshold.
    """
    if margin < 0:
        raise ValueError("margin must be >= 0")
    return 100.0 * profile.guess_rate + margin


@dataclass(frozen=True)
class AnalyzerConfig:
    """Stopping-rule parameters.

    ``step`` is the epoch interval between reports; None (the default)
    infers it from the first report of each run.  ``loss_check`` None means
    automatic: on for unbalanced dataset profiles, off otherwise.
    """

    window: int = 3
    tolerance: float = 0.5
    e_max: float = 20.0
    loss_patience: float = 5.0
    loss_check: Optional[bool] = None
    margin: float = 0.5
    step: Optional[float] = None

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.e_max <= 0:
            raise ValueError("e_max must be positive")
        if self.loss_patience <= 0:
            raise ValueError("loss_patience must be positive")
        if self.margin < 0:
            raise ValueError("margin must be >= 0")
        if self.step is not None:
            if self.step <= 0:
                raise ValueError("step must be positive")
            for name, value in (("e_max", self.e_max), ("loss_patience", self.loss_patience)):
                ratio = value / self.step
                if abs(ratio - round(ratio)) > _EPOCH_TOL:
                    raise ValueError(f"{name} must be a multiple of step")


class DecisionKind(enum.Enum):
    CONTINUE = "continue"
    CONVERGED = "converged"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class EngineDecision:
    """Outcome of one analyzer pass; estimate is set whenever the run stops."""

    kind: DecisionKind
    estimate: Optional[float] = None
    stop_epoch: Optional[float] = None

    def __post_init__(self):
        stopped = self.kind is not DecisionKind.CONTINUE
        if stopped != (self.estimate is not None) or stopped != (self.stop_epoch is not None):
            raise ValueError("estimate and stop_epoch are set iff the run stops")

    @property
    def stopped(self) -> bool:
        return self.kind is not DecisionKind.CONTINUE

    @property
    def converged(self) -> bool:
        return self.kind is DecisionKind.CONVERGED


_CONTINUE = EngineDecision(DecisionKind.CONTINUE)


def _loss_plateau_age(history: History) -> int:
    """Reports since the running-minimum val_loss was first reached."""
    best = math.inf
    best_idx = 0
    for idx, t in enumerate(history.tuples):
        if t.val_loss < best:
            best = t.val_loss
            best_idx = idx
    return len(history.tuples) - 1 - best_idx


def analyze(
    history: History,
    config: AnalyzerConfig | None = None,
    profile: DatasetProfile | None = None,
) -> EngineDecision:
    """Decide whether the run behind ``history`` should stop.

    The epoch budget is checked before anything else, so at ``e_max`` the
    decision is never continue.  A missing or non-finite prediction in the
    comparison window means continue, not an error.
    """
    config = config or AnalyzerConfig()
    if len(history) == 0:
        return _CONTINUE
    last_epoch = history.last_epoch
    step = history.step
    assert last_epoch is not None and step is not None

    if last_epoch >= config.e_max - _EPOCH_TOL:
        return EngineDecision(
            kind=DecisionKind.EXHAUSTED,
            estimate=history.max_val_acc,
            stop_epoch=last_epoch,
        )

    if last_epoch <= config.window * step + _EPOCH_TOL:
        return _CONTINUE
    if len(history) < config.window:
        return _CONTINUE

    window = history.predictions(config.window)
    if any(p is None or not math.isfinite(p) for p in window):
        return _CONTINUE
    latest = window[-1]
    assert latest is not None

    if latest > 100.0:
        return _CONTINUE

    mean = sum(window) / len(window)  # type: ignore[arg-type]
    if any(abs(p - mean) > config.tolerance for p in window):  # type: ignore[operator]
        return _CONTINUE

    check_loss = config.loss_check
    if check_loss is None:
        check_loss = profile is not None and not profile.balanced
    if check_loss and profile is not None:
        threshold = never_learn_threshold(profile, config.margin)
        if latest <= threshold:
            required = math.ceil(config.loss_patience / step - _EPOCH_TOL)
            if _loss_plateau_age(history) < required:
                return _CONTINUE

    return EngineDecision(
        kind=DecisionKind.CONVERGED,
        estimate=latest,
        stop_epoch=last_epoch,
    )
