"""Reference early-termination rule based on training-loss staleness.

A run stops at the first epoch where the running-minimum training loss is at
least ``patience`` epochs old, and otherwise trains to the ``e_max`` budget.
A repeat of the current minimum does not refresh it: staleness is measured
from the epoch where the minimum was first reached.
"""

from __future__ import annotations

from .errors import MissingTrainLossError
from .traces import Trace

_EPOCH_TOL = 1e-9


def baseline_stop_epoch(trace: Trace, patience: float = 10.0, e_max: float = 20.0) -> float:
    if patience <= 0:
        raise ValueError("patience must be positive")
    if e_max <= 0:
        raise ValueError("e_max must be positive")
    if not trace.has_train_loss:
        raise MissingTrainLossError(f"{trace.model}: train_loss missing on some rows")

    best_loss = float("inf")
    best_epoch = 0.0
    for row in trace.rows:
        if row.epoch > e_max + _EPOCH_TOL:
            break
        assert row.train_loss is not None
        if row.train_loss < best_loss:
            best_loss = row.train_loss
            best_epoch = row.epoch
        if row.epoch - best_epoch >= patience - _EPOCH_TOL:
            return row.epoch
    return e_max
