"""Per-model record of validation scores and final-accuracy predictions.

A training run reports (epoch, val_acc, val_loss) at a fixed epoch interval.
The first reported epoch fixes that interval; epochs are rescaled by it so
the curve always sees x = 1, 2, 3, ...  Once three points are available each
new report triggers a fit and the fitted asymptote becomes the prediction
stored alongside the point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .curve import ParamBox
from .errors import (
    FirstEpochMismatchError,
    NonFiniteInputError,
    OutOfOrderEpochError,
)
from .fitting import FitConfig, FitStatus, fit

_EPOCH_TOL = 1e-9


@dataclass(frozen=True)
class PerformanceTuple:
    """One validation report plus the prediction made right after it."""

    model: str
    epoch: float
    val_acc: float
    val_loss: float
    prediction: Optional[float]


def rescale_epochs(epochs: list[float], step: float) -> list[float]:
    """Map raw epochs onto the 1, 2, 3, ... grid used by the curve."""
    if step <= 0:
        raise ValueError("step must be positive")
    return [e / step for e in epochs]


class History:
    """Ordered validation reports for one model, with rolling predictions."""

    def __init__(
        self,
        model: str,
        step: float | None = None,
        fit_config: FitConfig | None = None,
        box: ParamBox | None = None,
    ):
        if step is not None and step <= 0:
            raise ValueError("step must be positive")
        self.model = model
        self._step = step
        self._fit_config = fit_config or FitConfig()
        self._box = box
        self._tuples: list[PerformanceTuple] = []

    @classmethod
    def from_tuples(
        cls,
        tuples: list[PerformanceTuple],
        step: float | None = None,
        fit_config: FitConfig | None = None,
        box: ParamBox | None = None,
    ) -> "History":
        """Restore a history from stored tuples, predictions included.

        Epoch spacing is validated exactly as if the tuples had been
        recorded one at a time; the stored predictions are kept as-is.
        """
        if not tuples:
            raise ValueError("from_tuples needs at least one tuple")
        history = cls(tuples[0].model, step=step, fit_config=fit_config, box=box)
        for t in tuples:
            history._check_epoch(t.epoch)
            if history._step is None:
                history._step = t.epoch
            history._tuples.append(t)
        return history

    @property
    def step(self) -> Optional[float]:
        """Epoch interval between reports; None until the first report."""
        return self._step

    @property
    def tuples(self) -> tuple[PerformanceTuple, ...]:
        return tuple(self._tuples)

    def __len__(self) -> int:
        return len(self._tuples)

    @property
    def last_epoch(self) -> Optional[float]:
        return self._tuples[-1].epoch if self._tuples else None

    @property
    def latest_prediction(self) -> Optional[float]:
        return self._tuples[-1].prediction if self._tuples else None

    def predictions(self, last_n: int) -> list[Optional[float]]:
        """Predictions of the most recent ``last_n`` reports, oldest first."""
        if last_n < 1:
            raise ValueError("last_n must be >= 1")
        return [t.prediction for t in self._tuples[-last_n:]]

    @property
    def max_val_acc(self) -> float:
        if not self._tuples:
            raise ValueError("history is empty")
        return max(t.val_acc for t in self._tuples)

    def _check_epoch(self, epoch: float) -> None:
        if not self._tuples:
            if self._step is not None and not math.isclose(
                epoch, self._step, rel_tol=_EPOCH_TOL, abs_tol=_EPOCH_TOL
            ):
                raise FirstEpochMismatchError(
                    f"{self.model}: first epoch {epoch} != configured step {self._step}"
                )
            return
        assert self._step is not None
        expected = self._tuples[-1].epoch + self._step
        if not math.isclose(epoch, expected, rel_tol=_EPOCH_TOL, abs_tol=_EPOCH_TOL):
            raise OutOfOrderEpochError(
                f"{self.model}: expected epoch {expected}, got {epoch}"
            )

    def record_and_predict(
        self, epoch: float, val_acc: float, val_loss: float
    ) -> Optional[float]:
        """Append a report and return the new prediction (None if not ready).

        The first epoch defines the reporting interval unless one was given
        at construction.  Later epochs must advance by exactly that interval.
        """
        for name, value in (("epoch", epoch), ("val_acc", val_acc), ("val_loss", val_loss)):
            if not math.isfinite(value):
                raise NonFiniteInputError(f"{self.model}: {name} is not finite")
        if epoch <= 0:
            raise ValueError(f"{self.model}: epoch must be positive, got {epoch}")
        self._check_epoch(epoch)
        if self._step is None:
            self._step = epoch

        prediction: Optional[float] = None
        accs = [t.val_acc for t in self._tuples] + [val_acc]
        if len(accs) >= self._fit_config.c_min:
            points = [(float(i + 1), acc) for i, acc in enumerate(accs)]
            result = fit(points, box=self._box, cfg=self._fit_config)
            if result.status is not FitStatus.DEGENERATE:
                prediction = result.params.a

        self._tuples.append(
            PerformanceTuple(
                model=self.model,
                epoch=epoch,
                val_acc=val_acc,
                val_loss=val_loss,
                prediction=prediction,
            )
        )
        return prediction
