"""Evaluation metrics comparing engine stops against the baseline rule.

Inputs are per-model outcomes: where the engine stopped and what it
estimated, where the baseline rule stopped, and the accuracy the model
actually reached over the full horizon.  From those this module computes
epochs saved, throughput gain, the overlap between the actually-best and
predicted-best top x% sets, and the difference in mean actual accuracy
between those two sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HISTOGRAM_LOW = -100.0
HISTOGRAM_HIGH = 100.0
HISTOGRAM_WIDTH = 10.0


@dataclass(frozen=True)
class ModelOutcome:
    model: str
    engine_stop: float
    engine_estimate: float
    engine_converged: bool
    baseline_stop: float
    ground_truth_best: float

    def __post_init__(self):
        if self.engine_stop <= 0 or self.baseline_stop <= 0:
            raise ValueError(f"{self.model}: stop epochs must be positive")


@dataclass(frozen=True)
class EpochSavings:
    """Per-model percent of epochs saved relative to the baseline, plus mean."""

    per_model: dict[str, float]
    mean: float


def epochs_saved(outcomes: list[ModelOutcome]) -> EpochSavings:
    """Percent saved per model: 100 * (baseline - engine) / baseline.

    Negative values mean the engine stopped later than the baseline; they
    are reported as-is.
    """
    if not outcomes:
        raise ValueError("no outcomes")
    per_model = {
        o.model: 100.0 * (o.baseline_stop - o.engine_stop) / o.baseline_stop
        for o in outcomes
    }
    return EpochSavings(per_model=per_model, mean=sum(per_model.values()) / len(per_model))


def throughput_gain(outcomes: list[ModelOutcome]) -> float:
    """Total baseline epochs divided by total engine epochs."""
    if not outcomes:
        raise ValueError("no outcomes")
    return sum(o.baseline_stop for o in outcomes) / sum(o.engine_stop for o in outcomes)


def top_k(n: int, x: float) -> int:
    """Size of a top-x% selection out of n, rounding half up, at least 1."""
    if not 0 < x <= 100:
        raise ValueError("x must be in (0, 100]")
    return max(1, int(math.floor(x / 100.0 * n + 0.5)))


def _top_set(outcomes: list[ModelOutcome], key, k: int) -> set[str]:
    ranked = sorted(outcomes, key=lambda o: (-key(o), o.model))
    return {o.model for o in ranked[:k]}


def top_overlap(outcomes: list[ModelOutcome], x: float) -> float:
    """Fraction of the actually-best top x% found in the predicted top x%.

    Both sets have exactly k = round(x% of n) members; ties rank by model id
    so the result is deterministic.
    """
    if not outcomes:
        raise ValueError("no outcomes")
    k = top_k(len(outcomes), x)
    truth = _top_set(outcomes, lambda o: o.ground_truth_best, k)
    predicted = _top_set(outcomes, lambda o: o.engine_estimate, k)
    return len(truth & predicted) / k


def mean_accuracy_diff(outcomes: list[ModelOutcome], x: float) -> float:
    """Gap in mean actual accuracy between the true and predicted top sets.

    Both sets are scored on ground-truth accuracy; only membership comes
    from the estimates.
    """
    if not outcomes:
        raise ValueError("no outcomes")
    k = top_k(len(outcomes), x)
    truth = _top_set(outcomes, lambda o: o.ground_truth_best, k)
    predicted = _top_set(outcomes, lambda o: o.engine_estimate, k)
    by_model = {o.model: o.ground_truth_best for o in outcomes}
    truth_mean = sum(by_model[m] for m in truth) / k
    predicted_mean = sum(by_model[m] for m in predicted) / k
    return abs(truth_mean - predicted_mean)


@dataclass(frozen=True)
class DistributionSummary:
    p5: float
    p25: float
    p50: float
    p75: float
    p95: float
    mean: float


def distribution_summary(values: list[float]) -> DistributionSummary:
    """Five-number percentile summary (linear interpolation) plus mean."""
    if not values:
        raise ValueError("no values")
    arr = np.asarray(values, dtype=float)
    p5, p25, p50, p75, p95 = np.percentile(arr, [5, 25, 50, 75, 95])
    return DistributionSummary(
        p5=float(p5),
        p25=float(p25),
        p50=float(p50),
        p75=float(p75),
        p95=float(p95),
        mean=float(arr.mean()),
    )


def savings_histogram(values: list[float]) -> list[tuple[float, float, int]]:
    """Counts in width-10 bins over [-100, 100], ready for bar plots."""
    edges = np.arange(HISTOGRAM_LOW, HISTOGRAM_HIGH + HISTOGRAM_WIDTH, HISTOGRAM_WIDTH)
    counts, _ = np.histogram(np.asarray(values, dtype=float), bins=edges)
    return [
        (float(edges[i]), float(edges[i + 1]), int(counts[i]))
        for i in range(len(counts))
    ]


def format_report(outcomes: list[ModelOutcome], tops: tuple[float, ...] = (10, 20, 30)) -> str:
    """Key=value metrics report covering savings, throughput, and overlaps."""
    savings = epochs_saved(outcomes)
    values = list(savings.per_model.values())
    summary = distribution_summary(values)
    lines = [
        f"models = {len(outcomes)}",
        f"mean_epochs_saved = {savings.mean!r}",
        f"throughput_gain = {throughput_gain(outcomes)!r}",
        f"savings_p5 = {summary.p5!r}",
        f"savings_p25 = {summary.p25!r}",
        f"savings_p50 = {summary.p50!r}",
        f"savings_p75 = {summary.p75!r}",
        f"savings_p95 = {summary.p95!r}",
    ]
    for x in tops:
        label = f"{x:g}"
        lines.append(f"overlap_{label} = {top_overlap(outcomes, x)!r}")
        lines.append(f"mean_accuracy_diff_{label} = {mean_accuracy_diff(outcomes, x)!r}")
    return "\n".join(lines) + "\n"


def format_histogram_csv(values: list[float]) -> str:
    rows = ["bin_low,bin_high,count"]
    for low, high, count in savings_histogram(values):
        rows.append(f"{low!r},{high!r},{count}")
    return "\n".join(rows) + "\n"
