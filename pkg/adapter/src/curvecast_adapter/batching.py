"""Batch bookkeeping so fractional-epoch validation lands on batch boundaries.

Reporting every E epochs only makes sense if E of an epoch is a whole
number of batches.  With B full batches per epoch that needs B divisible by
the denominator of E (E = 0.5 needs an even B), so we drop trailing samples
until it is.  This stays on the training side: the engine sees epochs, never
batch sizes.
"""

from __future__ import annotations

import math
from decimal import Decimal, InvalidOperation
from fractions import Fraction


def truncate_for_interval(
    num_samples: int, batch_size: int, interval: float
) -> tuple[int, int]:
    """Largest usable sample count, and the batch count between reports.

    Returns ``(samples, batches_per_report)``: train on the first ``samples``
    samples and validate every ``batches_per_report`` batches to report at
    exactly ``interval``, ``2 * interval``, ... epochs.
    """
    if not (isinstance(batch_size, int) and batch_size >= 1):
        raise ValueError(f"batch_size must be a positive integer, got {batch_size!r}")
    if not (isinstance(num_samples, int) and num_samples >= batch_size):
        raise ValueError("num_samples must hold at least one full batch")
    if not (isinstance(interval, (int, float)) and math.isfinite(interval) and interval > 0):
        raise ValueError(f"interval must be a positive number, got {interval!r}")
    # str() gives the shortest decimal spelling of the float, so 0.5 -> 1/2
    # rather than its exact binary expansion.
    try:
        ratio = Fraction(Decimal(str(interval)))
    except InvalidOperation as exc:
        raise ValueError(f"interval {interval!r} is not a decimal number") from exc
    batches = num_samples // batch_size
    usable = (batches // ratio.denominator) * ratio.denominator
    if usable == 0:
        raise ValueError(
            f"interval {interval} needs {ratio.denominator} batches per epoch, "
            f"have only {batches}"
        )
    per_report = usable * ratio
    assert per_report.denominator == 1
    return usable * batch_size, int(per_report)
