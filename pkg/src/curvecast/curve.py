"""Saturating exponential model for validation-accuracy learning curves.

The model family is ``f(x) = a - b**(c - x)`` over the rescaled epoch axis
``x``: ``a`` is the horizontal asymptote (the final-accuracy estimate, in
percent), ``b >= 1`` controls how steeply the curve bends toward it, and
``c >= 0`` shifts the bend to the right.  ``b == 1`` collapses the family to
the flat line ``a - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvaluationOverflowError

# Exponent cap for exp(); exp(700) is still finite in float64.
_EXP_CAP = 700.0

# Stand-in for the open-ended upper bounds on b and c.
DEFAULT_INF_CAP = 1e12

A_LOWER = 0.5
A_UPPER = 102.5
B_INIT = 1.001
A_INIT = 10.0
C_INIT = 100.0


@dataclass(frozen=True)
class CurveParams:
    """Fitted curve parameters.

    a: horizontal asymptote, percent accuracy, within [0.5, 102.5]
    b: steepness, >= 1 and finite
    c: horizontal shift in rescaled-epoch units, >= 0 and finite
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name, value in (("a", self.a), ("b", self.b), ("c", self.c)):
            if not math.isfinite(value):
                raise ValueError(f"curve parameter {name} must be finite, got {value!r}")
        if not A_LOWER <= self.a <= A_UPPER:
            raise ValueError(f"asymptote a={self.a} outside [{A_LOWER}, {A_UPPER}]")
        if self.b < 1.0:
            raise ValueError(f"steepness b={self.b} must be >= 1")
        if self.c < 0.0:
            raise ValueError(f"shift c={self.c} must be >= 0")

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c], dtype=float)


@dataclass(frozen=True)
class ParamBox:
    """Box constraints plus the fixed starting point for the fitter."""

    lower: tuple[float, float, float] = (A_LOWER, 1.0, 0.0)
    upper: tuple[float, float, float] = (A_UPPER, DEFAULT_INF_CAP, DEFAULT_INF_CAP)
    init: tuple[float, float, float] = (A_INIT, B_INIT, C_INIT)

    def __post_init__(self):
        for lo, mid, hi in zip(self.lower, self.init, self.upper):
            if not (lo <= mid <= hi):
                raise ValueError(f"box requires lower <= init <= upper, got {lo}, {mid}, {hi}")

    def clip(self, vec: np.ndarray) -> np.ndarray:
        return np.clip(vec, self.lower, self.upper)

    def contains(self, params: CurveParams, slack: float = 0.0) -> bool:
        vec = params.as_array()
        lo = np.asarray(self.lower) - slack
        hi = np.asarray(self.upper) + slack
        return bool(np.all(vec >= lo) and np.all(vec <= hi))


def default_box(inf_cap: float = DEFAULT_INF_CAP) -> ParamBox:
    """The standard parameter box: a in [0.5, 102.5], b >= 1, c >= 0.

    ``inf_cap`` stands in for the open-ended upper bounds on b and c so that
    numerical routines always see finite arithmetic.
    """
    return ParamBox(upper=(A_UPPER, inf_cap, inf_cap))


def evaluate(params: CurveParams, x: float) -> float:
    """Value of the curve at rescaled epoch ``x``.

    Raises EvaluationOverflowError when b**(c-x) exceeds the float range
    (clamping the exponent there would change the value materially; in the
    underflow direction the clamped term is below 1e-300 and is ignored).
    """
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"x must be finite and >= 0, got {x!r}")
    if params.b == 1.0:
        return params.a - 1.0
    exponent = (params.c - x) * math.log(params.b)
    if exponent > _EXP_CAP:
        raise EvaluationOverflowError(
            f"b**(c-x) overflows for b={params.b}, c={params.c}, x={x}"
        )
    return params.a - math.exp(exponent)


def partials(params: CurveParams, x: float) -> tuple[float, float, float]:
    """Analytic gradient (df/da, df/db, df/dc) at rescaled epoch ``x``.

    df/da = 1
    df/db = -(c - x) * b**(c - x - 1)
    df/dc = -ln(b) * b**(c - x)
    """
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"x must be finite and >= 0, got {x!r}")
    a, b, c = params.a, params.b, params.c
    if b == 1.0:
        return (1.0, -(c - x), 0.0)
    log_b = math.log(b)
    exp_b = (c - x - 1.0) * log_b
    exp_c = (c - x) * log_b
    if exp_b > _EXP_CAP or exp_c > _EXP_CAP:
        raise EvaluationOverflowError(
            f"partials overflow for b={b}, c={c}, x={x}"
        )
    db = -(c - x) * math.exp(exp_b)
    dc = -log_b * math.exp(exp_c)
    if not (math.isfinite(db) and math.isfinite(dc)):
        raise EvaluationOverflowError(f"non-finite partial for b={b}, c={c}, x={x}")
    return (1.0, db, dc)


def curve_values(vec: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Vectorized curve evaluation used inside the fitter.

    Never raises: the exponent is clamped at +700, which turns runaway
    parameter proposals into huge-but-finite residuals that the solver
    rejects on its own.
    """
    a, b, c = float(vec[0]), float(vec[1]), float(vec[2])
    if b == 1.0:
        return np.full_like(x, a - 1.0, dtype=float)
    exponent = np.minimum((c - x) * math.log(b), _EXP_CAP)
    return a - np.exp(exponent)


def curve_jacobian(vec: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Vectorized Jacobian of curve_values wrt (a, b, c), shape (len(x), 3)."""
    a, b, c = float(vec[0]), float(vec[1]), float(vec[2])
    n = len(x)
    jac = np.empty((n, 3), dtype=float)
    jac[:, 0] = 1.0
    if b == 1.0:
        jac[:, 1] = -(c - x)
        jac[:, 2] = 0.0
        return jac
    log_b = math.log(b)
    pow_c = np.exp(np.minimum((c - x) * log_b, _EXP_CAP))
    pow_b = np.exp(np.minimum((c - x - 1.0) * log_b, _EXP_CAP))
    jac[:, 1] = -(c - x) * pow_b
    jac[:, 2] = -log_b * pow_c
    return jac
