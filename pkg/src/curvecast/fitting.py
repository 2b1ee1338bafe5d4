"""Bounded nonlinear least squares for the saturating accuracy curve.

Damped (Levenberg-Marquardt style) steps with analytic Jacobians; bounds are
enforced by projecting every iterate back into the feasible set.  When the
damped step is rejected five times in a row the solver falls back to a
projected, scaled gradient step; if that cannot decrease the cost either, the
fit is reported as degenerate and the best-so-far parameters are returned.

Internally the solver works in (a, kappa, beta) = (a, c*ln b, ln b), where
the model is a - exp(kappa - beta*x).  In the raw (b, c) coordinates the
cost surface has a curved, ill-conditioned valley (b and c only matter
through b**c and ln b) and the c-gradient vanishes identically at b = 1,
which strands the solver on flat data.  The transformed coordinates make
this an ordinary exponential-decay fit; the box maps to a wedge
(c_lo*beta <= kappa <= c_hi*beta) that is just as easy to project onto.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .curve import CurveParams, ParamBox, default_box
from .errors import NonFiniteInputError, TooFewPointsError

_EXP_CAP = 700.0
_DIAG_FLOOR = 1e-12
_LAMBDA_INIT = 1e-3
_LAMBDA_MIN = 1e-12
_LAMBDA_MAX = 1e12
_MAX_BACKTRACKS = 30
# Max move in beta = ln b per accepted step.  Uncapped steps can vault the
# solver over the valley floor into a basin that fits only the first point
# with an enormous decay rate; capping the rate move (and scaling the rest
# of the step with it to keep the direction) prevents that without slowing
# convergence near the optimum, where steps are tiny anyway.
_RATE_STEP_CAP = 0.5
_MULTI_START_SEED = 20210809
_MULTI_START_COUNT = 5


class FitStatus(enum.Enum):
    OK = "ok"
    MAX_ITERATIONS = "max_iterations"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class FitConfig:
    """Solver knobs; the defaults are used everywhere in the engine."""

    c_min: int = 3
    max_iterations: int = 200
    gradient_tolerance: float = 1e-8
    step_tolerance: float = 1e-8
    cost_tolerance: float = 1e-8
    multi_start: bool = False

    def __post_init__(self):
        if self.c_min < 3:
            raise ValueError("c_min must be >= 3 (three parameters need three points)")
        for name in ("gradient_tolerance", "step_tolerance", "cost_tolerance"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class FitResult:
    params: CurveParams
    converged: bool
    iterations: int
    final_cost: float
    status: FitStatus


class _Wedge:
    """The (a, kappa, beta) image of a ParamBox."""

    def __init__(self, box: ParamBox):
        self.a_lo, b_lo, self.c_lo = box.lower
        self.a_hi, b_hi, self.c_hi = box.upper
        self.beta_lo = math.log(max(b_lo, 1.0))
        self.beta_hi = math.log(b_hi)

    def project(self, u: np.ndarray) -> np.ndarray:
        a = min(max(u[0], self.a_lo), self.a_hi)
        beta = min(max(u[2], self.beta_lo), self.beta_hi)
        kappa = min(max(u[1], self.c_lo * beta), self.c_hi * beta)
        return np.array([a, kappa, beta])

    def to_u(self, vec: Sequence[float]) -> np.ndarray:
        a, b, c = vec
        beta = math.log(b)
        return self.project(np.array([a, c * beta, beta]))

    def to_params(self, u: np.ndarray) -> CurveParams:
        a, kappa, beta = u
        b = math.exp(beta)
        if beta > 0.0:
            c = min(max(kappa / beta, self.c_lo), self.c_hi)
        else:
            c = self.c_lo
        return CurveParams(a=float(a), b=float(b), c=float(c))


def _model(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    exponent = np.minimum(u[1] - u[2] * x, _EXP_CAP)
    return u[0] - np.exp(exponent)


def _jacobian(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    exponent = np.minimum(u[1] - u[2] * x, _EXP_CAP)
    g = np.exp(exponent)
    return np.column_stack([np.ones_like(x), -g, x * g])


def _validate_points(
    points: Sequence[tuple[float, float]], c_min: int
) -> tuple[np.ndarray, np.ndarray]:
    if len(points) < c_min:
        raise TooFewPointsError(f"need at least {c_min} points, got {len(points)}")
    x = np.asarray([p[0] for p in points], dtype=float)
    y = np.asarray([p[1] for p in points], dtype=float)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFiniteInputError("fit points must be finite")
    if abs(x[0] - 1.0) > 1e-9:
        raise ValueError(f"rescaled x values must start at 1, got {x[0]}")
    if np.any(np.diff(x) <= 0):
        raise ValueError("x values must be strictly increasing")
    return x, y


def _cost(u: np.ndarray, x: np.ndarray, y: np.ndarray) -> float:
    resid = _model(u, x) - y
    return float(np.dot(resid, resid))


def _solve_from(
    start: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    wedge: _Wedge,
    cfg: FitConfig,
    on_iterate: Optional[Callable[[np.ndarray], None]],
) -> tuple[np.ndarray, float, int, FitStatus]:
    u = wedge.project(start)
    cost = _cost(u, x, y)
    lam = _LAMBDA_INIT
    rejects = 0
    status = FitStatus.MAX_ITERATIONS
    iterations = 0
    if on_iterate is not None:
        on_iterate(wedge.to_params(u).as_array())

    for iterations in range(1, cfg.max_iterations + 1):
        resid = _model(u, x) - y
        jac = _jacobian(u, x)
        grad_half = jac.T @ resid  # half of the cost gradient

        # Projected-gradient optimality: zero once constraints pin a coordinate.
        projected = u - wedge.project(u - 2.0 * grad_half)
        if np.max(np.abs(projected)) <= cfg.gradient_tolerance or cost == 0.0:
            status = FitStatus.OK
            break

        normal = jac.T @ jac
        damping = np.maximum(np.diag(normal), _DIAG_FLOOR)

        accepted = False
        try:
            step = np.linalg.solve(normal + lam * np.diag(damping), -grad_half)
            overshoot = abs(step[2]) / _RATE_STEP_CAP
            if overshoot > 1.0:
                step = step / overshoot
            candidate = wedge.project(u + step)
            new_cost = _cost(candidate, x, y)
            if math.isfinite(new_cost) and new_cost < cost:
                accepted = True
        except np.linalg.LinAlgError:
            candidate = u
            new_cost = cost

        if accepted:
            step_norm = float(np.linalg.norm(candidate - u))
            drop = cost - new_cost
            u, cost = candidate, new_cost
            lam = max(lam * 0.3, _LAMBDA_MIN)
            rejects = 0
            if on_iterate is not None:
                on_iterate(wedge.to_params(u).as_array())
            if step_norm <= cfg.step_tolerance * (float(np.linalg.norm(u)) + cfg.step_tolerance):
                status = FitStatus.OK
                break
            if drop <= cfg.cost_tolerance * max(cost, 1e-300):
                status = FitStatus.OK
                break
            continue

        lam = min(lam * 10.0, _LAMBDA_MAX)
        rejects += 1
        if rejects < 5:
            continue

        # Damped steps keep failing: try a projected, diagonally scaled
        # gradient descent step with backtracking.
        direction = -grad_half / damping
        scale = 1.0
        for _ in range(_MAX_BACKTRACKS):
            candidate = wedge.project(u + scale * direction)
            new_cost = _cost(candidate, x, y)
            if math.isfinite(new_cost) and new_cost < cost:
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            status = FitStatus.DEGENERATE
            break
        u, cost = candidate, new_cost
        lam = _LAMBDA_INIT
        rejects = 0
        if on_iterate is not None:
            on_iterate(wedge.to_params(u).as_array())

    return u, cost, iterations, status


def _jittered_starts(box: ParamBox, wedge: _Wedge) -> Iterable[np.ndarray]:
    rng = np.random.default_rng(_MULTI_START_SEED)
    lower = np.asarray(box.lower, dtype=float)
    for _ in range(_MULTI_START_COUNT):
        jitter = np.array(
            [
                rng.uniform(2.0, 90.0),
                1.0 + rng.uniform(0.0, 3.0),
                rng.uniform(0.0, 30.0),
            ]
        )
        yield wedge.to_u(np.maximum(jitter, lower))
    yield wedge.to_u(box.init)


def fit(
    points: Sequence[tuple[float, float]],
    box: ParamBox | None = None,
    cfg: FitConfig | None = None,
    on_iterate: Optional[Callable[[np.ndarray], None]] = None,
) -> FitResult:
    """Least-squares fit of the curve to rescaled (x, accuracy) points.

    ``on_iterate`` receives every iterate as an (a, b, c) vector (including
    the start) so callers can check box feasibility along the whole path.
    The result is deterministic for identical inputs, always lies inside the
    box, and its cost is never worse than the cost at the box's starting
    point.
    """
    box = box or default_box()
    cfg = cfg or FitConfig()
    x, y = _validate_points(points, cfg.c_min)
    wedge = _Wedge(box)

    starts: list[np.ndarray] = [wedge.to_u(box.init)]
    if cfg.multi_start:
        starts = list(_jittered_starts(box, wedge))

    best: tuple[np.ndarray, float, int, FitStatus] | None = None
    for start in starts:
        outcome = _solve_from(start, x, y, wedge, cfg, on_iterate)
        if best is None or outcome[1] < best[1]:
            best = outcome
    assert best is not None
    u, cost, iterations, status = best

    return FitResult(
        params=wedge.to_params(u),
        converged=status is FitStatus.OK,
        iterations=iterations,
        final_cost=cost,
        status=status,
    )
