"""Independent reference implementations the tests check the package against.

Nothing here imports the package's numerics: the curve is evaluated with
plain ** arithmetic, the fit oracle is an exhaustive grid search refined by
coordinate descent, derivatives come from central finite differences, the
baseline oracle is a quadratic-time scan, and percentiles are computed by
sorting.  Keep it that way; these exist to catch bugs in the package, so
they must not share code with it.
"""

from __future__ import annotations

import math

import numpy as np

A_LO, A_HI = 0.5, 102.5
B_LO, B_HI = 1.0, 5.0
C_LO, C_HI = 0.0, 30.0

A_STEP, B_STEP, C_STEP = 0.5, 0.05, 0.25
REFINE_TO = 1e-4


def curve_value(a: float, b: float, c: float, x: float) -> float:
    if b == 1.0:
        return a - 1.0
    return a - b ** (c - x)


def sse(a: float, b: float, c: float, x: np.ndarray, y: np.ndarray) -> float:
    if b == 1.0:
        resid = (a - 1.0) - y
    else:
        resid = a - np.power(b, c - x) - y
    return float(np.dot(resid, resid))


def grid_refine_fit(points: list[tuple[float, float]]) -> tuple[float, float, float, float]:
    """Exhaustive grid search then coordinate descent; returns (a, b, c, cost).

    The grid is 0.5 steps on a over [0.5, 102.5], 0.05 steps on b over
    [1, 5], 0.25 steps on c over [0, 30]; every grid cost is evaluated
    exactly (the a axis is folded into a closed-form quadratic scan).
    """
    x = np.asarray([p[0] for p in points], dtype=float)
    y = np.asarray([p[1] for p in points], dtype=float)
    a_grid = np.arange(A_LO, A_HI + A_STEP / 2, A_STEP)
    b_grid = np.arange(B_LO, B_HI + B_STEP / 2, B_STEP)
    c_grid = np.arange(C_LO, C_HI + C_STEP / 2, C_STEP)
    n = len(x)

    best_cost = math.inf
    best = (a_grid[0], b_grid[0], c_grid[0])
    for b in b_grid:
        if b == 1.0:
            # b**(c-x) == 1 for every c, so the c axis is flat here
            targets = y[None, :] + 1.0
            c_axis = c_grid[:1]
        else:
            targets = y[None, :] + np.power(b, c_grid[:, None] - x[None, :])
            c_axis = c_grid
        s1 = targets.sum(axis=1)
        s2 = (targets * targets).sum(axis=1)
        # cost(a) = n*a^2 - 2*a*s1 + s2, evaluated for the whole a grid
        costs = n * a_grid[None, :] ** 2 - 2.0 * a_grid[None, :] * s1[:, None] + s2[:, None]
        idx = np.unravel_index(np.argmin(costs), costs.shape)
        if costs[idx] < best_cost:
            best_cost = float(costs[idx])
            best = (float(a_grid[idx[1]]), float(b), float(c_axis[idx[0]]))

    a, b, c = best
    steps = [A_STEP, B_STEP, C_STEP]
    lows = [A_LO, B_LO, C_LO]
    highs = [A_HI, B_HI, C_HI]
    cost = sse(a, b, c, x, y)
    # Axis moves plus (b, c) diagonals: b and c trade off against each other
    # along a curved valley, so axis-only moves stall far from the optimum.
    moves = [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0),
             (0.0, 0.0, 1.0), (0.0, 0.0, -1.0), (0.0, 1.0, 1.0), (0.0, 1.0, -1.0),
             (0.0, -1.0, 1.0), (0.0, -1.0, -1.0)]
    while max(steps) > REFINE_TO:
        improved = False
        for move in moves:
            # March this direction until it stops improving; single steps
            # per pass crawl hopelessly along valleys.
            while True:
                trial = [
                    min(max(p + d * s, lo), hi)
                    for p, d, s, lo, hi in zip((a, b, c), move, steps, lows, highs)
                ]
                trial_cost = sse(trial[0], trial[1], trial[2], x, y)
                if trial_cost < cost:
                    a, b, c = trial
                    cost = trial_cost
                    improved = True
                else:
                    break
        if not improved:
            steps = [s / 2.0 for s in steps]
    return a, b, c, cost


def central_partials(
    a: float, b: float, c: float, x: float, rel_h: float = 1e-6
) -> tuple[float, float, float]:
    """Central finite differences of a - b**(c - x) in (a, b, c).

    The b and c differences are taken on the b**(c - x) term itself (and
    negated), because for strongly saturated curves that term can be many
    orders of magnitude below a and would vanish into a's floating-point
    representation if a - term were differenced directly.  The a step is
    scaled by the term as well, since steps far below the function value
    would likewise be absorbed.
    """
    term = b ** (c - x)
    h_a = rel_h * max(1.0, abs(a), abs(term))
    d_a = ((a + h_a) - term - ((a - h_a) - term)) / ((a + h_a) - (a - h_a))

    h_b = rel_h * max(1.0, abs(b))
    d_b = -((b + h_b) ** (c - x) - (b - h_b) ** (c - x)) / ((b + h_b) - (b - h_b))

    h_c = rel_h * max(1.0, abs(c))
    d_c = -(b ** ((c + h_c) - x) - b ** ((c - h_c) - x)) / ((c + h_c) - (c - h_c))
    return d_a, d_b, d_c


def naive_baseline_stop(
    rows: list[tuple[float, float]], patience: float = 10.0, e_max: float = 20.0
) -> float:
    """Quadratic-time scan: rows are (epoch, train_loss) pairs in order."""
    for i in range(len(rows)):
        epoch_i = rows[i][0]
        if epoch_i > e_max + 1e-9:
            break
        min_loss = min(rows[j][1] for j in range(i + 1))
        first_min_epoch = next(
            rows[j][0] for j in range(i + 1) if rows[j][1] == min_loss
        )
        if epoch_i - first_min_epoch >= patience - 1e-9:
            return epoch_i
    return e_max


def sorted_percentile(values: list[float], q: float) -> float:
    """Linear-interpolation percentile computed from a sorted copy."""
    ordered = sorted(values)
    if len(ordered) == 1:
        return ordered[0]
    pos = q / 100.0 * (len(ordered) - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    frac = pos - lo
    return ordered[lo] * (1.0 - frac) + ordered[hi] * frac
