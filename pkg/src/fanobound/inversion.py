"""Inversion of the Bernoulli f-divergence ball.

For a reference mean ``b`` and budget ``B`` the set ``{a : D_f(Bern(a)||Bern(b)) <= B}``
is a closed interval containing ``b`` (the map is convex, continuous and
monotone on either side of ``b``).  Its endpoints are found by bisection on
``[0, b]`` and ``[b, 1]`` separately.

Returned endpoints are always on the *outside* of the final bisection bracket,
so ``lower <= true lower`` and ``upper >= true upper``: every interval handed
back contains the exact one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergences import DivergenceSpec, Kind, _bernoulli_pairs, as_spec, bernoulli_divergence

DEFAULT_TOL = 1e-10
MAX_ITER = 200
ZERO_BUDGET = 1e-12


@dataclass(frozen=True)
class BernoulliBall:
    spec: DivergenceSpec
    b: float
    budget: float
    lower: float
    upper: float
    tolerance: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, a: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= a <= self.upper + slack


def _check_tol(tol: float) -> None:
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")


def _check_mean(x, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any((arr < 0) | (arr > 1)):
        raise ValueError(f"{what} must lie in [0, 1]")
    return arr


def pinsker_lower(b, budget: float):
    """Pinsker envelope ``[b - sqrt(B/2)]_+`` (a valid floor for the KL lower endpoint)."""
    return np.maximum(np.asarray(b, dtype=float) - math.sqrt(budget / 2.0), 0.0)


def pinsker_upper(b, budget: float):
    return np.minimum(np.asarray(b, dtype=float) + math.sqrt(budget / 2.0), 1.0)


def _endpoint(spec: DivergenceSpec, b: np.ndarray, budget: float, tol: float, side: int) -> np.ndarray:
    # side = -1: lower endpoint (bisect on [0, b]); side = +1: upper (on [b, 1])
    if budget <= ZERO_BUDGET:
        return b.copy()
    edge_value = 0.0 if side < 0 else 1.0
    if math.isinf(budget):
        return np.full_like(b, edge_value)

    out = np.empty_like(b)
    at_edge = _bernoulli_pairs(spec, np.full_like(b, edge_value), b) <= budget
    out[at_edge] = edge_value

    # reference at the far boundary with an infinite generator slope: every
    # other mean has infinite divergence, so that side is the single point {b}
    far = 1.0 if side < 0 else 0.0
    pinned = ~at_edge & (b == far) & math.isinf(spec.slope_inf)
    out[pinned] = b[pinned]

    todo = ~(at_edge | pinned)
    if np.any(todo):
        bb = b[todo]
        # invariant: D(outside) > budget >= D(inside)
        outside = np.full_like(bb, edge_value)
        inside = bb.copy()
        for _ in range(MAX_ITER):
            # converged entries are frozen so each result is independent of the batch
            active = np.abs(inside - outside) > tol
            if not np.any(active):
                break
            mid = 0.5 * (outside + inside)
            ok = _bernoulli_pairs(spec, mid, bb) <= budget
            inside = np.where(active & ok, mid, inside)
            outside = np.where(active & ~ok, mid, outside)
        out[todo] = outside

    if spec.kind is Kind.KL:
        # Pinsker is a proven bound on the true endpoint; never report a looser value
        out = np.maximum(out, pinsker_lower(b, budget)) if side < 0 else np.minimum(out, pinsker_upper(b, budget))
    return out


def lower_endpoints(spec: DivergenceSpec | str, b, budget: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorised ``a_f^-(B; b)`` over an array of reference means."""
    _check_tol(tol)
    spec = as_spec(spec)
    b = np.atleast_1d(_check_mean(b, "b")).astype(float)
    return _endpoint(spec, b, float(budget), tol, -1)


def upper_endpoints(spec: DivergenceSpec | str, b, budget: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorised ``a_f^+(B; b)``."""
    _check_tol(tol)
    spec = as_spec(spec)
    b = np.atleast_1d(_check_mean(b, "b")).astype(float)
    return _endpoint(spec, b, float(budget), tol, +1)


def invert_ball(
    spec: DivergenceSpec | str, b: float, budget: float, tolerance: float = DEFAULT_TOL
) -> BernoulliBall:
    """Sublevel interval of ``a -> D_f(Bern(a) || Bern(b))`` at level ``budget``.

    >>> ball = invert_ball("kl", 0.25, 0.5 * math.log(3))
    >>> ball.lower, round(ball.upper, 9)
    (0.0, 0.75)
    """
    _check_tol(tolerance)
    if budget < 0 or math.isnan(budget):
        raise ValueError(f"budget must be nonnegative, got {budget!r}")
    spec = as_spec(spec)
    b = float(_check_mean(b, "b"))
    lo = float(lower_endpoints(spec, b, budget, tolerance)[0])
    hi = float(upper_endpoints(spec, b, budget, tolerance)[0])
    return BernoulliBall(spec=spec, b=b, budget=float(budget), lower=lo, upper=hi, tolerance=tolerance)


def calibration_threshold(spec: DivergenceSpec | str, theta: float, p: float) -> float:
    """``D_f(Bern(theta) || Bern(p))`` if ``theta >= p``, else 0."""
    theta, p = float(theta), float(p)
    if not (0.0 <= theta <= 1.0 and 0.0 <= p <= 1.0):
        raise ValueError("theta and p must lie in [0, 1]")
    if theta < p:
        return 0.0
    return float(bernoulli_divergence(spec, theta, p))


def threshold_for_quantile(spec: DivergenceSpec | str, delta: float, p: float) -> float:
    """Quantile-form threshold: ``D_f(Bern(1-delta) || Bern(p))`` if ``p <= 1 - delta``, else 0."""
    delta = float(_check_mean(delta, "delta"))
    return calibration_threshold(spec, 1.0 - delta, p)
