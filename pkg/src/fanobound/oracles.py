"""Finite loss laws and exact brute-force functionals on them.

These are the reference values every bound is checked against, so they are
written directly from the definitions and share no code with the bound
computations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from .errors import ValidationError

MERGE_TOL = 1e-12
PROB_SUM_TOL = 1e-12


@dataclass(frozen=True)
class FiniteLossDistribution:
    """Canonical atom list: strictly increasing loss values with positive masses."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if v.shape != p.shape or v.ndim != 1 or v.size == 0:
            raise ValidationError("loss law needs matching nonempty value/prob vectors")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValidationError("loss values must be finite and nonnegative")
        if np.any(p < 0):
            raise ValidationError("atom probabilities must be nonnegative")
        if abs(math.fsum(p) - 1.0) > PROB_SUM_TOL:
            raise ValidationError(f"atom probabilities sum to {math.fsum(p)!r}, not 1")
        if np.any(np.diff(v) <= 0):
            raise ValidationError("loss values must be strictly increasing; use from_atoms")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_atoms(cls, values, probs, merge_tol: float = MERGE_TOL) -> "FiniteLossDistribution":
        """Sort atoms, merge values within ``merge_tol`` and drop zero-mass atoms."""
        v = np.asarray(values, dtype=float).ravel()
        p = np.asarray(probs, dtype=float).ravel()
        if v.shape != p.shape:
            raise ValidationError("values and probs differ in length")
        order = np.argsort(v, kind="stable")
        v, p = v[order], p[order]
        out_v: list[float] = []
        out_p: list[list[float]] = []
        for x, w in zip(v, p):
            if out_v and x - out_v[-1] <= merge_tol:
                out_p[-1].append(w)
            else:
                out_v.append(float(x))
                out_p.append([w])
        masses = np.array([math.fsum(ws) for ws in out_p])
        keep = masses > 0
        return cls(np.array(out_v)[keep], masses[keep])

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, float]]) -> "FiniteLossDistribution":
        pairs = list(pairs)
        return cls.from_atoms([v for v, _ in pairs], [w for _, w in pairs])

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def mean(self) -> float:
        return math.fsum(self.values * self.probs)

    def expect(self, fn) -> float:
        return math.fsum(np.asarray(fn(self.values), dtype=float) * self.probs)

    def __len__(self) -> int:
        return self.values.size


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def exact_cvar(dist: FiniteLossDistribution, alpha: float) -> float:
    """Average of the worst ``1 - alpha`` probability mass.

    Atoms are consumed from the largest loss down; the atom straddling the
    boundary contributes only the fraction needed to fill the tail.
    """
    _check_alpha(alpha)
    need = 1.0 - alpha
    remaining = need
    acc = []
    for v, w in zip(dist.values[::-1], dist.probs[::-1]):
        take = min(w, remaining)
        acc.append(take * v)
        remaining -= take
        if remaining <= 0:
            break
    if remaining > 0:
        # rounding shortfall: the last atom taken is the smallest loss
        acc.append(remaining * dist.values[0])
    return math.fsum(acc) / need


def exact_var(dist: FiniteLossDistribution, alpha: float) -> float:
    """Lower alpha-quantile ``inf{l : P(L <= l) >= alpha}``."""
    _check_alpha(alpha)
    cdf = np.cumsum(dist.probs)
    idx = int(np.searchsorted(cdf, alpha - 1e-15, side="left"))
    return float(dist.values[min(idx, len(dist) - 1)])


def exact_tail(dist: FiniteLossDistribution, threshold: float, strict: bool = False) -> float:
    """``P(L > threshold)`` if ``strict`` else ``P(L >= threshold)``."""
    mask = dist.values > threshold if strict else dist.values >= threshold
    return math.fsum(dist.probs[mask])


def exact_hinge(dist: FiniteLossDistribution, t: float) -> float:
    """``E[(L - t)_+]``."""
    return math.fsum(np.maximum(dist.values - t, 0.0) * dist.probs)


def ru_objective(dist: FiniteLossDistribution, alpha: float, t: float) -> float:
    """Rockafellar-Uryasev objective ``t + E[(L - t)_+] / (1 - alpha)``."""
    _check_alpha(alpha)
    return t + exact_hinge(dist, t) / (1.0 - alpha)


def ru_grid_minimum(dist: FiniteLossDistribution, alpha: float) -> float:
    """Minimum of the RU objective over the atoms augmented with 0."""
    grid = np.union1d(dist.values, [0.0])
    return min(ru_objective(dist, alpha, float(t)) for t in grid)
