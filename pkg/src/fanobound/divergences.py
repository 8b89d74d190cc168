"""f-divergences between finite distributions.

All routines operate on the last axis of their array arguments, so a stack of
distributions (or a grid of Bernoulli means) is evaluated in one call.  Atoms
with zero mass follow the usual conventions::

    q > 0          ->  q * f(p / q)
    q = 0, p > 0   ->  p * f'(inf)          (may be +inf)
    q = 0, p = 0   ->  0
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ValidationError

PROB_SUM_TOL = 1e-12


class Kind(enum.Enum):
    KL = "kl"
    TOTAL_VARIATION = "tv"
    CHI_SQUARED = "chi2"
    SQUARED_HELLINGER = "hellinger"
    CUSTOM = "custom"


# generator, f(0), slope at infinity
_NAMED = {
    Kind.KL: (lambda x: x * np.log(x), 0.0, math.inf),
    Kind.TOTAL_VARIATION: (lambda x: 0.5 * np.abs(x - 1.0), 0.5, 0.5),
    Kind.CHI_SQUARED: (lambda x: (x - 1.0) ** 2, 1.0, math.inf),
    Kind.SQUARED_HELLINGER: (lambda x: (np.sqrt(x) - 1.0) ** 2, 1.0, 1.0),
}

_ALIASES = {
    "kl": Kind.KL,
    "tv": Kind.TOTAL_VARIATION,
    "total_variation": Kind.TOTAL_VARIATION,
    "chi2": Kind.CHI_SQUARED,
    "chi_squared": Kind.CHI_SQUARED,
    "hellinger": Kind.SQUARED_HELLINGER,
    "squared_hellinger": Kind.SQUARED_HELLINGER,
}


def _convexity_grid() -> np.ndarray:
    return np.unique(np.concatenate([np.linspace(0.0, 4.0, 81), np.geomspace(1e-4, 1e3, 120)]))


@dataclass(frozen=True)
class DivergenceSpec:
    """Identifies an f-divergence.

    Use the module constants (``KL``, ``TV``, ``CHI2``, ``HELLINGER``) for the
    named families, or :meth:`custom` for a user generator.  A custom generator
    must declare ``f(0)`` and ``lim_{x->inf} f(x)/x`` explicitly; both enter
    the zero-mass conventions and are never estimated numerically.
    """

    kind: Kind
    generator: Optional[Callable] = field(default=None, compare=False)
    f_zero: float = 0.0
    slope_inf: float = math.inf
    name: str = ""

    @classmethod
    def named(cls, name: str | Kind) -> "DivergenceSpec":
        kind = name if isinstance(name, Kind) else _ALIASES.get(str(name).lower())
        if kind is None or kind is Kind.CUSTOM:
            raise ValueError(f"unknown divergence {name!r}; expected one of {sorted(_ALIASES)}")
        gen, f0, slope = _NAMED[kind]
        return cls(kind=kind, generator=gen, f_zero=f0, slope_inf=slope, name=kind.value)

    @classmethod
    def custom(
        cls, generator: Callable, f_zero: float, slope_inf: float, name: str = "custom"
    ) -> "DivergenceSpec":
        spec = cls(
            kind=Kind.CUSTOM,
            generator=generator,
            f_zero=float(f_zero),
            slope_inf=float(slope_inf),
            name=name,
        )
        spec._check_generator()
        return spec

    def _check_generator(self) -> None:
        f1 = float(self.f(np.array([1.0]))[0])
        if f1 != 0.0:
            raise ValidationError(f"generator must satisfy f(1) = 0 exactly, got {f1!r}")
        x = _convexity_grid()
        fx = self.f(x)
        if not np.all(np.isfinite(fx)):
            raise ValidationError("generator must be finite on [0, inf)")
        lo, mid, hi = x[:-2], x[1:-1], x[2:]
        chord = ((hi - mid) * fx[:-2] + (mid - lo) * fx[2:]) / (hi - lo)
        slack = 1e-9 * (1.0 + np.abs(fx[1:-1]))
        if np.any(fx[1:-1] > chord + slack):
            bad = mid[np.argmax(fx[1:-1] - chord)]
            raise ValidationError(f"generator is not convex near x = {bad:.6g}")

    def f(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the generator; ``f(0)`` is taken from the declared value."""
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        zero = x == 0.0
        out[zero] = self.f_zero
        if np.any(~zero):
            out[~zero] = np.asarray(self.generator(x[~zero]), dtype=float)
        return out

    def __str__(self) -> str:
        return self.name or self.kind.value


KL = DivergenceSpec.named(Kind.KL)
TV = DivergenceSpec.named(Kind.TOTAL_VARIATION)
CHI2 = DivergenceSpec.named(Kind.CHI_SQUARED)
HELLINGER = DivergenceSpec.named(Kind.SQUARED_HELLINGER)
NAMED_SPECS = (KL, TV, CHI2, HELLINGER)


def as_spec(spec: DivergenceSpec | str) -> DivergenceSpec:
    return spec if isinstance(spec, DivergenceSpec) else DivergenceSpec.named(spec)


def check_distribution(probs: Sequence[float] | np.ndarray, what: str = "distribution") -> np.ndarray:
    """Return ``probs`` as a float array after checking it lies on the simplex."""
    p = np.asarray(probs, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError(f"{what} must be a nonempty vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise ValidationError(f"{what} has negative or non-finite entries")
    total = math.fsum(p)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValidationError(f"{what} sums to {total!r}, not 1")
    return p


def _terms(spec: DivergenceSpec, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    pos_q = q > 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if spec.kind is Kind.KL:
            t = np.where(p > 0, p * np.log(p / np.where(pos_q, q, 1.0)), 0.0)
        elif spec.kind is Kind.TOTAL_VARIATION:
            t = 0.5 * np.abs(p - q)
        elif spec.kind is Kind.CHI_SQUARED:
            t = (p - q) ** 2 / np.where(pos_q, q, 1.0)
        elif spec.kind is Kind.SQUARED_HELLINGER:
            t = (np.sqrt(p) - np.sqrt(q)) ** 2
        else:
            ratio = np.where(pos_q, p / np.where(pos_q, q, 1.0), 1.0)
            t = q * spec.f(ratio)
    # zero-mass reference atoms: p * slope_inf, with 0 * inf := 0
    missing = ~pos_q & (p > 0)
    if np.any(missing):
        with np.errstate(invalid="ignore"):
            t = np.where(missing, p * spec.slope_inf, t)
    t = np.where(~pos_q & (p <= 0), 0.0, t)
    return t


def f_divergence(spec: DivergenceSpec | str, p, q) -> float | np.ndarray:
    """D_f(p || q) along the last axis.

    Returns a float for 1-d inputs and an array for stacked inputs.  The
    result is ``inf`` when ``p`` puts mass where ``q`` has none and the
    generator's slope at infinity is infinite.
    """
    spec = as_spec(spec)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[-1:] != q.shape[-1:]:
        raise ValueError(f"length mismatch: {p.shape[-1]} vs {q.shape[-1]}")
    d = np.sum(_terms(spec, p, q), axis=-1)
    # exact-zero floor: rounding can leave -1e-17 for p == q
    d = np.maximum(d, 0.0)
    return float(d) if d.ndim == 0 else d


def _scalar_term(spec: DivergenceSpec, p: float, q: float) -> float:
    # scalar twin of _terms, used on the bisection hot path
    if q <= 0.0:
        return 0.0 if p <= 0.0 else p * spec.slope_inf
    k = spec.kind
    if k is Kind.KL:
        return p * math.log(p / q) if p > 0.0 else 0.0
    if k is Kind.TOTAL_VARIATION:
        return 0.5 * abs(p - q)
    if k is Kind.CHI_SQUARED:
        return (p - q) ** 2 / q
    if k is Kind.SQUARED_HELLINGER:
        return (math.sqrt(p) - math.sqrt(q)) ** 2
    return q * float(spec.f(np.array([p / q]))[0])


def _bernoulli_pairs(spec: DivergenceSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unchecked elementwise D_f(Bern(a) || Bern(b)) for validated arrays."""
    d = _terms(spec, a, b) + _terms(spec, 1.0 - a, 1.0 - b)
    return np.maximum(d, 0.0)


def bernoulli_divergence(spec: DivergenceSpec | str, a, b) -> float | np.ndarray:
    """D_f(Bern(a) || Bern(b)); broadcasts over ``a`` and ``b``."""
    spec = as_spec(spec)
    if isinstance(a, (float, int)) and isinstance(b, (float, int)):
        a, b = float(a), float(b)
        if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
            raise ValueError("Bernoulli means must lie in [0, 1]")
        return max(_scalar_term(spec, a, b) + _scalar_term(spec, 1.0 - a, 1.0 - b), 0.0)
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    if np.any(~((a_arr >= 0) & (a_arr <= 1))) or np.any(~((b_arr >= 0) & (b_arr <= 1))):
        raise ValueError("Bernoulli means must lie in [0, 1]")
    a_arr, b_arr = np.broadcast_arrays(a_arr, b_arr)
    d = _bernoulli_pairs(spec, a_arr, b_arr)
    return float(d) if d.ndim == 0 else d


def pushforward(probs, mapping: Sequence[int], size: Optional[int] = None) -> np.ndarray:
    """Law of ``g(X)`` for ``X ~ probs`` and a deterministic map ``g`` given as a table."""
    probs = np.asarray(probs, dtype=float)
    mapping = np.asarray(mapping, dtype=int)
    if mapping.shape != probs.shape[-1:]:
        raise ValueError("mapping must have one entry per atom")
    size = int(mapping.max()) + 1 if size is None else size
    out = np.zeros(probs.shape[:-1] + (size,))
    for src, dst in enumerate(mapping):
        out[..., dst] += probs[..., src]
    return out
