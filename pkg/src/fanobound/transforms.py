"""Bounded transforms of the loss, ``phi: [0, inf) -> [0, 1]``."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .oracles import FiniteLossDistribution


class TransformKind(enum.Enum):
    QUANTILE_INDICATOR = "indicator"
    HINGE = "hinge"
    CLIPPED_MEAN = "clipped"
    LAPLACE = "laplace"
    CUSTOM = "custom"


class Direction(enum.Enum):
    NONDECREASING = "nondecreasing"
    NONINCREASING = "nonincreasing"
    UNKNOWN = "unknown"


_RANGE_TOL = 1e-12


@dataclass(frozen=True)
class TransformSpec:
    """A bounded transform together with its monotonicity direction.

    Build instances with the classmethods; ``params`` holds the family
    parameters by name (``delta``, ``t``/``l_max``, ``tau``, ``lam``).

    The quantile indicator is ``1{loss < delta}``: the boundary ``loss == delta``
    maps to 0.
    """

    kind: TransformKind
    params: dict = field(default_factory=dict)
    fn: Optional[Callable] = field(default=None, compare=False)
    direction: Direction = Direction.UNKNOWN

    @classmethod
    def indicator(cls, delta: float) -> "TransformSpec":
        return cls(TransformKind.QUANTILE_INDICATOR, {"delta": float(delta)}, direction=Direction.NONINCREASING)

    @classmethod
    def hinge(cls, t: float, l_max: float) -> "TransformSpec":
        if not t >= 0:
            raise ValidationError(f"hinge threshold must be >= 0, got {t!r}")
        if not l_max > 0:
            raise ValidationError(f"hinge scale l_max must be > 0, got {l_max!r}")
        return cls(TransformKind.HINGE, {"t": float(t), "l_max": float(l_max)}, direction=Direction.NONDECREASING)

    @classmethod
    def clipped(cls, tau: float) -> "TransformSpec":
        if not tau > 0:
            raise ValidationError(f"clipping level tau must be > 0, got {tau!r}")
        return cls(TransformKind.CLIPPED_MEAN, {"tau": float(tau)}, direction=Direction.NONDECREASING)

    @classmethod
    def laplace(cls, lam: float) -> "TransformSpec":
        if not lam > 0:
            raise ValidationError(f"Laplace rate must be > 0, got {lam!r}")
        return cls(TransformKind.LAPLACE, {"lam": float(lam)}, direction=Direction.NONINCREASING)

    @classmethod
    def custom(
        cls,
        fn: Callable,
        direction: Direction | str = Direction.UNKNOWN,
        l_max: Optional[float] = None,
        name: str = "custom",
    ) -> "TransformSpec":
        """Wrap a side-effect-free ``fn`` mapping losses into [0, 1].

        When ``l_max`` is given the range is checked on a grid over ``[0, l_max]``
        at construction; evaluation always re-checks the values it produces.
        """
        spec = cls(TransformKind.CUSTOM, {"name": name}, fn=fn, direction=Direction(direction))
        if l_max is not None:
            spec.evaluate(np.linspace(0.0, float(l_max), 1001))
        return spec

    def evaluate(self, loss):
        """phi(loss); scalar in, float out, array in, array out."""
        x = np.asarray(loss, dtype=float)
        if np.any(x < 0) or np.any(np.isnan(x)):
            raise ValueError("loss must be nonnegative")
        k, p = self.kind, self.params
        if k is TransformKind.QUANTILE_INDICATOR:
            y = (x < p["delta"]).astype(float)
        elif k is TransformKind.HINGE:
            y = np.maximum(x - p["t"], 0.0) / p["l_max"]
            if np.any(y > 1.0):
                raise ValidationError("hinge evaluated at a loss above its l_max")
        elif k is TransformKind.CLIPPED_MEAN:
            y = np.minimum(x / p["tau"], 1.0)
        elif k is TransformKind.LAPLACE:
            y = np.exp(-p["lam"] * x)
        else:
            y = np.asarray(np.vectorize(self.fn, otypes=[float])(x), dtype=float)
            if np.any(~np.isfinite(y)) or np.any(y < -_RANGE_TOL) or np.any(y > 1 + _RANGE_TOL):
                raise ValidationError("custom transform produced a value outside [0, 1]")
            y = np.clip(y, 0.0, 1.0)
        return float(y) if y.ndim == 0 else y

    __call__ = evaluate

    def label(self) -> str:
        if self.kind is TransformKind.CUSTOM:
            return str(self.params.get("name", "custom"))
        args = ",".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.kind.value}:{args}"


def expected_transform(spec: TransformSpec, loss_dist: FiniteLossDistribution) -> float:
    """``E[phi(L)]`` by direct summation over the atoms, clamped to [0, 1] against rounding."""
    value = math.fsum(np.asarray(spec.evaluate(loss_dist.values)) * loss_dist.probs)
    return min(max(value, 0.0), 1.0)


def parse_transform(text: str, l_max: Optional[float] = None) -> TransformSpec:
    """Parse ``kind:key=value,...`` (e.g. ``hinge:t=2,lmax=10``, ``indicator:delta=1``).

    ``l_max`` fills in a missing hinge scale.
    """
    kind, _, rest = text.strip().partition(":")
    kv = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"transform parameter {item!r} is not key=value")
        try:
            kv[key.strip().lower()] = float(val)
        except ValueError:
            raise ValueError(f"transform parameter {key!r} is not a number: {val!r}") from None
    kind = kind.lower()

    def need(*names):
        for n in names:
            if n in kv:
                return kv[n]
        raise ValueError(f"transform {kind!r} requires parameter {names[0]!r}")

    if kind in ("indicator", "quantile"):
        return TransformSpec.indicator(need("delta", "d"))
    if kind == "hinge":
        lm = kv.get("lmax", kv.get("l_max", l_max))
        if lm is None:
            raise ValueError("transform 'hinge' requires parameter 'lmax'")
        return TransformSpec.hinge(need("t"), lm)
    if kind in ("clipped", "clip"):
        return TransformSpec.clipped(need("tau"))
    if kind == "laplace":
        return TransformSpec.laplace(need("lam", "lambda"))
    raise ValueError(f"unknown transform kind {kind!r}; expected indicator, hinge, clipped or laplace")

