"""Information-theoretic bounds on bounded loss functionals of a finite instance.

Every routine returns a :class:`BoundReport` that carries the certified value,
the ingredients it was computed from (budget, reference means, endpoints) and
the exact value of the bounded quantity, computed by brute force, together
with a verdict comparing the two.

Reference distributions: routines taking a single ``reference`` default to the
mixture (marginal) law of the observation.  Routines that optimise over
references (``quantile_fano_bound``, ``one_sided_transform_bound``) search the
mixture, each model's own law and any user-supplied candidates, and record
which candidate won.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .divergences import KL, DivergenceSpec, as_spec
from .inversion import (
    DEFAULT_TOL,
    MAX_ITER,
    ZERO_BUDGET,
    calibration_threshold,
    invert_ball,
    lower_endpoints,
    pinsker_lower,
    threshold_for_quantile,
)
from .isdm import (
    FiniteISDM,
    budget,
    candidate_references,
    mixture_reference,
    mutual_information,
    prior_predictive_loss,
    reference_loss,
)
from .oracles import exact_cvar, exact_hinge, exact_tail
from .transforms import Direction, TransformSpec, expected_transform

CHECK_TOL = 1e-8
DEFAULT_T_REFINE = 16


class Theorem(enum.Enum):
    TWO_SIDED_TRANSFORM = "two_sided_transform"
    ONE_SIDED_TRANSFORM = "one_sided_transform"
    QUANTILE_FANO = "quantile_fano"
    TAIL_TO_EXPECTATION = "tail_to_expectation"
    HINGE_LOWER = "hinge_lower"
    CVAR_LOWER = "cvar_lower"
    CVAR_LOWER_KL_PINSKER = "cvar_lower_kl_pinsker"


class Verdict(enum.Enum):
    EXACT_HOLDS = "exact_holds"
    EXACT_FAILS = "exact_fails"
    NOT_CHECKED = "not_checked"


_SCALAR_FIELDS = ("budget", "bound", "upper", "exact", "gap")


@dataclass
class BoundReport:
    """A computed bound and its provenance.

    ``direction`` is ``"lower"``, ``"upper"`` or ``"interval"``; for intervals
    ``bound`` is the lower end and ``upper`` the upper end.  ``gap`` is the
    amount by which the exact value violates the bound (only set when the
    verdict is ``EXACT_FAILS``).
    """

    theorem: Theorem
    divergence: str
    reference: str
    target: str
    direction: str
    budget: float
    bound: Optional[float]
    upper: Optional[float] = None
    exact: Optional[float] = None
    vacuous: bool = False
    verdict: Verdict = Verdict.NOT_CHECKED
    gap: Optional[float] = None
    quantities: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def check(self, check_tol: float = CHECK_TOL) -> "BoundReport":
        """Set ``verdict``/``gap`` by comparing against ``exact``."""
        if self.exact is None:
            self.verdict, self.gap = Verdict.NOT_CHECKED, None
            return self
        worst = 0.0
        if self.direction in ("lower", "interval") and self.bound is not None:
            worst = max(worst, self.bound - self.exact)
        if self.direction == "upper" and self.bound is not None:
            worst = max(worst, self.exact - self.bound)
        if self.direction == "interval" and self.upper is not None:
            worst = max(worst, self.exact - self.upper)
        if worst > check_tol:
            self.verdict, self.gap = Verdict.EXACT_FAILS, worst
        else:
            self.verdict, self.gap = Verdict.EXACT_HOLDS, None
        self.tolerances["check_tol"] = check_tol
        return self

    @property
    def holds(self) -> bool:
        return self.verdict is Verdict.EXACT_HOLDS

    # -- serialisation -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem.value,
            "divergence": self.divergence,
            "reference": self.reference,
            "target": self.target,
            "direction": self.direction,
            "budget": self.budget,
            "bound": self.bound,
            "upper": self.upper,
            "exact": self.exact,
            "vacuous": self.vacuous,
            "verdict": self.verdict.value,
            "gap": self.gap,
            "quantities": dict(self.quantities),
            "tolerances": dict(self.tolerances),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoundReport":
        d = dict(d)
        d["theorem"] = Theorem(d["theorem"])
        d["verdict"] = Verdict(d["verdict"])
        for k in _SCALAR_FIELDS:
            d[k] = _decode_float(d.get(k))
        d["quantities"] = {k: _decode_value(v) for k, v in d.get("quantities", {}).items()}
        d["tolerances"] = {k: _decode_value(v) for k, v in d.get("tolerances", {}).items()}
        return cls(**d)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(_encode(self.to_dict()), indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "BoundReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """Header line plus one data row; nested quantities are flattened as ``q.<name>``."""
        flat = {k: v for k, v in self.to_dict().items() if k not in ("quantities", "tolerances")}
        flat.update({f"q.{k}": v for k, v in self.quantities.items()})
        flat.update({f"tol.{k}": v for k, v in self.tolerances.items()})
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(flat.keys())
        writer.writerow(_csv_cell(v) for v in flat.values())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "BoundReport":
        header, row = list(csv.reader(io.StringIO(text)))[:2]
        d: dict = {"quantities": {}, "tolerances": {}}
        for k, v in zip(header, row):
            val = _csv_parse(v)
            if k.startswith("q."):
                d["quantities"][k[2:]] = val
            elif k.startswith("tol."):
                d["tolerances"][k[4:]] = val
            else:
                d[k] = val
        for k in ("divergence", "reference", "target", "direction", "theorem", "verdict"):
            d[k] = str(d[k])
        return cls.from_dict(d)

    def to_table(self) -> str:
        rows = [(k, v) for k, v in self.to_dict().items() if k not in ("quantities", "tolerances")]
        rows += [(f"  {k}", v) for k, v in self.quantities.items()]
        rows += [(f"  tol.{k}", v) for k, v in self.tolerances.items()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {_fmt6(v)}" for k, v in rows)


def _encode(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode_float(v):
    if v is None:
        return None
    return float(v)


def _decode_value(v):
    if isinstance(v, str) and v in ("inf", "-inf", "nan"):
        return float(v)
    return v


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_parse(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _fmt6(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return "-" if v is None else str(v)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _effective(b: float) -> float:
    return 0.0 if b <= ZERO_BUDGET else b


def _resolve_reference(instance: FiniteISDM, reference) -> tuple[str, np.ndarray]:
    if reference is None or (isinstance(reference, str) and reference == "mixture"):
        return "mixture", mixture_reference(instance)
    return "explicit", instance._check_reference(reference)


def _candidates(instance: FiniteISDM, references, include_defaults: bool):
    extra = list(references or ())
    if include_defaults:
        return candidate_references(instance, extra)
    if not extra:
        raise ValueError("empty candidate reference list")
    return [(f"extra[{i}]", instance._check_reference(q)) for i, q in enumerate(extra)]


def _step(x: float, by: float) -> float:
    """``x + by`` rounded so the realised step never exceeds ``|by|``."""
    y = x + by
    while abs(y - x) > abs(by):
        y = math.nextafter(y, x)
    return y


def largest_admissible_delta(spec: DivergenceSpec, b: float, rho: float, tol: float) -> float:
    """Largest ``delta`` (stepped inward by at most ``tol``) with ``b < d_{f,delta}(rho)``; 0 if none."""
    b = _effective(b)

    def admissible(delta: float) -> bool:
        return b < threshold_for_quantile(spec, delta, rho)

    if math.isinf(b) or not admissible(0.0):
        return 0.0
    if b == 0.0:
        # admissible iff 1 - delta > rho; the threshold rounds to 0 near the edge, so step in directly
        return max(_step(1.0 - rho, -tol), 0.0)
    inside, outside = 0.0, 1.0
    for _ in range(MAX_ITER):
        if outside - inside <= tol:
            break
        mid = 0.5 * (inside + outside)
        if admissible(mid):
            inside = mid
        else:
            outside = mid
    return inside


def smallest_admissible_theta(spec: DivergenceSpec, b: float, rho: float, tol: float) -> float:
    """Smallest ``theta`` (stepped inward by at most ``tol``) with ``b < d_{f,theta}(rho)``; 1 if none."""
    b = _effective(b)

    def admissible(theta: float) -> bool:
        return b < calibration_threshold(spec, theta, rho)

    if math.isinf(b) or not admissible(1.0):
        return 1.0
    if b == 0.0:
        return min(_step(rho, tol), 1.0)
    outside, inside = 0.0, 1.0
    for _ in range(MAX_ITER):
        if inside - outside <= tol:
            break
        mid = 0.5 * (inside + outside)
        if admissible(mid):
            inside = mid
        else:
            outside = mid
    return inside


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


def two_sided_transform_bound(
    instance: FiniteISDM,
    transform: TransformSpec,
    spec: DivergenceSpec | str = KL,
    reference=None,
    tol: float = DEFAULT_TOL,
    check_tol: float = CHECK_TOL,
) -> BoundReport:
    """Interval ``[a^-(B; rho_Q), a^+(B; rho_Q)]`` containing ``E[phi(L)]``."""
    spec = as_spec(spec)
    ref_name, q = _resolve_reference(instance, reference)
    rho_q = expected_transform(transform, reference_loss(instance, q))
    B = budget(instance, spec, q)
    ball = invert_ball(spec, rho_q, B, tol)
    exact = expected_transform(transform, prior_predictive_loss(instance))
    report = BoundReport(
        theorem=Theorem.TWO_SIDED_TRANSFORM,
        divergence=str(spec),
        reference=ref_name,
        target=f"E[phi(L)] phi={transform.label()}",
        direction="interval",
        budget=B,
        bound=ball.lower,
        upper=ball.upper,
        exact=exact,
        vacuous=ball.lower <= 0.0 and ball.upper >= 1.0,
        quantities={"rho_ref": rho_q, "rho_bar": exact, "a_minus": ball.lower, "a_plus": ball.upper},
        tolerances={"tol": tol},
    )
    return report.check(check_tol)


def quantile_fano_bound(
    instance: FiniteISDM,
    delta_level: float,
    spec: DivergenceSpec | str = KL,
    references: Optional[Sequence] = None,
    tol: float = DEFAULT_TOL,
    check_tol: float = CHECK_TOL,
    include_defaults: bool = True,
) -> BoundReport:
    """Lower bound ``delta*`` on the tail probability ``P(L >= delta_level)``."""
    if not delta_level > 0:
        raise ValueError(f"delta_level must be positive, got {delta_level!r}")
    spec = as_spec(spec)
    indicator = TransformSpec.indicator(delta_level)
    best = None
    for name, q in _candidates(instance, references, include_defaults):
        rho = expected_transform(indicator, reference_loss(instance, q))
        B = budget(instance, spec, q)
        d = largest_admissible_delta(spec, B, rho, tol)
        if best is None or d > best[0]:
            best = (d, name, rho, B)
    delta_star, name, rho, B = best
    law = prior_predictive_loss(instance)
    report = BoundReport(
        theorem=Theorem.QUANTILE_FANO,
        divergence=str(spec),
        reference=f"best_of_candidates:{name}",
        target=f"P(L>={delta_level!r})",
        direction="lower",
        budget=B,
        bound=delta_star,
        exact=exact_tail(law, delta_level),
        vacuous=delta_star <= 0.0,
        quantities={"delta_level": float(delta_level), "delta_star": delta_star, "rho_ref": rho, "exact_mean": law.mean()},
        tolerances={"tol": tol},
    )
    return report.check(check_tol)


def one_sided_transform_bound(
    instance: FiniteISDM,
    transform: TransformSpec,
    spec: DivergenceSpec | str = KL,
    references: Optional[Sequence] = None,
    tol: float = DEFAULT_TOL,
    check_tol: float = CHECK_TOL,
    include_defaults: bool = True,
) -> BoundReport:
    """Upper bound ``theta*`` on ``E[phi(L)]``.

    For nonincreasing transforms ``1 - theta*`` is also recorded as a lower
    bound on ``E[1 - phi(L)]`` (for the indicator, the tail ``P(L >= delta)``).
    A custom transform of unknown direction gets the two-sided interval
    against the first candidate and no one-sided claim.
    """
    spec = as_spec(spec)
    cands = _candidates(instance, references, include_defaults)
    if transform.direction is Direction.UNKNOWN:
        name, q = cands[0]
        two = two_sided_transform_bound(instance, transform, spec, q, tol, check_tol)
        two.theorem = Theorem.ONE_SIDED_TRANSFORM
        two.reference = f"candidate:{name}"
        two.quantities["one_sided_claim"] = False
        return two

    best = None
    for name, q in cands:
        rho = expected_transform(transform, reference_loss(instance, q))
        B = budget(instance, spec, q)
        theta = smallest_admissible_theta(spec, B, rho, tol)
        if best is None or theta < best[0]:
            best = (theta, name, rho, B)
    theta_star, name, rho, B = best
    exact = expected_transform(transform, prior_predictive_loss(instance))
    quantities = {"theta_star": theta_star, "rho_ref": rho, "rho_bar": exact, "one_sided_claim": True}
    if transform.direction is Direction.NONINCREASING:
        quantities["complement_lower"] = 1.0 - theta_star
    report = BoundReport(
        theorem=Theorem.ONE_SIDED_TRANSFORM,
        divergence=str(spec),
        reference=f"best_of_candidates:{name}",
        target=f"E[phi(L)] phi={transform.label()}",
        direction="upper",
        budget=B,
        bound=theta_star,
        exact=exact,
        vacuous=theta_star >= 1.0,
        quantities=quantities,
        tolerances={"tol": tol},
    )
    return report.check(check_tol)


def tail_to_expectation(
    report: BoundReport, delta_level: Optional[float] = None, check_tol: float = CHECK_TOL
) -> BoundReport:
    """Markov step: ``E[L] >= delta_level * delta*``."""
    if report.theorem is not Theorem.QUANTILE_FANO:
        raise ValueError(f"expected a quantile_fano report, got {report.theorem.value}")
    level = report.quantities["delta_level"]
    if delta_level is not None and not math.isclose(delta_level, level, rel_tol=0, abs_tol=1e-15):
        raise ValueError(f"report was computed at delta={level!r}, not {delta_level!r}")
    value = level * report.bound
    out = BoundReport(
        theorem=Theorem.TAIL_TO_EXPECTATION,
        divergence=report.divergence,
        reference=report.reference,
        target="E[L]",
        direction="lower",
        budget=report.budget,
        bound=value,
        exact=report.quantities.get("exact_mean"),
        vacuous=value <= 0.0,
        quantities={"delta_level": level, "delta_star": report.bound},
        tolerances=dict(report.tolerances),
    )
    return out.check(check_tol)


def _hinge_means(law, ts: np.ndarray, l_max: float) -> np.ndarray:
    """``b_t = E[(L - t)_+] / l_max`` for every ``t`` in ``ts``."""
    excess = np.maximum(law.values[None, :] - ts[:, None], 0.0)
    return np.clip(excess @ law.probs / l_max, 0.0, 1.0)


def hinge_lower_bound(
    instance: FiniteISDM,
    t: float,
    spec: DivergenceSpec | str = KL,
    reference=None,
    tol: float = DEFAULT_TOL,
    check_tol: float = CHECK_TOL,
) -> BoundReport:
    """Lower bound ``l_max * a^-(B; b_t)`` on ``E[(L - t)_+]``.

    For ``t < 0`` the identity ``E[(L - t)_+] = E[L] - t`` reduces to ``t = 0``.
    """
    spec = as_spec(spec)
    ref_name, q = _resolve_reference(instance, reference)
    B = budget(instance, spec, q)
    l_max = instance.l_max
    t_eff = max(float(t), 0.0)
    if t_eff >= l_max:
        b_t, a_minus = 0.0, 0.0
    else:
        b_t = expected_transform(TransformSpec.hinge(t_eff, l_max), reference_loss(instance, q))
        a_minus = float(lower_endpoints(spec, b_t, B, tol)[0])
    value = l_max * a_minus + (t_eff - float(t))
    report = BoundReport(
        theorem=Theorem.HINGE_LOWER,
        divergence=str(spec),
        reference=ref_name,
        target=f"E[(L-{float(t)!r})_+]",
        direction="lower",
        budget=B,
        bound=value,
        exact=exact_hinge(prior_predictive_loss(instance), float(t)),
        vacuous=value <= 0.0,
        quantities={"t": float(t), "b_t": b_t, "a_minus": a_minus, "l_max": l_max},
        tolerances={"tol": tol},
    )
    return report.check(check_tol)


def t_grid(law, l_max: float, refine: int = DEFAULT_T_REFINE) -> tuple[np.ndarray, np.ndarray]:
    """Coarse grid (loss atoms plus 0 and l_max) and its uniform refinement."""
    coarse = np.union1d(law.values[(law.values >= 0) & (law.values <= l_max)], [0.0, l_max])
    if refine <= 1 or coarse.size < 2:
        return coarse, coarse
    pieces = [np.linspace(lo, hi, refine + 1)[:-1] for lo, hi in zip(coarse[:-1], coarse[1:])]
    fine = np.concatenate(pieces + [coarse[-1:]])
    return coarse, fine


def _minimise(ts: np.ndarray, floor_means: np.ndarray, scale: float):
    obj = ts + scale * floor_means
    i = int(np.argmin(obj))
    return float(obj[i]), float(ts[i])


def _bracket_floor(ts: np.ndarray, floor_means: np.ndarray, scale: float) -> float:
    # on [t_i, t_{i+1}]: t >= t_i and the floor (nonincreasing in t) >= its value at t_{i+1}
    if ts.size < 2:
        return float(ts[0] + scale * floor_means[0])
    return float(np.min(ts[:-1] + scale * floor_means[1:]))


def _cvar_report(
    theorem: Theorem,
    instance: FiniteISDM,
    alpha: float,
    spec: DivergenceSpec,
    ref_name: str,
    B: float,
    law_ref,
    floor_fn,
    t_refine: int,
    tol: float,
    check_tol: float,
) -> BoundReport:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    l_max = instance.l_max
    scale = l_max / (1.0 - alpha)
    coarse, fine = t_grid(law_ref, l_max, t_refine)
    fine_floor = floor_fn(_hinge_means(law_ref, fine, l_max))
    coarse_floor = floor_fn(_hinge_means(law_ref, coarse, l_max))
    value, t_min = _minimise(fine, fine_floor, scale)
    coarse_value, _ = _minimise(coarse, coarse_floor, scale)
    report = BoundReport(
        theorem=theorem,
        divergence=str(spec),
        reference=ref_name,
        target=f"CVaR_{alpha!r}(L)",
        direction="lower",
        budget=B,
        bound=value,
        exact=exact_cvar(prior_predictive_loss(instance), alpha),
        vacuous=value <= 0.0,
        quantities={
            "alpha": float(alpha),
            "t_min": t_min,
            "coarse_bound": coarse_value,
            "refinement_gain": coarse_value - value,
            "bracket_floor": _bracket_floor(fine, fine_floor, scale),
            "grid_points": int(fine.size),
        },
        tolerances={"tol": tol, "t_refine": int(t_refine)},
    )
    return report.check(check_tol)


def cvar_lower_bound(
    instance: FiniteISDM,
    alpha: float,
    spec: DivergenceSpec | str = KL,
    reference=None,
    t_refine: int = DEFAULT_T_REFINE,
    tol: float = DEFAULT_TOL,
    check_tol: float = CHECK_TOL,
) -> BoundReport:
    """Lower bound on ``CVaR_alpha(L)``: ``min_t t + l_max / (1 - alpha) * a^-(B; b_t)``.

    The minimum is taken over the atoms of the reference loss law plus 0 and
    ``l_max``, refined by ``t_refine`` uniform subdivisions per gap.  The
    ``bracket_floor`` quantity is a lower bound on the minimum over all
    ``t in [0, l_max]`` (it uses only monotonicity in ``t``).
    """
    spec = as_spec(spec)
    ref_name, q = _resolve_reference(instance, reference)
    B = budget(instance, spec, q)
    return _cvar_report(
        Theorem.CVAR_LOWER, instance, alpha, spec, ref_name, B, reference_loss(instance, q),
        lambda b: lower_endpoints(spec, b, B, tol), t_refine, tol, check_tol,
    )


def cvar_lower_bound_kl_pinsker(
    instance: FiniteISDM,
    alpha: float,
    t_refine: int = DEFAULT_T_REFINE,
    tol: float = DEFAULT_TOL,
    check_tol: float = CHECK_TOL,
) -> BoundReport:
    """Mutual-information form: ``a^-`` replaced by ``[b_t - sqrt(I/2)]_+``.

    The exact-inversion bound on the same grid is attached as
    ``exact_inversion_bound`` for comparison.
    """
    info = mutual_information(instance)
    q = mixture_reference(instance)
    report = _cvar_report(
        Theorem.CVAR_LOWER_KL_PINSKER, instance, alpha, KL, "mixture", info, reference_loss(instance, q),
        lambda b: pinsker_lower(b, info), t_refine, tol, check_tol,
    )
    sharper = cvar_lower_bound(instance, alpha, KL, q, t_refine, tol, check_tol)
    report.quantities["mutual_information"] = info
    report.quantities["exact_inversion_bound"] = sharper.bound
    return report
