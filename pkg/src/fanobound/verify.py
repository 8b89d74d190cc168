"""Simulation and self-checking harness.

Two tools live here:

* :func:`mc_transform_estimate` simulates the randomized one-bit statistic
  ``Y = 1{U <= phi(L(M, X))}``, whose mean is ``E[phi(L)]``.
* :func:`fuzz_soundness` draws random finite instances, runs every bound and
  compares it with exact values computed here by direct double summation over
  ``(model, outcome)`` pairs, independently of the bound code paths.

Randomness is derived from ``(seed, index)`` pairs, so results do not depend on
how instances are scheduled across workers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import bounds as _bounds
from .divergences import as_spec
from .isdm import FiniteISDM
from .oracles import (  # noqa: F401  (re-exported oracles)
    FiniteLossDistribution,
    exact_cvar,
    exact_hinge,
    exact_tail,
    exact_var,
    ru_grid_minimum,
    ru_objective,
)
from .transforms import TransformSpec

DEFAULT_SEED = 20240917
MC_SEED = 7301


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class McSettings:
    samples: int = 100_000
    seed: int = MC_SEED
    stream_id: int = 0

    def __post_init__(self):
        if int(self.samples) < 1:
            raise ValueError(f"samples must be >= 1, got {self.samples!r}")
        if int(self.seed) < 0 or int(self.stream_id) < 0:
            raise ValueError("seed and stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        """Counter-based stream keyed by ``(seed, stream_id)``."""
        return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(self.seed), int(self.stream_id)])))


def _inverse_cdf(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    # rounding can push u past the last positive atom; never land on a null atom
    last = int(np.flatnonzero(probs > 0)[-1])
    return np.minimum(idx, last)


def mc_transform_estimate(
    instance: FiniteISDM, transform: TransformSpec, settings: McSettings = McSettings()
) -> tuple[float, float]:
    """Frequency of ``Y = 1`` over ``settings.samples`` draws and its binomial standard error."""
    rng = settings.generator()
    n = int(settings.samples)
    m = _inverse_cdf(instance.prior, rng.random(n))
    ux = rng.random(n)
    x = np.empty(n, dtype=int)
    for model in np.unique(m):
        sel = m == model
        x[sel] = _inverse_cdf(instance.obs_laws[model], ux[sel])
    u = 1.0 - rng.random(n)  # Unif(0, 1]
    phi = np.asarray(transform.evaluate(instance.loss[m, x]), dtype=float)
    y = u <= phi
    est = float(np.count_nonzero(y)) / n
    return est, math.sqrt(est * (1.0 - est) / n)


# ---------------------------------------------------------------------------
# random instances
# ---------------------------------------------------------------------------


def random_instance(
    rng: np.random.Generator,
    n_models: tuple[int, int] = (2, 4),
    n_outcomes: tuple[int, int] = (2, 6),
    l_max: float = 10.0,
    sparse_prob: float = 0.1,
    integer_losses: Optional[bool] = None,
) -> FiniteISDM:
    """Dirichlet(1) prior and rows; occasionally sparse rows with disjoint supports.

    Integer-valued losses (the default for half the draws) create ties between
    atoms, which exercises the boundary conventions of quantiles and CVaR.
    """
    k = int(rng.integers(n_models[0], n_models[1] + 1))
    n = int(rng.integers(n_outcomes[0], n_outcomes[1] + 1))
    prior = rng.dirichlet(np.ones(k))
    rows = rng.dirichlet(np.ones(n), size=k)
    if rng.random() < sparse_prob:
        # each model lives on its own block of outcomes (cyclically)
        for i in range(k):
            mask = (np.arange(n) % k) == i
            if not mask.any():
                mask[i % n] = True
            rows[i] = np.where(mask, rows[i], 0.0)
    rows /= rows.sum(axis=1, keepdims=True)
    if integer_losses is None:
        integer_losses = bool(rng.random() < 0.5)
    if integer_losses:
        loss = rng.integers(0, int(l_max) + 1, size=(k, n)).astype(float)
    else:
        loss = rng.random((k, n)) * l_max
    return FiniteISDM(prior=prior, obs_laws=rows, loss=loss, l_max=l_max)


def zero_information_instance(rng: np.random.Generator, n_models: int = 3, n_outcomes: int = 5, l_max: float = 10.0):
    """Every model shares one observation law, so every budget against the mixture is 0."""
    row = rng.dirichlet(np.ones(n_outcomes))
    return FiniteISDM(
        prior=rng.dirichlet(np.ones(n_models)),
        obs_laws=np.tile(row, (n_models, 1)),
        loss=rng.random((n_models, n_outcomes)) * l_max,
        l_max=l_max,
    )


def random_loss_law(rng: np.random.Generator, max_atoms: int = 8, scale: float = 10.0) -> FiniteLossDistribution:
    k = int(rng.integers(1, max_atoms + 1))
    values = rng.integers(0, int(scale) + 1, size=k).astype(float) if rng.random() < 0.5 else rng.random(k) * scale
    return FiniteLossDistribution.from_atoms(values, rng.dirichlet(np.ones(k)))


def random_transform(rng: np.random.Generator, family: str, l_max: float) -> TransformSpec:
    if family == "indicator":
        return TransformSpec.indicator(float(rng.uniform(0.05, 1.0) * l_max))
    if family == "hinge":
        return TransformSpec.hinge(float(rng.uniform(0.0, 0.9) * l_max), l_max)
    if family == "clipped":
        return TransformSpec.clipped(float(rng.uniform(0.1, 1.0) * l_max))
    if family == "laplace":
        return TransformSpec.laplace(float(rng.uniform(0.05, 2.0) / l_max * 4))
    raise ValueError(f"unknown transform family {family!r}")


# ---------------------------------------------------------------------------
# independent exact targets (double sums over models and outcomes)
# ---------------------------------------------------------------------------


def _pairs(instance: FiniteISDM):
    w = instance.prior[:, None] * instance.obs_laws
    return instance.loss.ravel(), w.ravel()


def exact_transform_mean(instance: FiniteISDM, transform: TransformSpec) -> float:
    loss, w = _pairs(instance)
    return math.fsum(w * np.asarray(transform.evaluate(loss)))


def exact_tail_probability(instance: FiniteISDM, level: float) -> float:
    loss, w = _pairs(instance)
    return math.fsum(w[loss >= level])


def exact_excess(instance: FiniteISDM, t: float) -> float:
    loss, w = _pairs(instance)
    return math.fsum(w * np.maximum(loss - t, 0.0))


def exact_mean(instance: FiniteISDM) -> float:
    loss, w = _pairs(instance)
    return math.fsum(w * loss)


def exact_cvar_pairs(instance: FiniteISDM, alpha: float) -> float:
    """Tail average over the unmerged ``(loss, weight)`` pairs, largest loss first."""
    loss, w = _pairs(instance)
    order = np.argsort(-loss, kind="stable")
    need = 1.0 - alpha
    total, acc = 0.0, []
    for v, p in zip(loss[order], w[order]):
        if total >= need:
            break
        take = min(p, need - total)
        acc.append(take * v)
        total += take
    if total < need:
        acc.append((need - total) * loss.min())
    return math.fsum(acc) / need


# ---------------------------------------------------------------------------
# fuzzing driver
# ---------------------------------------------------------------------------

CHECK_NAMES = (
    "two_sided",
    "one_sided",
    "quantile_fano",
    "tail_to_expectation",
    "hinge",
    "cvar",
    "cvar_pinsker",
    "indicator_recovery",
    "pinsker_dominance",
)


@dataclass
class FuzzConfig:
    iterations: int = 500
    seed: int = DEFAULT_SEED
    n_models: tuple[int, int] = (2, 4)
    n_outcomes: tuple[int, int] = (2, 6)
    l_max: float = 10.0
    sparse_prob: float = 0.1
    divergences: Sequence[str] = ("kl", "tv", "chi2", "hellinger")
    transforms: Sequence[str] = ("indicator", "hinge", "clipped", "laplace")
    alphas: Sequence[float] = (0.5, 0.9, 0.95)
    tol: float = 1e-10
    check_tol: float = 1e-8
    t_refine: int = 16
    workers: int = 1

    def __post_init__(self):
        if int(self.iterations) < 0:
            raise ValueError("iterations must be >= 0")
        if int(self.workers) < 1:
            raise ValueError("workers must be >= 1")
        for d in self.divergences:
            as_spec(d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("workers")  # scheduling does not change results
        return {k: list(v) if isinstance(v, (tuple, list)) else v for k, v in d.items()}


@dataclass
class _Tally:
    passed: dict = field(default_factory=lambda: {k: 0 for k in CHECK_NAMES})
    failed: dict = field(default_factory=lambda: {k: 0 for k in CHECK_NAMES})
    failures: list = field(default_factory=list)

    def record(self, index: int, check: str, ok: bool, **detail):
        if ok:
            self.passed[check] += 1
        else:
            self.failed[check] += 1
            self.failures.append({"index": index, "check": check, **detail})


def _lower_ok(bound: float, exact: float, tol: float) -> bool:
    return bound <= exact + tol


def _upper_ok(bound: float, exact: float, tol: float) -> bool:
    return bound >= exact - tol


def run_instance(config: FuzzConfig, index: int) -> _Tally:
    """All checks for the instance at ``index``; reproducible from ``(config.seed, index)``."""
    rng = np.random.default_rng([int(config.seed), int(index)])
    inst = random_instance(rng, config.n_models, config.n_outcomes, config.l_max, config.sparse_prob)
    tally = _Tally()
    tol, ctol, L = config.tol, config.check_tol, config.l_max

    # a second explicit reference: a random model's row or a fresh Dirichlet draw
    if rng.random() < 0.5:
        explicit = inst.obs_laws[int(rng.integers(inst.n_models))]
    else:
        explicit = rng.dirichlet(np.ones(inst.n_outcomes))
    refs = [("mixture", None), ("explicit", explicit)]
    transforms = [random_transform(rng, fam, L) for fam in config.transforms]
    level = float(rng.uniform(0.05, 1.0) * L)
    t_hinge = float(rng.choice(inst.loss.ravel())) if rng.random() < 0.5 else float(rng.uniform(-0.1, 1.1) * L)

    for dname in config.divergences:
        spec = as_spec(dname)

        def note(check, ok, bound, exact, **extra):
            tally.record(index, check, ok, divergence=dname, bound=bound, exact=exact, **extra)

        for tf in transforms:
            truth = exact_transform_mean(inst, tf)
            for rname, ref in refs:
                r = _bounds.two_sided_transform_bound(inst, tf, spec, ref, tol)
                ok = _lower_ok(r.bound, truth, ctol) and _upper_ok(r.upper, truth, ctol)
                note("two_sided", ok, [r.bound, r.upper], truth, transform=tf.label(), reference=rname)
            r = _bounds.one_sided_transform_bound(inst, tf, spec, [explicit], tol)
            note("one_sided", _upper_ok(r.bound, truth, ctol), r.bound, truth, transform=tf.label())

        tail = exact_tail_probability(inst, level)
        qr = _bounds.quantile_fano_bound(inst, level, spec, [explicit], tol)
        note("quantile_fano", _lower_ok(qr.bound, tail, ctol), qr.bound, tail, level=level)

        er = _bounds.tail_to_expectation(qr)
        mean = exact_mean(inst)
        note("tail_to_expectation", _lower_ok(er.bound, mean, ctol), er.bound, mean, level=level)

        ind = _bounds.one_sided_transform_bound(inst, TransformSpec.indicator(level), spec, [explicit], tol)
        diff = abs(ind.bound - (1.0 - qr.bound))
        note("indicator_recovery", diff <= 2 * tol, ind.bound, 1.0 - qr.bound, level=level, diff=diff)

        excess = exact_excess(inst, t_hinge)
        for rname, ref in refs:
            hr = _bounds.hinge_lower_bound(inst, t_hinge, spec, ref, tol)
            note("hinge", _lower_ok(hr.bound, excess, ctol), hr.bound, excess, t=t_hinge, reference=rname)

        for alpha in config.alphas:
            cv = exact_cvar_pairs(inst, alpha)
            for rname, ref in refs:
                cr = _bounds.cvar_lower_bound(inst, alpha, spec, ref, config.t_refine, tol)
                note("cvar", _lower_ok(cr.bound, cv, ctol), cr.bound, cv, alpha=alpha, reference=rname)
            if spec.kind.value == "kl":
                pr = _bounds.cvar_lower_bound_kl_pinsker(inst, alpha, config.t_refine, tol)
                note("cvar_pinsker", _lower_ok(pr.bound, cv, ctol), pr.bound, cv, alpha=alpha)
                sharper = pr.quantities["exact_inversion_bound"]
                note("pinsker_dominance", pr.bound <= sharper, pr.bound, sharper, alpha=alpha)
    return tally


def _run_chunk(args) -> _Tally:
    config, indices = args
    out = _Tally()
    for i in indices:
        t = run_instance(config, i)
        for k in CHECK_NAMES:
            out.passed[k] += t.passed[k]
            out.failed[k] += t.failed[k]
        out.failures.extend(t.failures)
    return out


def fuzz_soundness(config: FuzzConfig = FuzzConfig(), progress: Optional[Callable[[int], None]] = None) -> dict:
    """Run the soundness suite; returns a JSON-serialisable summary.

    The summary depends only on the configuration (never on ``workers`` or
    timing), so identical configs give byte-identical ``summary_json`` output.
    """
    n = int(config.iterations)
    indices = list(range(n))
    if config.workers > 1 and n > 1:
        chunks = [indices[w :: config.workers] for w in range(config.workers)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_chunk, [(config, c) for c in chunks]))
    else:
        parts = []
        for i in indices:
            parts.append(_run_chunk((config, [i])))
            if progress is not None:
                progress(i + 1)
    passed = {k: sum(p.passed[k] for p in parts) for k in CHECK_NAMES}
    failed = {k: sum(p.failed[k] for p in parts) for k in CHECK_NAMES}
    failures = sorted((f for p in parts for f in p.failures), key=lambda f: (f["index"], f["check"]))
    for f in failures:
        f["seed"] = [int(config.seed), int(f["index"])]
    return {
        "config": config.to_dict(),
        "instances": n,
        "checks": sum(passed.values()) + sum(failed.values()),
        "violations": sum(failed.values()),
        "per_check": {k: {"pass": passed[k], "fail": failed[k]} for k in CHECK_NAMES},
        "failures": failures,
    }


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


__all__ = [
    "McSettings",
    "mc_transform_estimate",
    "FuzzConfig",
    "fuzz_soundness",
    "run_instance",
    "summary_json",
    "random_instance",
    "zero_information_instance",
    "random_loss_law",
    "random_transform",
    "exact_transform_mean",
    "exact_tail_probability",
    "exact_excess",
    "exact_mean",
    "exact_cvar_pairs",
    "FiniteLossDistribution",
    "exact_cvar",
    "exact_var",
    "exact_tail",
    "exact_hinge",
    "ru_objective",
    "ru_grid_minimum",
]
