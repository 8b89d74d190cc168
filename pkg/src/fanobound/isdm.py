"""Finite interactive decision-making instances.

An instance fixes the algorithm: row ``m`` of ``obs_laws`` is the law of the
observation (for bandits, the full transcript) when the environment is model
``m``.  Everything here is exact enumeration over the finite outcome set.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .divergences import KL, DivergenceSpec, as_spec, check_distribution, f_divergence
from .errors import TranscriptCapError, ValidationError
from .oracles import FiniteLossDistribution

DEFAULT_TRANSCRIPT_CAP = 10**6


@dataclass(frozen=True, eq=False)
class FiniteISDM:
    """Prior over models, per-model observation laws and the loss matrix ``L(m, x)``."""

    prior: np.ndarray
    obs_laws: np.ndarray
    loss: np.ndarray
    l_max: float
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        prior = check_distribution(self.prior, "prior")
        obs = np.asarray(self.obs_laws, dtype=float)
        loss = np.asarray(self.loss, dtype=float)
        if obs.ndim != 2:
            raise ValidationError("obs_laws must be a matrix (models x outcomes)")
        if obs.shape[0] != prior.size:
            raise ValidationError(f"prior has {prior.size} models but obs_laws has {obs.shape[0]} rows")
        if loss.shape != obs.shape:
            raise ValidationError(f"loss has shape {loss.shape}, expected {obs.shape}")
        for m, row in enumerate(obs):
            check_distribution(row, f"obs_laws[{m}]")
        l_max = float(self.l_max)
        if not (math.isfinite(l_max) and l_max > 0):
            raise ValidationError(f"l_max must be finite and positive, got {self.l_max!r}")
        if not np.all(np.isfinite(loss)) or np.any(loss < 0) or np.any(loss > l_max):
            raise ValidationError(f"loss entries must lie in [0, l_max={l_max}]")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "obs_laws", obs)
        object.__setattr__(self, "loss", loss)
        object.__setattr__(self, "l_max", l_max)

    @property
    def n_models(self) -> int:
        return self.obs_laws.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.obs_laws.shape[1]

    def _check_reference(self, reference) -> np.ndarray:
        q = check_distribution(reference, "reference")
        if q.size != self.n_outcomes:
            raise ValueError(f"reference has {q.size} atoms, instance has {self.n_outcomes} outcomes")
        return q


def mixture_reference(instance: FiniteISDM) -> np.ndarray:
    """Marginal law of the observation, ``sum_m prior[m] * obs_laws[m]``."""
    return instance.prior @ instance.obs_laws


def budget(instance: FiniteISDM, spec: DivergenceSpec | str, reference) -> float:
    """Prior-averaged divergence ``sum_m prior[m] * D_f(obs_laws[m] || reference)``.

    Models with zero prior mass are skipped, so an infinite divergence on a
    null model does not poison the sum.
    """
    q = instance._check_reference(reference)
    live = instance.prior > 0
    per_model = f_divergence(as_spec(spec), instance.obs_laws[live], q)
    if np.any(np.isinf(per_model)):
        return math.inf
    return math.fsum(instance.prior[live] * per_model)


def mutual_information(instance: FiniteISDM) -> float:
    return budget(instance, KL, mixture_reference(instance))


def prior_predictive_loss(instance: FiniteISDM) -> FiniteLossDistribution:
    """Law of ``L(M, X)`` for ``M ~ prior``, ``X ~ obs_laws[M]``."""
    weights = instance.prior[:, None] * instance.obs_laws
    return FiniteLossDistribution.from_atoms(instance.loss, weights)


def reference_loss(instance: FiniteISDM, reference) -> FiniteLossDistribution:
    """Law of ``L(M, X)`` for independent ``M ~ prior`` and ``X ~ reference``."""
    q = instance._check_reference(reference)
    weights = instance.prior[:, None] * q[None, :]
    return FiniteLossDistribution.from_atoms(instance.loss, weights)


def candidate_references(instance: FiniteISDM, extra: Sequence = ()) -> list[tuple[str, np.ndarray]]:
    """Mixture, each model's own law, then any user-supplied references."""
    out = [("mixture", mixture_reference(instance))]
    names = instance.labels.get("models") or [f"model[{m}]" for m in range(instance.n_models)]
    out += [(str(names[m]), instance.obs_laws[m]) for m in range(instance.n_models)]
    out += [(f"extra[{i}]", instance._check_reference(q)) for i, q in enumerate(extra)]
    return out


# ---------------------------------------------------------------------------
# bandits
# ---------------------------------------------------------------------------

History = tuple  # ((arm, reward_index), ...)
Policy = Callable[[History], Sequence[float]]


def uniform_policy(arms: int) -> Policy:
    return lambda history: np.full(arms, 1.0 / arms)


def fixed_arm_policy(arms: int, arm: int) -> Policy:
    row = np.zeros(arms)
    row[arm] = 1.0
    return lambda history: row


def greedy_policy(arms: int, reward_alphabet: Sequence[float]) -> Policy:
    """Pull each arm once, then the arm with the best empirical mean (ties to lowest index)."""
    values = np.asarray(reward_alphabet, dtype=float)

    def policy(history: History):
        counts = np.zeros(arms)
        sums = np.zeros(arms)
        for a, r in history:
            counts[a] += 1
            sums[a] += values[r]
        row = np.zeros(arms)
        untried = np.flatnonzero(counts == 0)
        if untried.size:
            row[untried[0]] = 1.0
        else:
            row[int(np.argmax(sums / counts))] = 1.0
        return row

    return policy


def table_policy(arms: int, rows: dict) -> Policy:
    """Policy from a table keyed by history strings like ``""`` or ``"0:1|1:0"`` (arm:reward_index)."""

    def policy(history: History):
        key = history_key(history)
        if key not in rows:
            raise ValidationError(f"policy table has no row for reachable history {key!r}")
        return rows[key]

    return policy


def history_key(history: History) -> str:
    return "|".join(f"{a}:{r}" for a, r in history)


@dataclass
class BanditInstanceSpec:
    """A small Bayesian K-armed bandit run for ``horizon`` rounds under a fixed policy.

    ``reward_probs[m][k]`` is the law of the reward index of arm ``k`` under
    model ``m`` over the shared ``reward_alphabet``.
    """

    arms: int
    horizon: int
    reward_alphabet: Sequence[float]
    reward_probs: Union[Sequence, np.ndarray]
    policy: Policy
    prior: Optional[Sequence[float]] = None
    loss_kind: str = "cumulative_regret"
    transcript_cap: int = DEFAULT_TRANSCRIPT_CAP
    model_labels: Optional[Sequence[str]] = None


def compile_bandit(spec: BanditInstanceSpec) -> FiniteISDM:
    """Enumerate every transcript and build the equivalent :class:`FiniteISDM`.

    The loss of a transcript under model ``m`` is its pseudo-regret
    ``sum_t (best mean - mean of pulled arm)``, a deterministic function of
    ``(m, transcript)``.
    """
    if spec.loss_kind != "cumulative_regret":
        raise ValidationError(f"unsupported loss_kind {spec.loss_kind!r}")
    K, T = int(spec.arms), int(spec.horizon)
    if K < 1 or T < 1:
        raise ValidationError("arms and horizon must be positive")
    alphabet = np.asarray(spec.reward_alphabet, dtype=float)
    R = alphabet.size
    probs = np.asarray(spec.reward_probs, dtype=float)
    if probs.ndim != 3 or probs.shape[1:] != (K, R):
        raise ValidationError(f"reward_probs must have shape (models, {K}, {R}), got {probs.shape}")
    n_models = probs.shape[0]
    for m in range(n_models):
        for k in range(K):
            check_distribution(probs[m, k], f"reward_probs[{m}][{k}]")
    prior = np.full(n_models, 1.0 / n_models) if spec.prior is None else check_distribution(spec.prior, "prior")
    if prior.size != n_models:
        raise ValidationError("prior length does not match the number of models")

    n_transcripts = (K * R) ** T
    if n_transcripts > spec.transcript_cap:
        raise TranscriptCapError(
            f"{n_transcripts} transcripts exceeds the cap of {spec.transcript_cap}"
        )

    means = probs @ alphabet  # (models, arms)
    gaps = means.max(axis=1, keepdims=True) - means

    steps = list(itertools.product(range(K), range(R)))
    obs = np.zeros((n_models, n_transcripts))
    loss = np.zeros((n_models, n_transcripts))
    labels = []
    # prefix probabilities under every model, extended one round at a time
    prefixes: list[tuple[History, np.ndarray]] = [((), np.ones(n_models))]
    for _ in range(T):
        nxt = []
        for hist, w in prefixes:
            if np.any(w > 0):
                row = np.asarray(spec.policy(hist), dtype=float)
                if row.shape != (K,):
                    raise ValidationError(f"policy row for history {history_key(hist)!r} has wrong length")
                check_distribution(row, f"policy row for history {history_key(hist)!r}")
            else:
                row = np.zeros(K)
            for a, r in steps:
                nxt.append((hist + ((a, r),), w * row[a] * probs[:, a, r]))
        prefixes = nxt
    for j, (hist, w) in enumerate(prefixes):
        obs[:, j] = w
        loss[:, j] = sum(gaps[:, a] for a, _ in hist)
        labels.append(history_key(hist))

    l_max = float(T * gaps.max())
    if l_max <= 0:
        # every arm is optimal in every model: regret is identically zero
        l_max = 1.0
    return FiniteISDM(
        prior=prior,
        obs_laws=obs,
        loss=np.clip(loss, 0.0, l_max),
        l_max=l_max,
        labels={
            "outcomes": labels,
            "models": list(spec.model_labels) if spec.model_labels else [f"model[{m}]" for m in range(n_models)],
        },
    )
