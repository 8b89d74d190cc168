"""JSON loaders for instances and bandit specifications.

Shape and type problems raise :class:`InstanceFormatError` naming the offending
field; well-formed inputs that violate a mathematical constraint (row sums,
loss range) raise :class:`ValidationError` from the constructors.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import InstanceFormatError, ValidationError
from .isdm import (
    DEFAULT_TRANSCRIPT_CAP,
    BanditInstanceSpec,
    FiniteISDM,
    fixed_arm_policy,
    greedy_policy,
    table_policy,
    uniform_policy,
)

POLICY_KINDS = ("uniform", "fixed", "greedy", "table")


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InstanceFormatError("file", f"cannot read {str(path)!r}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError("json", f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _require(obj: dict, name: str):
    if not isinstance(obj, dict):
        raise InstanceFormatError("<root>", "expected a JSON object")
    if name not in obj:
        raise InstanceFormatError(name, "missing required field")
    return obj[name]


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(name, f"expected a number, got {type(value).__name__}")
    return float(value)


def _integer(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError(name, f"expected an integer, got {value!r}")
    return int(value)


def _array(value, name: str, ndim: int) -> np.ndarray:
    """Numeric array of exactly ``ndim`` dimensions, rejecting ragged or non-numeric input."""

    def check(v, depth, path):
        if depth == 0:
            _number(v, path)
            return
        if not isinstance(v, list):
            raise InstanceFormatError(path, f"expected a list nested {ndim} deep")
        for i, item in enumerate(v):
            check(item, depth - 1, f"{path}[{i}]")

    check(value, ndim, name)
    try:
        arr = np.array(value, dtype=float)
    except ValueError:
        raise InstanceFormatError(name, "rows have different lengths") from None
    if arr.ndim != ndim:
        raise InstanceFormatError(name, "rows have different lengths")
    if arr.size == 0:
        raise InstanceFormatError(name, "must not be empty")
    return arr


def instance_from_dict(data: dict) -> FiniteISDM:
    """Build a :class:`FiniteISDM` from the documented JSON object."""
    prior = _array(_require(data, "prior"), "prior", 1)
    obs = _array(_require(data, "obs_laws"), "obs_laws", 2)
    loss = _array(_require(data, "loss"), "loss", 2)
    if "l_max" in data:
        l_max = _number(data["l_max"], "l_max")
    else:
        l_max = float(loss.max()) if loss.max() > 0 else 1.0
    labels = data.get("labels", {})
    if not isinstance(labels, dict):
        raise InstanceFormatError("labels", "expected an object")
    if obs.shape[0] != prior.size:
        raise InstanceFormatError("obs_laws", f"has {obs.shape[0]} rows but prior has {prior.size} entries")
    if loss.shape != obs.shape:
        raise InstanceFormatError("loss", f"has shape {list(loss.shape)}, expected {list(obs.shape)}")
    return FiniteISDM(prior=prior, obs_laws=obs, loss=loss, l_max=l_max, labels=labels)


def instance_references(data: dict, n_outcomes: int) -> list[np.ndarray]:
    """Optional ``references`` field: extra candidate reference laws."""
    if "references" not in data:
        return []
    refs = _array(data["references"], "references", 2)
    if refs.shape[1] != n_outcomes:
        raise InstanceFormatError("references", f"rows must have {n_outcomes} entries")
    return list(refs)


def load_instance(path: str | Path) -> tuple[FiniteISDM, list[np.ndarray]]:
    """Read an instance file; returns the instance and its extra candidate references."""
    data = read_json(path)
    inst = instance_from_dict(data)
    return inst, instance_references(data, inst.n_outcomes)


def instance_to_dict(instance: FiniteISDM) -> dict:
    return {
        "prior": instance.prior.tolist(),
        "obs_laws": instance.obs_laws.tolist(),
        "loss": instance.loss.tolist(),
        "l_max": instance.l_max,
        "labels": instance.labels,
    }


def load_reference(path: str | Path, n_outcomes: int) -> np.ndarray:
    """A reference law file: either a bare list or ``{"reference": [...]}``."""
    data = read_json(path)
    if isinstance(data, dict):
        data = _require(data, "reference")
    ref = _array(data, "reference", 1)
    if ref.size != n_outcomes:
        raise InstanceFormatError("reference", f"has {ref.size} entries, instance has {n_outcomes} outcomes")
    return ref


def _policy(data: dict, arms: int, alphabet) -> Any:
    spec = _require(data, "policy")
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict):
        raise InstanceFormatError("policy", "expected a string or an object with a 'kind'")
    kind = _require(spec, "kind") if "kind" in spec else None
    if kind not in POLICY_KINDS:
        raise InstanceFormatError("policy.kind", f"expected one of {list(POLICY_KINDS)}, got {kind!r}")
    if kind == "uniform":
        return uniform_policy(arms)
    if kind == "greedy":
        return greedy_policy(arms, alphabet)
    if kind == "fixed":
        arm = _integer(spec.get("arm", 0), "policy.arm")
        if not 0 <= arm < arms:
            raise ValidationError(f"policy.arm must lie in [0, {arms}), got {arm}")
        return fixed_arm_policy(arms, arm)
    rows = spec.get("rows")
    if not isinstance(rows, dict):
        raise InstanceFormatError("policy.rows", "table policy needs an object keyed by history strings")
    return table_policy(arms, {str(k): _array(v, f"policy.rows[{k!r}]", 1) for k, v in rows.items()})


def bandit_from_dict(data: dict, transcript_cap: Optional[int] = None) -> BanditInstanceSpec:
    arms = _integer(_require(data, "arms"), "arms")
    horizon = _integer(_require(data, "horizon"), "horizon")
    alphabet = _array(_require(data, "reward_alphabet"), "reward_alphabet", 1)
    probs = _array(_require(data, "reward_probs"), "reward_probs", 3)
    prior = _array(data["prior"], "prior", 1) if "prior" in data else None
    cap = data.get("transcript_cap", DEFAULT_TRANSCRIPT_CAP)
    cap = _integer(cap, "transcript_cap") if transcript_cap is None else int(transcript_cap)
    labels = data.get("model_labels")
    if labels is not None and not (isinstance(labels, list) and all(isinstance(s, str) for s in labels)):
        raise InstanceFormatError("model_labels", "expected a list of strings")
    if not math.isfinite(cap) or cap < 1:
        raise ValidationError("transcript_cap must be a positive integer")
    return BanditInstanceSpec(
        arms=arms,
        horizon=horizon,
        reward_alphabet=alphabet,
        reward_probs=probs,
        policy=_policy(data, arms, alphabet),
        prior=prior,
        loss_kind=str(data.get("loss_kind", "cumulative_regret")),
        transcript_cap=cap,
        model_labels=labels,
    )


def load_bandit(path: str | Path, transcript_cap: Optional[int] = None) -> BanditInstanceSpec:
    return bandit_from_dict(read_json(path), transcript_cap)
