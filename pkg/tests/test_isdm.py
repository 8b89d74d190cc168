import math

import numpy as np
import pytest

from fanobound.divergences import KL, TV
from fanobound.errors import TranscriptCapError, ValidationError
from fanobound.isdm import (
    BanditInstanceSpec,
    FiniteISDM,
    budget,
    candidate_references,
    compile_bandit,
    fixed_arm_policy,
    greedy_policy,
    history_key,
    mixture_reference,
    mutual_information,
    prior_predictive_loss,
    reference_loss,
    table_policy,
    uniform_policy,
)

# Bernoulli(0.7)/Bernoulli(0.4) arms, swapped between the two models
REWARDS = [[[0.3, 0.7], [0.6, 0.4]], [[0.6, 0.4], [0.3, 0.7]]]


def two_model():
    return FiniteISDM(
        prior=[0.5, 0.5],
        obs_laws=[[0.6, 0.3, 0.1], [0.1, 0.3, 0.6]],
        loss=[[0, 1, 10], [10, 1, 0]],
        l_max=10.0,
    )


def bandit(policy=None, probs=REWARDS, horizon=2, **kw):
    return BanditInstanceSpec(
        arms=2,
        horizon=horizon,
        reward_alphabet=[0.0, 1.0],
        reward_probs=probs,
        policy=policy or greedy_policy(2, [0.0, 1.0]),
        **kw,
    )


class TestFiniteISDM:
    def test_mixture_and_information(self):
        inst = two_model()
        np.testing.assert_allclose(mixture_reference(inst), [0.35, 0.3, 0.35], atol=1e-15)
        # mpmath at 40 digits
        np.testing.assert_allclose(mutual_information(inst), 0.19812160359007540351, atol=1e-15)

    def test_budget_explicit_and_infinite(self):
        inst = two_model()
        assert budget(inst, KL, [1.0, 0.0, 0.0]) == math.inf
        np.testing.assert_allclose(budget(inst, TV, [0.35, 0.3, 0.35]), 0.25, atol=1e-15)

    def test_zero_prior_model_ignored(self):
        inst = FiniteISDM(prior=[1.0, 0.0], obs_laws=[[0.5, 0.5], [1.0, 0.0]], loss=[[0, 1], [0, 1]], l_max=1.0)
        assert budget(inst, KL, [0.5, 0.5]) == 0.0
        assert budget(inst, KL, mixture_reference(inst)) == 0.0

    def test_loss_laws(self):
        inst = two_model()
        law = prior_predictive_loss(inst)
        np.testing.assert_array_equal(law.values, [0.0, 1.0, 10.0])
        np.testing.assert_allclose(law.probs, [0.6, 0.3, 0.1], atol=1e-15)
        ref = reference_loss(inst, [1.0, 0.0, 0.0])
        np.testing.assert_array_equal(ref.values, [0.0, 10.0])
        np.testing.assert_allclose(ref.probs, [0.5, 0.5], atol=1e-15)

    def test_candidates(self):
        names = [n for n, _ in candidate_references(two_model(), [[0.2, 0.2, 0.6]])]
        assert names == ["mixture", "model[0]", "model[1]", "extra[0]"]

    @pytest.mark.parametrize(
        "kw",
        [
            {"prior": [0.5, 0.6]},
            {"obs_laws": [[0.6, 0.3, 0.2], [0.1, 0.3, 0.6]]},
            {"loss": [[0, 1, 11], [10, 1, 0]]},
            {"loss": [[0, 1], [10, 1]]},
            {"l_max": 0.0},
        ],
    )
    def test_validation(self, kw):
        base = dict(prior=[0.5, 0.5], obs_laws=[[0.6, 0.3, 0.1], [0.1, 0.3, 0.6]], loss=[[0, 1, 10], [10, 1, 0]], l_max=10.0)
        base.update(kw)
        with pytest.raises(ValidationError):
            FiniteISDM(**base)

    def test_reference_length(self):
        with pytest.raises(ValueError):
            budget(two_model(), KL, [0.5, 0.5])


class TestBandit:
    def test_transcript_count_and_rows(self):
        inst = compile_bandit(bandit())
        assert inst.n_outcomes == 16
        np.testing.assert_allclose(inst.obs_laws.sum(axis=1), 1.0, atol=1e-12)
        assert inst.l_max == pytest.approx(0.6)
        assert inst.labels["outcomes"][0] == "0:0|0:0"

    def test_greedy_regret(self):
        inst = compile_bandit(bandit())
        j = inst.labels["outcomes"].index("0:0|1:1")
        # model 0: arm 1 is 0.3 worse; model 1: arm 0 is 0.3 worse
        np.testing.assert_allclose(inst.loss[:, j], [0.3, 0.3])
        # greedy pulls arm 0 first, so transcripts starting with arm 1 are impossible
        starts_1 = [i for i, s in enumerate(inst.labels["outcomes"]) if s.startswith("1:")]
        assert np.all(inst.obs_laws[:, starts_1] == 0)

    def test_fixed_policy_probabilities(self):
        inst = compile_bandit(bandit(fixed_arm_policy(2, 1)))
        j = inst.labels["outcomes"].index("1:1|1:0")
        np.testing.assert_allclose(inst.obs_laws[:, j], [0.4 * 0.6, 0.7 * 0.3])
        np.testing.assert_allclose(inst.loss[:, j], [0.6, 0.0], atol=1e-15)

    def test_identical_models_carry_no_information(self):
        same = [REWARDS[0], REWARDS[0]]
        inst = compile_bandit(bandit(uniform_policy(2), probs=same, horizon=1))
        assert mutual_information(inst) == 0.0

    def test_table_policy(self):
        rows = {"": [1.0, 0.0], "0:0": [0.0, 1.0], "0:1": [1.0, 0.0]}
        inst = compile_bandit(bandit(table_policy(2, rows)))
        np.testing.assert_allclose(inst.obs_laws.sum(axis=1), 1.0, atol=1e-12)
        with pytest.raises(ValidationError):
            compile_bandit(bandit(table_policy(2, {"": [1.0, 0.0]})))

    def test_history_key(self):
        assert history_key(()) == ""
        assert history_key(((0, 1), (1, 0))) == "0:1|1:0"

    def test_cap(self):
        with pytest.raises(TranscriptCapError):
            compile_bandit(bandit(horizon=12))
        with pytest.raises(TranscriptCapError):
            compile_bandit(bandit(transcript_cap=15))

    def test_bad_shapes(self):
        with pytest.raises(ValidationError):
            compile_bandit(bandit(probs=[[[0.5, 0.5]]]))
        with pytest.raises(ValidationError):
            compile_bandit(bandit(uniform_policy(3)))
