import numpy as np
import pytest

from fanobound import verify
from fanobound.isdm import FiniteISDM, prior_predictive_loss
from fanobound.oracles import exact_cvar
from fanobound.transforms import TransformSpec, expected_transform
from fanobound.verify import (
    FuzzConfig,
    McSettings,
    exact_cvar_pairs,
    exact_transform_mean,
    fuzz_soundness,
    mc_transform_estimate,
    random_instance,
    summary_json,
)


def small():
    return FiniteISDM(prior=[0.4, 0.6], obs_laws=[[0.5, 0.5, 0.0], [0.1, 0.2, 0.7]], loss=[[0, 3, 9], [2, 2, 8]], l_max=9.0)


class TestMonteCarlo:
    def test_zero_transform(self):
        inst = FiniteISDM(prior=[1.0], obs_laws=[[0.3, 0.7]], loss=[[0.0, 0.0]], l_max=1.0)
        assert mc_transform_estimate(inst, TransformSpec.hinge(0.0, 1.0), McSettings(1000)) == (0.0, 0.0)

    def test_constant_one(self):
        one = TransformSpec.custom(lambda x: 1.0)
        assert mc_transform_estimate(small(), one, McSettings(1000)) == (1.0, 0.0)

    def test_reproducible_and_stream_dependent(self):
        phi = TransformSpec.clipped(5.0)
        a = mc_transform_estimate(small(), phi, McSettings(5000, seed=3, stream_id=0))
        b = mc_transform_estimate(small(), phi, McSettings(5000, seed=3, stream_id=0))
        c = mc_transform_estimate(small(), phi, McSettings(5000, seed=3, stream_id=1))
        assert a == b and a != c

    def test_consistent(self):
        phi = TransformSpec.laplace(0.2)
        est, se = mc_transform_estimate(small(), phi, McSettings(100_000))
        assert abs(est - exact_transform_mean(small(), phi)) <= 4 * se

    def test_null_atoms_never_sampled(self):
        inst = FiniteISDM(prior=[0.5, 0.5, 0.0], obs_laws=[[1, 0], [0, 1], [0.5, 0.5]], loss=[[0, 1], [1, 0], [1, 1]], l_max=1.0)
        est, _ = mc_transform_estimate(inst, TransformSpec.indicator(0.5), McSettings(20_000))
        assert est == 1.0

    def test_settings_validation(self):
        with pytest.raises(ValueError):
            McSettings(samples=0)


class TestOracles:
    def test_pairs_oracle_matches_merged_law(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            inst = random_instance(rng)
            law = prior_predictive_loss(inst)
            for alpha in (0.5, 0.9, 0.95):
                np.testing.assert_allclose(exact_cvar_pairs(inst, alpha), exact_cvar(law, alpha), atol=1e-12)
            phi = TransformSpec.clipped(4.0)
            np.testing.assert_allclose(exact_transform_mean(inst, phi), expected_transform(phi, law), atol=1e-12)

    def test_sparse_instances_have_disjoint_rows(self):
        rng = np.random.default_rng(0)
        inst = random_instance(rng, sparse_prob=1.0, n_models=(2, 2), n_outcomes=(4, 4))
        assert np.all(inst.obs_laws[0] * inst.obs_laws[1] == 0)


class TestFuzz:
    def test_empty_run(self):
        s = fuzz_soundness(FuzzConfig(iterations=0))
        assert s["instances"] == 0 and s["checks"] == 0 and s["violations"] == 0 and s["failures"] == []

    def test_deterministic(self):
        cfg = FuzzConfig(iterations=3, seed=11)
        assert summary_json(fuzz_soundness(cfg)) == summary_json(fuzz_soundness(cfg))

    def test_schedule_independent(self):
        a = fuzz_soundness(FuzzConfig(iterations=4, seed=2, workers=1))
        b = fuzz_soundness(FuzzConfig(iterations=4, seed=2, workers=2))
        assert summary_json(a) == summary_json(b)

    def test_detects_injected_bug(self, monkeypatch):
        # a CVaR oracle that reports a negative value: every nonvacuous bound must trip it
        monkeypatch.setattr(verify, "exact_cvar_pairs", lambda inst, alpha: -1.0)
        s = fuzz_soundness(FuzzConfig(iterations=2, seed=1))
        assert s["per_check"]["cvar"]["fail"] > 0
        assert all(f["seed"] == [1, f["index"]] for f in s["failures"])

    def test_bad_config(self):
        with pytest.raises(ValueError):
            FuzzConfig(iterations=-1)
        with pytest.raises(ValueError):
            FuzzConfig(divergences=("renyi",))
