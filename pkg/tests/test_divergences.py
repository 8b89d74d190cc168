import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fanobound.divergences import (
    CHI2,
    HELLINGER,
    KL,
    NAMED_SPECS,
    TV,
    DivergenceSpec,
    Kind,
    bernoulli_divergence,
    check_distribution,
    f_divergence,
    pushforward,
)
from fanobound.errors import ValidationError

P = [0.2, 0.5, 0.3]
Q = [0.4, 0.4, 0.2]

# mpmath at 40 digits
FROZEN = {
    "kl": 0.09458187197756513059,
    "tv": 0.2,
    "chi2": 0.175,
    "hellinger": 0.04998943549421048228,
}


def simplex(n):
    return st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n).filter(lambda v: sum(v) > 1e-3).map(
        lambda v: np.asarray(v) / math.fsum(v)
    )


class TestNamedValues:
    @pytest.mark.parametrize("name", sorted(FROZEN))
    def test_frozen_three_point(self, name):
        np.testing.assert_allclose(f_divergence(name, P, Q), FROZEN[name], rtol=0, atol=1e-15)

    def test_kl_two_point(self):
        np.testing.assert_allclose(f_divergence(KL, [0.6, 0.4], [0.4, 0.6]), 0.08109302162163287639, atol=1e-15)

    def test_point_mass_against_uniform(self):
        assert f_divergence(KL, [1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2), abs=1e-15)

    def test_bernoulli_closed_forms(self):
        np.testing.assert_allclose(bernoulli_divergence(KL, 0.75, 0.25), 0.5 * math.log(3), atol=1e-15)
        np.testing.assert_allclose(bernoulli_divergence(CHI2, 0.75, 0.25), 4.0 / 3.0, atol=1e-14)
        np.testing.assert_allclose(bernoulli_divergence(HELLINGER, 0.75, 0.25), 2 - math.sqrt(3), atol=1e-15)
        np.testing.assert_allclose(bernoulli_divergence(TV, 0.75, 0.25), 0.5, atol=1e-15)
        np.testing.assert_allclose(bernoulli_divergence(KL, 0.0, 0.25), math.log(4 / 3), atol=1e-15)


class TestConventions:
    def test_zero_reference_mass(self):
        assert f_divergence(KL, [0.5, 0.5], [1.0, 0.0]) == math.inf
        assert f_divergence(CHI2, [0.5, 0.5], [1.0, 0.0]) == math.inf
        assert f_divergence(TV, [0.5, 0.5], [1.0, 0.0]) == pytest.approx(0.5)
        assert f_divergence(HELLINGER, [0.5, 0.5], [1.0, 0.0]) == pytest.approx(2 - math.sqrt(2))

    def test_both_zero_contributes_nothing(self):
        assert f_divergence(KL, [1.0, 0.0], [1.0, 0.0]) == 0.0

    def test_stacked_rows(self):
        d = f_divergence(KL, np.array([P, Q]), Q)
        np.testing.assert_allclose(d, [FROZEN["kl"], 0.0], atol=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            f_divergence(KL, [0.5, 0.5], [0.2, 0.3, 0.5])

    def test_bernoulli_domain(self):
        with pytest.raises(ValueError):
            bernoulli_divergence(KL, 1.2, 0.5)
        with pytest.raises(ValueError):
            bernoulli_divergence(KL, np.array([0.5, -0.1]), 0.5)

    def test_scalar_and_array_paths_agree(self):
        rng = np.random.default_rng(0)
        a, b = rng.random(200), rng.random(200)
        for spec in NAMED_SPECS:
            vec = bernoulli_divergence(spec, a, b)
            sca = [bernoulli_divergence(spec, float(x), float(y)) for x, y in zip(a, b)]
            np.testing.assert_allclose(vec, sca, rtol=1e-12, atol=1e-15)


class TestSpecs:
    def test_aliases(self):
        assert DivergenceSpec.named("total_variation") == TV
        assert DivergenceSpec.named("KL").kind is Kind.KL
        with pytest.raises(ValueError):
            DivergenceSpec.named("renyi")

    def test_custom_matches_named(self):
        custom = DivergenceSpec.custom(lambda x: (x - 1.0) ** 2, f_zero=1.0, slope_inf=math.inf, name="chi2-custom")
        np.testing.assert_allclose(f_divergence(custom, P, Q), FROZEN["chi2"], atol=1e-14)
        assert f_divergence(custom, [0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_custom_rejects_nonconvex(self):
        with pytest.raises(ValidationError):
            DivergenceSpec.custom(lambda x: -((x - 1.0) ** 2), f_zero=-1.0, slope_inf=-math.inf)

    def test_custom_rejects_f1_nonzero(self):
        with pytest.raises(ValidationError):
            DivergenceSpec.custom(lambda x: (x - 1.0) ** 2 + 0.1, f_zero=1.1, slope_inf=math.inf)

    def test_check_distribution(self):
        with pytest.raises(ValidationError):
            check_distribution([0.5, 0.6])
        with pytest.raises(ValidationError):
            check_distribution([1.5, -0.5])
        with pytest.raises(ValidationError):
            check_distribution([[0.5, 0.5]])


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(p=simplex(4), q=simplex(4), k=st.integers(0, 3))
    def test_nonnegative_and_zero_on_diagonal(self, p, q, k):
        spec = NAMED_SPECS[k]
        assert f_divergence(spec, p, q) >= 0.0
        assert f_divergence(spec, p, p) <= 1e-15

    @settings(max_examples=200, deadline=None)
    @given(p=simplex(5), q=simplex(5), k=st.integers(0, 3), mapping=st.lists(st.integers(0, 2), min_size=5, max_size=5))
    def test_data_processing(self, p, q, k, mapping):
        spec = NAMED_SPECS[k]
        before = f_divergence(spec, p, q)
        after = f_divergence(spec, pushforward(p, mapping, 3), pushforward(q, mapping, 3))
        assert after <= before + 1e-12

    @settings(max_examples=200, deadline=None)
    @given(p=simplex(3), q=simplex(3))
    def test_pinsker(self, p, q):
        assert f_divergence(TV, p, q) <= math.sqrt(f_divergence(KL, p, q) / 2) + 1e-12

    @settings(max_examples=100, deadline=None)
    @given(a=st.floats(0, 1), b=st.floats(0, 1), c=st.floats(0, 1), lam=st.floats(0, 1), k=st.integers(0, 3))
    def test_convex_in_first_argument(self, a, b, c, lam, k):
        spec = NAMED_SPECS[k]
        mid = lam * a + (1 - lam) * b
        lhs = bernoulli_divergence(spec, mid, c)
        rhs = lam * bernoulli_divergence(spec, a, c) + (1 - lam) * bernoulli_divergence(spec, b, c)
        if math.isfinite(rhs):
            assert lhs <= rhs + 1e-9 * (1 + abs(rhs))
