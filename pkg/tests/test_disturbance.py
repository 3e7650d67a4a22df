"""Disturbance streams: bounds, determinism, moments, compensation pairing."""

import numpy as np
import pytest

from epibarrier import (CompensationKind, DisturbanceKind, DisturbanceModel,
                        compensation_sufficient, make_rng, matching_compensation,
                        sample, sigma)

NONE = DisturbanceModel(DisturbanceKind.NONE)
GAUSS = DisturbanceModel(DisturbanceKind.UNBOUNDED_GAUSSIAN, variance=1.0, seed=12)
IND = DisturbanceModel(DisturbanceKind.INDEPENDENT_BOUNDED, variance=1.0, bound=0.15, seed=12)
LP = DisturbanceModel(DisturbanceKind.LOW_PREVALENCE_BOUNDED, variance=1.0, bound=0.15,
                      delta=0.01, seed=12)


class TestSample:
    def test_none_is_always_zero(self):
        rng = make_rng(NONE)
        assert sample(NONE, 0.3, rng) == 0.0
        np.testing.assert_array_equal(sample(NONE, np.array([0.1, 0.2]), rng), [0.0, 0.0])

    def test_independent_respects_bound(self):
        rng = make_rng(IND)
        draws = sample(IND, np.zeros(100_000), rng)
        assert np.all(np.abs(draws) <= 0.15)

    def test_lowprev_bound_scales_with_level(self):
        rng = make_rng(LP)
        at_zero = sample(LP, np.zeros(100_000), rng)
        assert np.all(np.abs(at_zero) <= 1.5 + 1e-12)
        assert np.max(np.abs(at_zero)) > 1.0
        rng = make_rng(LP)
        at_high = sample(LP, np.full(100_000, 0.99), rng)
        assert np.all(np.abs(at_high) <= 0.15 + 1e-12)

    def test_bounded_kinds_are_nonnegative(self):
        # bounded kinds model under-reporting pressure: clip(eps, 0, bound)
        for model in (IND, LP):
            rng = make_rng(model)
            draws = sample(model, np.full(10_000, 0.2), rng)
            assert np.all(draws >= 0.0)
            assert np.any(draws == 0.0) and np.any(draws > 0.0)

    def test_scalar_matches_array_stream(self):
        rng_a = make_rng(IND)
        block = sample(IND, np.full(12, 0.3), rng_a)
        rng_b = make_rng(IND)
        scalars = np.array([sample(IND, 0.3, rng_b) for _ in range(12)])
        np.testing.assert_array_equal(block, scalars)


class TestDeterminism:
    @pytest.mark.parametrize("model", [GAUSS, IND, LP], ids=["gauss", "ind", "lp"])
    def test_same_seed_bit_identical(self, model):
        x = np.linspace(0.0, 0.9, 1000)
        a = sample(model, x, make_rng(model))
        b = sample(model, x, make_rng(model))
        np.testing.assert_array_equal(a, b)

    def test_different_seeds_differ(self):
        other = DisturbanceModel(DisturbanceKind.UNBOUNDED_GAUSSIAN, variance=1.0, seed=13)
        a = sample(GAUSS, np.zeros(100), make_rng(GAUSS))
        b = sample(other, np.zeros(100), make_rng(other))
        assert not np.array_equal(a, b)


class TestMoments:
    def test_unbounded_gaussian_mean_and_variance(self):
        model = DisturbanceModel(DisturbanceKind.UNBOUNDED_GAUSSIAN, variance=2.5, seed=99)
        draws = sample(model, np.zeros(1_000_000), make_rng(model))
        assert abs(np.mean(draws)) < 0.01
        assert abs(np.var(draws) - 2.5) / 2.5 < 0.01


class TestCompensationPairing:
    def test_matching_spec_kinds(self):
        assert matching_compensation(IND).kind is CompensationKind.INDEPENDENT
        lp_spec = matching_compensation(LP)
        assert lp_spec.kind is CompensationKind.LOW_PREVALENCE
        assert lp_spec.d_bar == LP.bound and lp_spec.delta == LP.delta
        with pytest.raises(ValueError):
            matching_compensation(GAUSS)

    @pytest.mark.parametrize("model", [IND, LP], ids=["ind", "lp"])
    def test_every_sample_is_compensated(self, model):
        spec = matching_compensation(model)
        rng = make_rng(model)
        x = np.random.default_rng(1).uniform(0.0, 1.0, 100_000)
        draws = sample(model, x, rng)
        assert np.all(sigma(spec, x) - np.abs(draws) >= 0.0)
        for k in range(0, 100_000, 9973):
            assert compensation_sufficient(spec, draws[k], x[k])


class TestValidation:
    def test_parameter_checks(self):
        with pytest.raises(ValueError):
            DisturbanceModel(DisturbanceKind.UNBOUNDED_GAUSSIAN, variance=-1.0)
        with pytest.raises(ValueError):
            DisturbanceModel(DisturbanceKind.INDEPENDENT_BOUNDED, bound=-0.1)
        with pytest.raises(ValueError):
            DisturbanceModel(DisturbanceKind.LOW_PREVALENCE_BOUNDED, bound=0.1, delta=0.0)
