import numpy as np
import pytest

from conftest import random_model
from errors import DegeneratePortfolioError, InvalidArgumentError, UndefinedGradeError
from rating_core import (
    ConditionalDistributions, PdCurve, RatingProfile, RatingScale,
    accuracy_ratio, accuracy_ratio_ex_ante, bayes_invert, conditional_pd, conditional_pds,
    conditionals_from_outcomes, profile_from_conditionals, unconditional_pd,
)


class TestDataModel:
    def test_scale(self):
        scale = RatingScale(5)
        assert list(scale.grades) == [1, 2, 3, 4, 5]
        assert 3 in scale and 0 not in scale and 6 not in scale
        with pytest.raises(InvalidArgumentError):
            RatingScale(1)

    def test_profile_must_sum_to_one(self):
        with pytest.raises(InvalidArgumentError):
            RatingProfile.from_masses([0.2, 0.5, 0.2])
        with pytest.raises(InvalidArgumentError):
            RatingProfile.from_masses([1.2, -0.2])

    def test_profile_absorbs_csv_round_off(self):
        profile = RatingProfile.from_masses([0.2, 0.5, 0.3 + 1e-12])
        assert profile.masses.sum() == pytest.approx(1.0, abs=1e-15)

    def test_curve_range(self):
        with pytest.raises(InvalidArgumentError):
            PdCurve.from_values([0.1, 1.2])
        with pytest.raises(InvalidArgumentError):
            PdCurve.from_values([0.1, np.nan])

    def test_curve_lookup(self, three_grade_curve):
        assert three_grade_curve.pd(2) == 0.05
        assert three_grade_curve.is_nonincreasing
        with pytest.raises(InvalidArgumentError):
            three_grade_curve.pd(4)

    def test_arrays_are_frozen(self, three_grade_profile):
        with pytest.raises(ValueError):
            three_grade_profile.masses[0] = 0.9


class TestBayesRelations:
    def test_unconditional_pd(self, three_grade_profile, three_grade_curve):
        assert unconditional_pd(three_grade_profile, three_grade_curve) == pytest.approx(0.048, abs=1e-15)

    def test_constant_curve(self):
        profile = RatingProfile.from_masses([0.25, 0.25, 0.25, 0.25])
        assert unconditional_pd(profile, PdCurve.from_values([0.03] * 4)) == pytest.approx(0.03)

    def test_scale_mismatch(self, three_grade_profile):
        with pytest.raises(InvalidArgumentError):
            unconditional_pd(three_grade_profile, PdCurve.from_values([0.1, 0.05]))

    def test_inversion(self, three_grade_profile, three_grade_curve):
        cond = bayes_invert(three_grade_profile, three_grade_curve)
        assert cond.p == pytest.approx(0.048)
        assert cond.lik_default == pytest.approx([0.416667, 0.520833, 0.0625], abs=1e-6)
        assert cond.lik_survive == pytest.approx([0.189076, 0.498950, 0.311975], abs=1e-6)
        assert cond.lik_default.sum() == pytest.approx(1.0, abs=1e-12)
        assert cond.lik_survive.sum() == pytest.approx(1.0, abs=1e-12)

    def test_mixture_identity(self, rng):
        for _ in range(50):
            profile, curve = random_model(rng, int(rng.integers(2, 20)))
            cond = bayes_invert(profile, curve)
            for s in profile.scale.grades:
                mixed = cond.p * cond.lik_default[s - 1] + (1 - cond.p) * cond.lik_survive[s - 1]
                assert mixed == pytest.approx(profile.mass(s), abs=1e-12)
        with pytest.raises(InvalidArgumentError):
            profile.mass(profile.scale.k + 1)

    def test_inversion_needs_defaults_and_survivors(self, three_grade_profile):
        with pytest.raises(DegeneratePortfolioError):
            bayes_invert(three_grade_profile, PdCurve.from_values([0.0, 0.0, 0.0]))
        with pytest.raises(DegeneratePortfolioError):
            bayes_invert(three_grade_profile, PdCurve.from_values([1.0, 1.0, 1.0]))

    def test_forward(self):
        scale = RatingScale(2)
        cond = ConditionalDistributions(scale, [0.5, 0.5], [0.5, 0.5], 0.1)
        assert conditional_pd(cond, 1) == pytest.approx(0.1)
        cond = ConditionalDistributions(scale, [1.0, 0.0], [0.0, 1.0], 0.3)
        assert conditional_pd(cond, 1) == 1.0
        assert conditional_pd(cond, 2) == 0.0

    def test_forward_on_empty_grade(self):
        cond = ConditionalDistributions(RatingScale(3), [0.5, 0.5, 0.0], [0.5, 0.5, 0.0], 0.2)
        with pytest.raises(UndefinedGradeError):
            conditional_pd(cond, 3)
        assert np.isnan(conditional_pds(cond)[2])

    def test_round_trip_on_random_models(self, rng):
        for _ in range(200):
            k = int(rng.integers(2, 25))
            profile, curve = random_model(rng, k)
            cond = bayes_invert(profile, curve)
            assert conditional_pds(cond) == pytest.approx(curve.pds, abs=1e-12)
            assert profile_from_conditionals(cond).masses == pytest.approx(profile.masses, abs=1e-12)
            assert accuracy_ratio(cond) == pytest.approx(accuracy_ratio_ex_ante(profile, curve), abs=1e-12)


class TestAccuracyRatio:
    def test_three_grade_model(self, three_grade_profile, three_grade_curve):
        cond = bayes_invert(three_grade_profile, three_grade_curve)
        assert accuracy_ratio(cond) == pytest.approx(0.358894, abs=1e-6)
        assert accuracy_ratio_ex_ante(three_grade_profile, three_grade_curve) == pytest.approx(0.358894, abs=1e-6)

    def test_perfect_separation(self):
        cond = ConditionalDistributions(RatingScale(2), [1.0, 0.0], [0.0, 1.0], 0.1)
        assert accuracy_ratio(cond) == 1.0

    def test_identical_distributions(self):
        cond = ConditionalDistributions(RatingScale(3), [0.2, 0.3, 0.5], [0.2, 0.3, 0.5], 0.1)
        assert accuracy_ratio(cond) == pytest.approx(0.0, abs=1e-15)

    def test_reversed_model_is_negative(self):
        cond = ConditionalDistributions(RatingScale(2), [0.0, 1.0], [1.0, 0.0], 0.1)
        assert accuracy_ratio(cond) == -1.0

    def test_flat_curve_has_zero_ex_ante_ar(self, three_grade_profile):
        flat = PdCurve.from_values([0.05, 0.05, 0.05])
        assert accuracy_ratio_ex_ante(three_grade_profile, flat) == pytest.approx(0.0, abs=1e-15)

    def test_from_outcomes(self):
        scale = RatingScale(3)
        cond = conditionals_from_outcomes([1, 2, 2, 3, 3], [True, True, False, False, False], scale)
        assert cond.p == pytest.approx(0.4)
        assert cond.lik_default == pytest.approx([0.5, 0.5, 0.0])
        assert cond.lik_survive == pytest.approx([0.0, 1 / 3, 2 / 3])
        assert accuracy_ratio(cond) == pytest.approx(5 / 6, abs=1e-12)

    def test_empty_grades_leave_ar_unchanged(self, rng):
        for _ in range(50):
            k = int(rng.integers(2, 12))
            cond = bayes_invert(*random_model(rng, k))
            gaps = np.sort(rng.choice(k + 1, size=int(rng.integers(1, 5))))
            padded = ConditionalDistributions(
                RatingScale(k + gaps.size),
                np.insert(cond.lik_default, gaps, 0.0),
                np.insert(cond.lik_survive, gaps, 0.0),
                cond.p,
            )
            assert accuracy_ratio(padded) == pytest.approx(accuracy_ratio(cond), abs=1e-12)

    def test_monotone_curve_has_nonnegative_ar(self, rng):
        for _ in range(200):
            profile, curve = random_model(rng, int(rng.integers(2, 25)), monotone=True)
            assert accuracy_ratio_ex_ante(profile, curve) >= -1e-12
            assert accuracy_ratio(bayes_invert(profile, curve)) >= -1e-12
