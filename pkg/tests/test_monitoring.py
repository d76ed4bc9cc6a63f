from datetime import date

import numpy as np
import pytest

from calibration import CorrelatedBinomialParams, correlated_binomial_profile, quasi_moment_match
from conftest import make_records
from errors import EmptyInputError, InsufficientOutcomesError, InvalidArgumentError
from monitoring import (
    MonitoringConfig, OverridePolicy, OverrideRecord, Verdict, assess, check_policy,
    direction_balance, empirical_ar, ex_post_natural_error_rate, format_report_block, override_rate,
)
from rating_core import accuracy_ratio_ex_ante, bayes_invert

N_RECORDS = 1000
N_UPGRADES = 200
N_DOWNGRADES = 150


@pytest.fixture(scope="module")
def example_profile():
    return correlated_binomial_profile(CorrelatedBinomialParams(16, 0.55, 0.1))


@pytest.fixture
def seeded_portfolio():
    """1000 rating actions, 350 overrides (200 up, 150 down), seeded"""
    rng = np.random.default_rng(7)
    proposed = rng.integers(3, 16, size=N_RECORDS)
    final = proposed.copy()
    order = rng.permutation(N_RECORDS)
    up, down = order[:N_UPGRADES], order[N_UPGRADES:N_UPGRADES + N_DOWNGRADES]
    final[up] += rng.integers(1, 3, size=N_UPGRADES)
    final[down] -= rng.integers(1, 3, size=N_DOWNGRADES)
    return make_records(proposed, final)


def _simulated_outcomes(rng, profile, curve, n):
    grades = rng.choice(np.arange(1, profile.scale.k + 1), size=n, p=profile.masses)
    defaults = rng.random(n) < curve.pds[grades - 1]
    return grades, defaults


def _ar_standard_error(cond, n):
    """Asymptotic standard error of the empirical AR over n rating actions.

    Rank-statistic variance with ties counted half, from the exact grade
    distributions of defaulters and survivors.
    """
    q_d, q_n = cond.lik_default, cond.lik_survive
    # concordance of one defaulter against all survivors, and vice versa
    h_d = 1.0 - np.cumsum(q_n) + 0.5 * q_n
    h_n = np.cumsum(q_d) - 0.5 * q_d
    auc = q_d @ h_d
    var_auc = (q_d @ h_d ** 2 - auc ** 2) / (n * cond.p) + (q_n @ h_n ** 2 - auc ** 2) / (n * (1.0 - cond.p))
    return 2.0 * float(np.sqrt(var_auc))


class TestOverrideRate:
    def test_rate(self):
        records = make_records([5, 5, 5, 5], [5, 6, 5, 3])
        assert override_rate(records) == 0.5
        assert direction_balance(records) == (1, 1)

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            override_rate([])

    def test_record_properties(self):
        record = OverrideRecord("B1", date(2024, 1, 2), proposed_grade=7, final_grade=4)
        assert record.is_override and record.is_downgrade and not record.is_upgrade
        assert record.notches == -3


class TestPolicy:
    RECORDS = make_records([3, 8, 9, 4, 6], [5, 7, 9, 3, 6])

    def test_no_override_zone(self):
        violations = check_policy(self.RECORDS, OverridePolicy(no_override_at_or_above=8))
        assert [v.record_index for v in violations] == [1]
        assert violations[0].rules == ("no_override_at_or_above",)

    def test_min_band(self):
        violations = check_policy(self.RECORDS, OverridePolicy(min_band=2))
        assert [v.record_index for v in violations] == [1, 3]

    def test_downgrade_only(self):
        violations = check_policy(self.RECORDS, OverridePolicy(downgrade_only=True))
        assert [v.record_index for v in violations] == [0]
        assert "3->5" in violations[0].message

    def test_rules_combine_per_record(self):
        policy = OverridePolicy(no_override_at_or_above=8, min_band=2, downgrade_only=True)
        violations = check_policy(self.RECORDS, policy)
        assert [v.record_index for v in violations] == [0, 1, 3]
        assert violations[1].rules == ("no_override_at_or_above", "min_band")

    def test_inactive_policy(self):
        assert not OverridePolicy().active
        assert check_policy(self.RECORDS, OverridePolicy()) == []

    def test_threshold_must_fit_scale(self):
        records = make_records([3, 4], [3, 5])
        with pytest.raises(InvalidArgumentError):
            assess(records, accuracy_ratio=0.5, policy=OverridePolicy(no_override_at_or_above=9))
        with pytest.raises(InvalidArgumentError):
            OverridePolicy(min_band=0)


class TestEmpiricalAccuracy:
    def test_small_sample(self):
        pairs = [(1, True), (2, True), (2, False), (3, False), (3, False)]
        assert empirical_ar(pairs) == pytest.approx(5 / 6, abs=1e-12)

    def test_needs_both_outcomes(self):
        with pytest.raises(InsufficientOutcomesError):
            empirical_ar([(1, False), (2, False)])
        with pytest.raises(InsufficientOutcomesError):
            empirical_ar([(1, True), (2, True)])

    def test_ex_post_error_rate(self):
        pairs = [(1, True), (2, True), (2, False), (3, False), (3, False)]
        # risky grades 1 and 2: only the survivor share in grade 2 is misclassified
        assert ex_post_natural_error_rate(pairs) == pytest.approx(0.6 / 3, abs=1e-12)

    def test_converges_to_ex_ante_ar(self, example_profile):
        rng = np.random.default_rng(11)
        n = 100_000
        curve = quasi_moment_match(example_profile, 0.05, 0.75).to_pd_curve()
        grades, defaults = _simulated_outcomes(rng, example_profile, curve, n)
        ar = empirical_ar(zip(grades.tolist(), defaults.tolist()), example_profile.scale)
        se = _ar_standard_error(bayes_invert(example_profile, curve), n)
        assert 3 * se < 0.025
        assert abs(ar - accuracy_ratio_ex_ante(example_profile, curve)) < 3 * se


class TestAssess:
    def test_seeded_fixture_against_ar_bound(self, seeded_portfolio):
        report = assess(seeded_portfolio, accuracy_ratio=0.5)
        assert report.n_actions == N_RECORDS
        assert report.n_overrides == 350
        assert report.override_rate == pytest.approx(0.350)
        assert report.natural_error_rate == pytest.approx(0.316712, abs=1e-6)
        assert report.bound_breached
        assert (report.n_upgrades, report.n_downgrades) == (N_UPGRADES, N_DOWNGRADES)
        codes = report.verdict_codes
        assert Verdict.OVERRIDE_RATE_ABOVE_BOUND in codes
        assert Verdict.OVERRIDE_RATE_BELOW_BOUND_NOTE not in codes
        assert Verdict.AR_UNAVAILABLE in codes
        assert Verdict.UPWARD_IMBALANCE not in codes

    def test_seeded_fixture_against_model_bound(self, seeded_portfolio, example_profile):
        curve = quasi_moment_match(example_profile, 0.01, 0.5).to_pd_curve()
        report = assess(seeded_portfolio, profile=example_profile, curve=curve)
        assert report.bound_source == "profile"
        assert report.natural_error_rate == pytest.approx(0.3186, abs=1e-3)
        assert report.ar_ex_ante == pytest.approx(0.5, abs=1e-9)
        assert report.bound_breached

    def test_deterministic(self, seeded_portfolio):
        assert assess(seeded_portfolio, accuracy_ratio=0.5).to_dict() == \
            assess(seeded_portfolio, accuracy_ratio=0.5).to_dict()

    def test_within_bound(self):
        records = make_records([5] * 10, [5, 5, 5, 6, 5, 5, 4, 5, 5, 7])
        report = assess(records, accuracy_ratio=0.5)
        assert report.override_rate == pytest.approx(0.3)
        assert not report.bound_breached
        assert report.verdict_codes[0] == Verdict.OVERRIDE_RATE_BELOW_BOUND_NOTE
        assert Verdict.OVERRIDE_RATE_ABOVE_BOUND not in report.verdict_codes

    def test_slack_widens_the_bound(self, seeded_portfolio):
        report = assess(seeded_portfolio, accuracy_ratio=0.5, tolerance_config=MonitoringConfig(bound_slack=0.05))
        assert not report.bound_breached

    def test_random_overrides_lower_the_ar(self, example_profile):
        rng = np.random.default_rng(3)
        curve = quasi_moment_match(example_profile, 0.05, 0.75).to_pd_curve()
        proposed, defaults = _simulated_outcomes(rng, example_profile, curve, 20_000)
        final = proposed.copy()
        perturbed = rng.random(proposed.size) < 0.7
        final[perturbed] = rng.integers(1, 18, size=int(perturbed.sum()))
        records = make_records(proposed, final, defaults.tolist())

        report = assess(records, profile=example_profile, curve=curve)
        assert report.ar_post < report.ar_pre
        assert report.ar_pre == pytest.approx(0.75, abs=0.1)
        assert Verdict.POST_AR_BELOW_PRE_AR in report.verdict_codes
        assert 0.0 <= report.natural_error_rate_ex_post <= 0.5

    def test_unchanged_ratings_keep_the_ar(self):
        rng = np.random.default_rng(5)
        proposed = rng.integers(1, 11, size=400)
        defaults = rng.random(400) < 0.3 / proposed
        report = assess(make_records(proposed, proposed, defaults.tolist()), accuracy_ratio=0.6)
        assert report.ar_post == pytest.approx(report.ar_pre, abs=1e-15)
        assert Verdict.POST_AR_BELOW_PRE_AR not in report.verdict_codes
        assert Verdict.AR_UNAVAILABLE not in report.verdict_codes

    def test_ex_ante_ar_above_observed(self):
        rng = np.random.default_rng(9)
        proposed = rng.integers(1, 11, size=2000)
        final = proposed.copy()
        final[:600] = np.where(proposed[:600] > 1, proposed[:600] - 1, 2)
        defaults = rng.random(2000) < 0.1
        report = assess(make_records(proposed, final, defaults.tolist()), accuracy_ratio=0.9)
        assert report.bound_breached
        assert Verdict.EX_ANTE_AR_ABOVE_EX_POST in report.verdict_codes

    def test_too_few_defaults(self):
        records = make_records([3, 4, 5], [3, 4, 6], [False, False, None])
        report = assess(records, accuracy_ratio=0.5)
        assert report.ar_pre is None
        assert Verdict.AR_UNAVAILABLE in report.verdict_codes

    def test_min_defaults_setting(self):
        records = make_records([2, 4, 5, 6], [2, 4, 5, 6], [True, False, False, False])
        report = assess(records, accuracy_ratio=0.5, tolerance_config=MonitoringConfig(min_defaults_for_ar=2))
        assert Verdict.AR_UNAVAILABLE in report.verdict_codes

    def test_upward_imbalance(self):
        records = make_records([5] * 40, [6] * 30 + [4] * 2 + [5] * 8)
        report = assess(records, accuracy_ratio=0.5)
        assert Verdict.UPWARD_IMBALANCE in report.verdict_codes

    def test_downward_imbalance(self):
        records = make_records([5] * 40, [4] * 25 + [5] * 15)
        report = assess(records, accuracy_ratio=0.5)
        assert Verdict.DOWNWARD_IMBALANCE in report.verdict_codes

    def test_small_samples_stay_quiet(self):
        records = make_records([5] * 10, [6] * 5 + [5] * 5)
        report = assess(records, accuracy_ratio=0.5)
        assert Verdict.UPWARD_IMBALANCE not in report.verdict_codes

    def test_no_overrides_with_zero_imbalance_minimum(self):
        cfg = MonitoringConfig(imbalance_min_overrides=0)
        report = assess(make_records([5, 6], [5, 6]), accuracy_ratio=0.5, tolerance_config=cfg)
        assert report.n_overrides == 0
        assert Verdict.UPWARD_IMBALANCE not in report.verdict_codes
        assert Verdict.DOWNWARD_IMBALANCE not in report.verdict_codes

    def test_policy_violations_reported(self):
        records = make_records([5, 5, 5], [6, 4, 5])
        report = assess(records, accuracy_ratio=0.5, policy=OverridePolicy(downgrade_only=True))
        assert len(report.policy_violations) == 1
        assert Verdict.POLICY_VIOLATIONS in report.verdict_codes

    def test_grades_must_fit_the_profile(self, example_profile):
        curve = quasi_moment_match(example_profile, 0.05, 0.5).to_pd_curve()
        with pytest.raises(InvalidArgumentError):
            assess(make_records([5, 18], [5, 18]), profile=example_profile, curve=curve)

    def test_needs_a_bound(self):
        with pytest.raises(InvalidArgumentError):
            assess(make_records([5], [5]))
        with pytest.raises(EmptyInputError):
            assess([], accuracy_ratio=0.5)


class TestMonitoringConfig:
    def test_strings_are_converted(self):
        cfg = MonitoringConfig(bound_slack="0.1", imbalance_min_overrides="5", min_defaults_for_ar=2.0)
        assert cfg.bound_slack == 0.1
        assert cfg.imbalance_min_overrides == 5 and isinstance(cfg.imbalance_min_overrides, int)
        assert cfg.min_defaults_for_ar == 2

    @pytest.mark.parametrize("values", [
        {"imbalance_minority_share": 1.5},
        {"imbalance_minority_share": -0.1},
        {"imbalance_min_overrides": -1},
        {"imbalance_min_overrides": 2.5},
        {"ar_drop_tolerance": -0.01},
        {"bound_slack": float("nan")},
        {"bound_slack": "wide"},
        {"min_defaults_for_ar": None},
    ])
    def test_rejects_bad_values(self, values):
        with pytest.raises(InvalidArgumentError):
            MonitoringConfig(**values)

    def test_from_env_keeps_explicit_values(self):
        cfg = MonitoringConfig.from_env(ar_drop_tolerance="0.5", bound_slack=None)
        assert cfg.ar_drop_tolerance == 0.5
        assert cfg.bound_slack == MonitoringConfig.from_env().bound_slack


class TestReportFormatting:
    def test_block(self):
        records = make_records([5, 5, 5], [6, 4, 5])
        report = assess(records, accuracy_ratio=0.5, policy=OverridePolicy(downgrade_only=True))
        text = format_report_block(report)
        assert "OVERRIDE_RATE: 0.666667" in text
        assert "NATURAL_ERROR_RATE: 0.316712 (from accuracy_ratio)" in text
        assert "BOUND_BREACHED: True" in text
        assert "AR_PRE: N/A" in text
        assert "record 0:" in text
        assert "OVERRIDE_RATE_ABOVE_BOUND" in text

    def test_to_dict(self):
        report = assess(make_records([5, 5], [6, 5], [True, False]), accuracy_ratio=0.5)
        data = report.to_dict()
        assert data["verdicts"][0]["verdict"] == "OVERRIDE_RATE_ABOVE_BOUND"
        assert data["n_overrides"] == 1
