"""
OVERRIDERADAR - Override Monitoring
Observed override rate against the natural error rate of the rating model,
override policy checks, direction imbalance and pre/post-override accuracy.
"""

import logging
from dataclasses import asdict, dataclass, field, fields
from datetime import date
from enum import Enum

import numpy as np

import config
from error_rate import natural_error_rate_from_ar, optimal_split, summarize_model
from errors import (
    DegeneratePortfolioError, EmptyInputError, InsufficientOutcomesError, InvalidArgumentError,
)
import rating_core
from rating_core import RatingScale, conditionals_from_outcomes

logger = logging.getLogger(__name__)


# =============================================================================
# RECORDS AND POLICY
# =============================================================================

@dataclass(frozen=True)
class OverrideRecord:
    """One rating action: proposed grade g*, final grade g, optional outcome"""

    borrower_id: str
    rating_date: date
    proposed_grade: int
    final_grade: int
    reason_code: str = None
    default_within_period: bool = None

    @property
    def is_override(self):
        return self.final_grade != self.proposed_grade

    @property
    def is_upgrade(self):
        return self.final_grade > self.proposed_grade

    @property
    def is_downgrade(self):
        return self.final_grade < self.proposed_grade

    @property
    def notches(self):
        return self.final_grade - self.proposed_grade


@dataclass(frozen=True)
class OverridePolicy:
    no_override_at_or_above: int = None
    min_band: int = None
    downgrade_only: bool = False

    def __post_init__(self):
        if self.min_band is not None and self.min_band < 1:
            raise InvalidArgumentError(f"min_band must be >= 1, got {self.min_band}")

    def check_scale(self, scale):
        if self.no_override_at_or_above is not None and not 1 <= self.no_override_at_or_above < scale.k:
            raise InvalidArgumentError(
                f"no-override threshold must be a grade below {scale.k}, got {self.no_override_at_or_above}"
            )

    @property
    def active(self):
        return self.no_override_at_or_above is not None or self.min_band is not None or self.downgrade_only


@dataclass(frozen=True)
class PolicyViolation:
    record_index: int
    borrower_id: str
    rules: tuple
    message: str


def override_rate(records):
    """#{i: g*_i != g_i} / n"""
    if not records:
        raise EmptyInputError("override rate needs at least one rating action")
    return sum(r.is_override for r in records) / len(records)


def check_policy(records, policy):
    """One violation per record that breaks any active restriction"""
    violations = []
    for i, r in enumerate(records):
        if not r.is_override:
            continue
        rules = []
        if policy.no_override_at_or_above is not None and r.proposed_grade >= policy.no_override_at_or_above:
            rules.append("no_override_at_or_above")
        if policy.min_band is not None and abs(r.notches) < policy.min_band:
            rules.append("min_band")
        if policy.downgrade_only and r.is_upgrade:
            rules.append("downgrade_only")
        if rules:
            violations.append(PolicyViolation(
                record_index=i,
                borrower_id=r.borrower_id,
                rules=tuple(rules),
                message=f"{r.borrower_id} {r.proposed_grade}->{r.final_grade}: {', '.join(rules)}",
            ))
    return violations


def direction_balance(records):
    """(n_upgrades, n_downgrades)"""
    return sum(r.is_upgrade for r in records), sum(r.is_downgrade for r in records)


# =============================================================================
# EMPIRICAL DISCRIMINATORY POWER
# =============================================================================

def _empirical_conditionals(pairs, scale=None):
    pairs = list(pairs)
    grades = np.array([g for g, _ in pairs], dtype=int)
    defaulted = np.array([bool(z) for _, z in pairs], dtype=bool)
    n_defaults = int(defaulted.sum())
    if n_defaults == 0 or n_defaults == len(pairs):
        raise InsufficientOutcomesError(
            f"need at least one default and one survivor, got {n_defaults} of {len(pairs)}"
        )
    if scale is None:
        scale = RatingScale(max(2, int(grades.max())))
    try:
        return conditionals_from_outcomes(grades, defaulted, scale)
    except DegeneratePortfolioError as e:
        raise InsufficientOutcomesError(str(e))


def empirical_ar(grade_outcome_pairs, scale=None):
    """Accuracy ratio from observed (grade, defaulted) pairs"""
    return rating_core.accuracy_ratio(_empirical_conditionals(grade_outcome_pairs, scale))


def ex_post_natural_error_rate(grade_outcome_pairs, scale=None):
    """Natural error rate estimated from observed outcomes"""
    return optimal_split(_empirical_conditionals(grade_outcome_pairs, scale)).error_rate


# =============================================================================
# ASSESSMENT
# =============================================================================

class Verdict(str, Enum):
    OVERRIDE_RATE_ABOVE_BOUND = "OVERRIDE_RATE_ABOVE_BOUND"
    OVERRIDE_RATE_BELOW_BOUND_NOTE = "OVERRIDE_RATE_BELOW_BOUND_NOTE"
    POST_AR_BELOW_PRE_AR = "POST_AR_BELOW_PRE_AR"
    EX_ANTE_AR_ABOVE_EX_POST = "EX_ANTE_AR_ABOVE_EX_POST"
    AR_UNAVAILABLE = "AR_UNAVAILABLE"
    UPWARD_IMBALANCE = "UPWARD_IMBALANCE"
    DOWNWARD_IMBALANCE = "DOWNWARD_IMBALANCE"
    POLICY_VIOLATIONS = "POLICY_VIOLATIONS"


@dataclass(frozen=True)
class Finding:
    verdict: Verdict
    severity: str
    message: str

    def to_dict(self):
        return {"verdict": self.verdict.value, "severity": self.severity, "message": self.message}


@dataclass(frozen=True)
class MonitoringConfig:
    bound_slack: float = 0.0
    imbalance_minority_share: float = 0.25
    imbalance_min_overrides: int = 20
    ar_drop_tolerance: float = 0.02
    min_defaults_for_ar: int = 1

    def __post_init__(self):
        # JSON bodies may carry numbers as strings
        for f in fields(self):
            raw = getattr(self, f.name)
            try:
                value = float(raw) if f.type is float else _whole_number(raw)
            except (TypeError, ValueError, OverflowError):
                raise InvalidArgumentError(f"{f.name} must be a number, got {raw!r}")
            if not np.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{f.name} must be finite and >= 0, got {raw!r}")
            object.__setattr__(self, f.name, value)
        if self.imbalance_minority_share > 1:
            raise InvalidArgumentError(
                f"imbalance_minority_share must lie in [0, 1], got {self.imbalance_minority_share}"
            )

    @classmethod
    def from_env(cls, **overrides):
        values = dict(config.MONITORING_DEFAULTS)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _whole_number(raw):
    value = float(raw)
    if value != int(value):
        raise ValueError(raw)
    return int(value)


@dataclass
class MonitoringReport:
    n_actions: int
    n_overrides: int
    override_rate: float
    natural_error_rate: float
    bound_source: str
    bound_breached: bool
    n_upgrades: int
    n_downgrades: int
    ar_ex_ante: float = None
    ar_pre: float = None
    ar_post: float = None
    natural_error_rate_ex_post: float = None
    n_defaults_observed: int = 0
    policy_violations: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)

    @property
    def verdict_codes(self):
        return [f.verdict for f in self.verdicts]

    def to_dict(self):
        data = asdict(self)
        data["policy_violations"] = [asdict(v) for v in self.policy_violations]
        data["verdicts"] = [f.to_dict() for f in self.verdicts]
        for v in data["policy_violations"]:
            v["rules"] = list(v["rules"])
        return data


def _imbalance_finding(n_upgrades, n_downgrades, cfg):
    n_overrides = n_upgrades + n_downgrades
    if n_overrides == 0 or n_overrides < cfg.imbalance_min_overrides:
        return None
    if min(n_upgrades, n_downgrades) / n_overrides >= cfg.imbalance_minority_share:
        return None
    if n_upgrades > n_downgrades:
        return Finding(Verdict.UPWARD_IMBALANCE, "warning",
                       f"{n_upgrades} upgrades vs {n_downgrades} downgrades: possible PD overestimation")
    return Finding(Verdict.DOWNWARD_IMBALANCE, "warning",
                   f"{n_downgrades} downgrades vs {n_upgrades} upgrades: possible PD underestimation")


def assess(records, profile=None, curve=None, policy=None, tolerance_config=None, accuracy_ratio=None):
    """Monitoring report for one observation period.

    The bound comes from the rating profile and PD curve when both are given,
    otherwise from ``accuracy_ratio`` through the binormal relation.
    """
    records = list(records)
    if not records:
        raise EmptyInputError("no rating actions to assess")
    policy = policy or OverridePolicy()
    cfg = tolerance_config or MonitoringConfig()

    if profile is not None and curve is not None:
        summary = summarize_model(profile, curve)
        bound, ar_ex_ante, bound_source = summary.natural_error_rate, summary.accuracy_ratio, "profile"
        scale = profile.scale
    elif accuracy_ratio is not None:
        bound, ar_ex_ante, bound_source = natural_error_rate_from_ar(accuracy_ratio), float(accuracy_ratio), "accuracy_ratio"
        scale = RatingScale(max(2, max(max(r.proposed_grade, r.final_grade) for r in records)))
    else:
        raise InvalidArgumentError("assess needs either a profile and PD curve or an accuracy ratio")
    policy.check_scale(scale)
    for r in records:
        scale.check_grade(r.proposed_grade)
        scale.check_grade(r.final_grade)

    rate = override_rate(records)
    n_overrides = sum(r.is_override for r in records)
    n_upgrades, n_downgrades = direction_balance(records)
    violations = check_policy(records, policy)
    breached = rate > bound + cfg.bound_slack
    logger.info("override rate %.4f vs natural error rate %.4f (%s)", rate, bound, bound_source)

    report = MonitoringReport(
        n_actions=len(records),
        n_overrides=n_overrides,
        override_rate=rate,
        natural_error_rate=bound,
        bound_source=bound_source,
        bound_breached=breached,
        n_upgrades=n_upgrades,
        n_downgrades=n_downgrades,
        ar_ex_ante=ar_ex_ante,
        policy_violations=violations,
    )

    findings = []
    if breached:
        findings.append(Finding(
            Verdict.OVERRIDE_RATE_ABOVE_BOUND, "breach",
            f"override rate {rate:.4f} exceeds natural error rate {bound:.4f}: "
            "check PD curve against observed discriminatory power, confirm overrides were justified",
        ))
    else:
        findings.append(Finding(
            Verdict.OVERRIDE_RATE_BELOW_BOUND_NOTE, "info",
            f"override rate {rate:.4f} within natural error rate {bound:.4f}: "
            "confirm due override procedure; higher than expected power possible",
        ))

    # Outcomes: records without a default flag count for rates only
    observed = [r for r in records if r.default_within_period is not None]
    report.n_defaults_observed = sum(bool(r.default_within_period) for r in observed)
    ar_available = False
    if report.n_defaults_observed >= max(1, cfg.min_defaults_for_ar):
        try:
            report.ar_pre = empirical_ar([(r.proposed_grade, r.default_within_period) for r in observed], scale)
            report.ar_post = empirical_ar([(r.final_grade, r.default_within_period) for r in observed], scale)
            report.natural_error_rate_ex_post = ex_post_natural_error_rate(
                [(r.proposed_grade, r.default_within_period) for r in observed], scale)
            ar_available = True
        except InsufficientOutcomesError as e:
            logger.info("accuracy ratio unavailable: %s", e)

    if not ar_available:
        findings.append(Finding(
            Verdict.AR_UNAVAILABLE, "info",
            f"{report.n_defaults_observed} observed defaults: pre/post override AR not estimated",
        ))
    else:
        if report.ar_pre - report.ar_post > cfg.ar_drop_tolerance:
            findings.append(Finding(
                Verdict.POST_AR_BELOW_PRE_AR, "warning",
                f"AR after overrides {report.ar_post:.4f} below AR before {report.ar_pre:.4f}: "
                "override governance may need an update",
            ))
        if breached and ar_ex_ante - report.ar_pre > cfg.ar_drop_tolerance:
            findings.append(Finding(
                Verdict.EX_ANTE_AR_ABOVE_EX_POST, "warning",
                f"ex-ante AR {ar_ex_ante:.4f} above observed AR {report.ar_pre:.4f}: "
                "PD curve slope may be too large",
            ))

    imbalance = _imbalance_finding(n_upgrades, n_downgrades, cfg)
    if imbalance:
        findings.append(imbalance)

    if violations:
        findings.append(Finding(
            Verdict.POLICY_VIOLATIONS, "warning",
            f"{len(violations)} override(s) break the override policy",
        ))

    report.verdicts = findings
    return report


# =============================================================================
# REPORT FORMATTING
# =============================================================================

def _fmt(value, digits=6):
    return "N/A" if value is None else f"{value:.{digits}f}"


def format_report_block(report):
    """Plain-text report in banner blocks"""
    r = report
    violations = "\n".join(f"  - record {v.record_index}: {v.message}" for v in r.policy_violations) or "  (none)"
    verdicts = "\n".join(f"  - [{f.severity.upper()}] {f.verdict.value}: {f.message}" for f in r.verdicts)

    return f"""
================================================================================
OVERRIDE MONITORING REPORT
================================================================================

RATING_ACTIONS: {r.n_actions}
OVERRIDES: {r.n_overrides}
OVERRIDE_RATE: {_fmt(r.override_rate)}
NATURAL_ERROR_RATE: {_fmt(r.natural_error_rate)} (from {r.bound_source})
BOUND_BREACHED: {r.bound_breached}

--------------------------------------------------------------------------------
DIRECTION
--------------------------------------------------------------------------------
UPGRADES: {r.n_upgrades}
DOWNGRADES: {r.n_downgrades}

--------------------------------------------------------------------------------
DISCRIMINATORY POWER
--------------------------------------------------------------------------------
AR_EX_ANTE: {_fmt(r.ar_ex_ante)}
AR_PRE: {_fmt(r.ar_pre)}
AR_POST: {_fmt(r.ar_post)}
NATURAL_ERROR_RATE_EX_POST: {_fmt(r.natural_error_rate_ex_post)}
DEFAULTS_OBSERVED: {r.n_defaults_observed}

--------------------------------------------------------------------------------
POLICY VIOLATIONS
--------------------------------------------------------------------------------
{violations}

--------------------------------------------------------------------------------
VERDICTS
--------------------------------------------------------------------------------
{verdicts}

================================================================================
"""
