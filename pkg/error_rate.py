"""
OVERRIDERADAR - Natural error rate
Cost-optimal split of the rating scale into a 'risky' and a 'safe' super-grade,
the misclassification rate of that split (the natural error rate), the
Kolmogorov-Smirnov link and the closed forms for binormal scores.
"""

import math
import logging
from dataclasses import dataclass

import numpy as np

from errors import DomainError, InvalidArgumentError, SplitDegenerateError
from numerics import std_normal_cdf, std_normal_quantile
from rating_core import accuracy_ratio_ex_ante, bayes_invert

logger = logging.getLogger(__name__)


# =============================================================================
# COSTS AND SPLITS
# =============================================================================

@dataclass(frozen=True)
class CostModel:
    """c_D: missing a defaulter; c_N: flagging a survivor"""

    cost_default_missed: float
    cost_survivor_flagged: float

    def __post_init__(self):
        for name in ("cost_default_missed", "cost_survivor_flagged"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0.0):
                raise InvalidArgumentError(f"{name} must be a positive finite number, got {value}")
            object.__setattr__(self, name, value)

    @property
    def decision_threshold(self):
        """Flag a grade as risky when its PD exceeds c_N / (c_N + c_D)"""
        return self.cost_survivor_flagged / (self.cost_survivor_flagged + self.cost_default_missed)


def default_cost_model(p):
    """Costs inversely proportional to the class probabilities"""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"cost model needs 0 < p < 1, got {p}")
    return CostModel(1.0 / p, 1.0 / (1.0 - p))


@dataclass(frozen=True)
class SuperGradeSplit:
    risky_grades: frozenset
    safe_grades: frozenset
    expected_cost: float
    error_rate: float
    p: float

    @property
    def degenerate(self):
        """All grades on one side; the error rate is still well defined"""
        return not self.risky_grades or not self.safe_grades

    @property
    def threshold_grade(self):
        """s* when the risky grades are exactly 1..s*, else None"""
        if not self.risky_grades:
            return None
        top = max(self.risky_grades)
        return top if self.risky_grades == frozenset(range(1, top + 1)) else None


def _risky_mask(cond, risky):
    mask = np.zeros(cond.scale.k, dtype=bool)
    for grade in risky:
        mask[cond.scale.check_grade(grade) - 1] = True
    return mask


def expected_cost(cond, risky, costs):
    """c_D p P[S not in risky | D] + c_N (1 - p) P[S in risky | N]"""
    mask = _risky_mask(cond, risky)
    missed = cond.lik_default[~mask].sum()
    flagged = cond.lik_survive[mask].sum()
    return float(
        costs.cost_default_missed * cond.p * missed
        + costs.cost_survivor_flagged * (1.0 - cond.p) * flagged
    )


def misclassification_rate(cond, risky):
    """Share of borrowers on the wrong side of a risky/safe split"""
    mask = _risky_mask(cond, risky)
    return float(
        cond.p * cond.lik_default[~mask].sum()
        + (1.0 - cond.p) * cond.lik_survive[mask].sum()
    )


def optimal_split(cond):
    """Risky grades are those where the default likelihood strictly exceeds the
    survival likelihood; ties go to 'safe'."""
    risky_mask = cond.lik_default > cond.lik_survive
    grades = np.arange(1, cond.scale.k + 1)
    risky = frozenset(int(g) for g in grades[risky_mask])
    safe = frozenset(int(g) for g in grades[~risky_mask])
    split = SuperGradeSplit(
        risky_grades=risky,
        safe_grades=safe,
        expected_cost=expected_cost(cond, risky, default_cost_model(cond.p)),
        error_rate=misclassification_rate(cond, risky),
        p=cond.p,
    )
    if split.degenerate:
        logger.debug("degenerate split: %d risky / %d safe grades", len(risky), len(safe))
    return split


def super_grade_split(profile, curve):
    return optimal_split(bayes_invert(profile, curve))


def natural_error_rate(profile, curve):
    """Natural error rate inferred from the rating profile and PD curve"""
    return super_grade_split(profile, curve).error_rate


def super_grade_pds(profile, curve):
    """Average PD on the risky and on the safe super-grade"""
    split = super_grade_split(profile, curve)
    if split.degenerate:
        side = "safe" if split.safe_grades else "risky"
        raise SplitDegenerateError(
            f"optimal split has an empty super-grade; all grades are {side} with PD {split.p:.6f}",
            risky_pd=split.p if split.risky_grades else None,
            safe_pd=split.p if split.safe_grades else None,
        )
    risky = np.zeros(profile.scale.k, dtype=bool)
    risky[[g - 1 for g in split.risky_grades]] = True
    default_mass = curve.pds * profile.masses
    risky_pd = default_mass[risky].sum() / profile.masses[risky].sum()
    safe_pd = default_mass[~risky].sum() / profile.masses[~risky].sum()
    return float(risky_pd), float(safe_pd)


# =============================================================================
# KOLMOGOROV-SMIRNOV
# =============================================================================

@dataclass(frozen=True)
class KsDiagnostics:
    statistic: float
    grade_at_max: int
    monotone_likelihood_ratio: bool
    threshold_grade: int = None


def ks_statistic(cond):
    """max_s |F_D(s) - F_N(s)|"""
    return float(np.max(np.abs(cond.cdf_default - cond.cdf_survive)))


def has_monotone_likelihood_ratio(cond, tol=1e-15):
    """lik_default / lik_survive nonincreasing in the grade (cross-multiplied,
    grades without mass skipped)"""
    populated = np.flatnonzero((cond.lik_default + cond.lik_survive) > 0)
    d, n = cond.lik_default[populated], cond.lik_survive[populated]
    return bool(np.all(d[1:] * n[:-1] <= d[:-1] * n[1:] + tol))


def ks_diagnostics(cond):
    gaps = np.abs(cond.cdf_default - cond.cdf_survive)
    monotone = has_monotone_likelihood_ratio(cond)
    threshold = optimal_split(cond).threshold_grade if monotone else None
    return KsDiagnostics(
        statistic=float(gaps.max()),
        grade_at_max=int(np.argmax(gaps)) + 1,
        monotone_likelihood_ratio=monotone,
        threshold_grade=threshold,
    )


# =============================================================================
# BINORMAL SCORES
# =============================================================================

@dataclass(frozen=True)
class BinormalModel:
    """Scores N(mu_default, sigma) for defaulters and N(mu_survive, sigma) for survivors"""

    mu_default: float
    mu_survive: float
    sigma: float

    def __post_init__(self):
        values = (self.mu_default, self.mu_survive, self.sigma)
        if not all(math.isfinite(float(v)) for v in values):
            raise InvalidArgumentError("binormal parameters must be finite")
        if self.sigma <= 0.0:
            raise InvalidArgumentError(f"sigma must be positive, got {self.sigma}")
        if self.mu_default > self.mu_survive:
            raise InvalidArgumentError("defaulters must not score higher on average (mu_default <= mu_survive)")

    @property
    def separation(self):
        return (self.mu_survive - self.mu_default) / self.sigma

    @classmethod
    def from_accuracy_ratio(cls, ar, sigma=1.0):
        ar = _check_ar(ar)
        if ar < 0.0:
            raise DomainError("a binormal model with mu_default <= mu_survive has AR >= 0")
        gap = math.sqrt(2.0) * sigma * std_normal_quantile((ar + 1.0) / 2.0)
        return cls(0.0, gap, sigma)


def _check_ar(ar):
    ar = float(ar)
    if not -1.0 < ar < 1.0:
        raise DomainError(f"accuracy ratio must lie in (-1, 1), got {ar}")
    return ar


def accuracy_ratio_binormal(model):
    return 2.0 * std_normal_cdf(model.separation / math.sqrt(2.0)) - 1.0


def natural_error_rate_binormal(model):
    """Does not depend on the unconditional PD"""
    return std_normal_cdf(-model.separation / 2.0)


def natural_error_rate_from_ar(ar):
    """Binormal link between accuracy ratio and natural error rate"""
    ar = _check_ar(ar)
    return std_normal_cdf(-std_normal_quantile((ar + 1.0) / 2.0) / math.sqrt(2.0))


def super_grade_pds_binormal(p, ar):
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"unconditional PD must lie in (0, 1), got {p}")
    eps = natural_error_rate_from_ar(ar)
    risky_pd = p * (1.0 - eps) / (p * (1.0 - eps) + (1.0 - p) * eps)
    safe_pd = p * eps / (p * eps + (1.0 - p) * (1.0 - eps))
    return risky_pd, safe_pd


# =============================================================================
# MODEL SUMMARY
# =============================================================================

@dataclass(frozen=True)
class ModelSummary:
    p: float
    accuracy_ratio: float
    natural_error_rate: float
    risky_grades: tuple
    safe_grades: tuple
    risky_pd: float
    safe_pd: float
    ks: float
    threshold_grade: int = None
    degenerate: bool = False

    def to_dict(self):
        return {
            "p": self.p,
            "accuracy_ratio": self.accuracy_ratio,
            "natural_error_rate": self.natural_error_rate,
            "risky_grades": list(self.risky_grades),
            "safe_grades": list(self.safe_grades),
            "risky_pd": self.risky_pd,
            "safe_pd": self.safe_pd,
            "ks": self.ks,
            "threshold_grade": self.threshold_grade,
            "degenerate_split": self.degenerate,
        }


def summarize_model(profile, curve):
    """Everything the bound needs, computed ex ante from profile and PD curve"""
    cond = bayes_invert(profile, curve)
    split = optimal_split(cond)
    try:
        risky_pd, safe_pd = super_grade_pds(profile, curve)
    except SplitDegenerateError as e:
        risky_pd, safe_pd = e.risky_pd, e.safe_pd
    diagnostics = ks_diagnostics(cond)
    return ModelSummary(
        p=cond.p,
        accuracy_ratio=accuracy_ratio_ex_ante(profile, curve),
        natural_error_rate=split.error_rate,
        risky_grades=tuple(sorted(split.risky_grades)),
        safe_grades=tuple(sorted(split.safe_grades)),
        risky_pd=risky_pd,
        safe_pd=safe_pd,
        ks=diagnostics.statistic,
        threshold_grade=diagnostics.threshold_grade,
        degenerate=split.degenerate,
    )
