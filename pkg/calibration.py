"""
OVERRIDERADAR - Calibration
Correlated binomial rating profiles and logit PD curves fitted to a target
unconditional PD and accuracy ratio (quasi-moment matching).
"""

import math
import logging
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from errors import CalibrationInfeasibleError, DomainError, InvalidArgumentError, NumericError
from numerics import find_root, integrate_gaussian, std_normal_quantile
from rating_core import PdCurve, RatingProfile, RatingScale, accuracy_ratio_ex_ante, unconditional_pd

logger = logging.getLogger(__name__)

# Solver settings
SLOPE_BRACKET = 50.0
MAX_SLOPE = 3200.0
INTERCEPT_MARGIN = 40.0
BRACKET_TOL = 1e-11
TARGET_TOL = 1e-9


# =============================================================================
# RATING PROFILE
# =============================================================================

@dataclass(frozen=True)
class CorrelatedBinomialParams:
    """k_trials binomial trials (grades - 1), mean driver lam, overdispersion rho"""

    k_trials: int
    lam: float
    rho: float

    def __post_init__(self):
        if int(self.k_trials) != self.k_trials or self.k_trials < 1:
            raise InvalidArgumentError(f"k_trials must be a positive integer, got {self.k_trials!r}")
        if not 0.0 < self.lam < 1.0:
            raise DomainError(f"lambda must lie in (0, 1), got {self.lam}")
        if not 0.0 <= self.rho < 1.0:
            raise DomainError(f"rho must lie in [0, 1), got {self.rho}")

    @property
    def n_grades(self):
        return int(self.k_trials) + 1


def conditional_success_probability(params, y):
    """G(lam, rho, y) for the common factor value(s) y"""
    threshold = std_normal_quantile(params.lam)
    return special.ndtr((threshold - math.sqrt(params.rho) * np.asarray(y)) / math.sqrt(1.0 - params.rho))


def correlated_binomial_profile(params, rule=None):
    """Profile on grades 1..k_trials+1 with P[S = s] = P[X = s - 1]"""
    k = int(params.k_trials)
    outcomes = np.arange(k + 1)

    def kernel(y):
        g = conditional_success_probability(params, y)
        return stats.binom.pmf(outcomes[None, :], k, g[:, None])

    masses = integrate_gaussian(kernel, rule)
    if np.any(masses < -1e-12):
        raise NumericError("correlated binomial quadrature produced negative masses")
    total = masses.sum()
    if abs(total - 1.0) > 1e-10:
        raise NumericError(f"correlated binomial masses sum to {total:.12g}")
    masses = np.clip(masses, 0.0, None) / total
    logger.debug("correlated binomial profile k=%d lam=%g rho=%g", k, params.lam, params.rho)
    return RatingProfile(RatingScale(k + 1), masses)


# =============================================================================
# LOGIT PD CURVE
# =============================================================================

@dataclass(frozen=True)
class LogitPdCurve:
    """P[D | S = s] = 1 / (1 + exp(intercept + slope * s))"""

    intercept: float
    slope: float
    scale: RatingScale

    def __post_init__(self):
        if not (math.isfinite(self.intercept) and math.isfinite(self.slope)):
            raise InvalidArgumentError("logit parameters must be finite")
        if self.slope < 0.0:
            raise InvalidArgumentError(f"slope must be >= 0 so PDs do not rise with the grade, got {self.slope}")

    def pds(self):
        grades = np.arange(1, self.scale.k + 1)
        return special.expit(-(self.intercept + self.slope * grades))

    def to_pd_curve(self):
        return PdCurve(self.scale, self.pds())


def logit_pd(curve, grade):
    grade = curve.scale.check_grade(grade)
    return float(special.expit(-(curve.intercept + curve.slope * grade)))


# =============================================================================
# QUASI-MOMENT MATCHING
# =============================================================================

class _QuasiMomentProblem:
    """PD and AR of a logit curve on a fixed profile, as functions of (a, b)"""

    def __init__(self, profile, target_pd):
        self.profile = profile
        self.target_pd = target_pd
        self.grades = np.arange(1, profile.scale.k + 1)
        self.base_intercept = math.log((1.0 - target_pd) / target_pd)

    def curve(self, intercept, slope):
        pds = special.expit(-(intercept + slope * self.grades))
        return PdCurve(self.profile.scale, pds)

    def pd_gap(self, intercept, slope):
        pds = special.expit(-(intercept + slope * self.grades))
        return float(self.profile.masses @ pds) - self.target_pd

    def intercept_for(self, slope):
        """PD is strictly decreasing in the intercept"""
        if slope == 0.0:
            return self.base_intercept
        lo = self.base_intercept - INTERCEPT_MARGIN - slope * self.profile.scale.k
        hi = self.base_intercept + INTERCEPT_MARGIN
        return find_root(lambda a: self.pd_gap(a, slope), lo, hi, tol=1e-13)

    def ar_at(self, slope):
        intercept = self.intercept_for(slope)
        return accuracy_ratio_ex_ante(self.profile, self.curve(intercept, slope))


def quasi_moment_match(profile, target_pd, target_ar, tol=BRACKET_TOL):
    """Logit curve (a, b >= 0) whose implied PD and ex-ante AR hit the targets"""
    target_pd, target_ar = float(target_pd), float(target_ar)
    if not 0.0 < target_pd < 1.0:
        raise DomainError(f"target PD must lie in (0, 1), got {target_pd}")
    if not 0.0 <= target_ar < 1.0:
        raise DomainError(f"target AR must lie in [0, 1), got {target_ar}")

    problem = _QuasiMomentProblem(profile, target_pd)
    if target_ar == 0.0:
        return LogitPdCurve(problem.base_intercept, 0.0, profile.scale)

    hi = SLOPE_BRACKET
    ar_hi = problem.ar_at(hi)
    while ar_hi < target_ar and hi < MAX_SLOPE:
        hi *= 2.0
        ar_hi = problem.ar_at(hi)
        logger.debug("expanded slope bracket to %g (AR %.9f)", hi, ar_hi)
    if ar_hi < target_ar:
        raise CalibrationInfeasibleError(target_ar, ar_hi)

    slope = find_root(lambda b: problem.ar_at(b) - target_ar, 0.0, hi, tol=tol)
    intercept = problem.intercept_for(slope)
    fitted = LogitPdCurve(intercept, slope, profile.scale)

    curve = fitted.to_pd_curve()
    pd_error = abs(unconditional_pd(profile, curve) - target_pd)
    ar_error = abs(accuracy_ratio_ex_ante(profile, curve) - target_ar)
    if pd_error > TARGET_TOL or ar_error > TARGET_TOL:
        raise NumericError(
            f"calibration missed its targets (PD error {pd_error:.2e}, AR error {ar_error:.2e})"
        )
    logger.info("fitted logit curve a=%.9f b=%.9f for PD %.6f / AR %.6f",
                intercept, slope, target_pd, target_ar)
    return fitted


def attainable_ar_supremum(profile, target_pd):
    """Ex-ante AR at the steepest slope the solver will try"""
    return _QuasiMomentProblem(profile, float(target_pd)).ar_at(MAX_SLOPE)
