"""
OVERRIDERADAR - Rating model core
Rating scale, rating profile, PD curve and the grade distributions conditional
on default / survival, plus the discrete accuracy ratio.

Convention: grades run 1..k and high grades mean high creditworthiness, so a
well-ordered model puts defaulters in low grades.
"""

import math
from dataclasses import dataclass

import numpy as np

from errors import DegeneratePortfolioError, InvalidArgumentError, UndefinedGradeError

# Tolerance for probability vectors read from files (CSV round-off)
SUM_TOLERANCE = 1e-9
NEGATIVE_TOLERANCE = 1e-12


def _probability_vector(values, name, sums_to_one=True, normalize=True):
    """Validated read-only float array; optionally renormalized to sum to 1"""
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    if np.any(arr < -NEGATIVE_TOLERANCE) or np.any(arr > 1.0 + NEGATIVE_TOLERANCE):
        raise InvalidArgumentError(f"{name} values must lie in [0, 1]")
    arr = np.clip(arr, 0.0, 1.0)
    if sums_to_one:
        total = arr.sum()
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise InvalidArgumentError(f"{name} must sum to 1, sums to {total:.12g}")
        if normalize:
            arr = arr / total
    arr.flags.writeable = False
    return arr


# =============================================================================
# DATA MODEL
# =============================================================================

@dataclass(frozen=True)
class RatingScale:
    """k performing grades, numbered 1..k"""

    k: int

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 2:
            raise InvalidArgumentError(f"a rating scale needs k >= 2 grades, got {self.k!r}")

    @property
    def grades(self):
        return range(1, self.k + 1)

    def __contains__(self, grade):
        return isinstance(grade, (int, np.integer)) and 1 <= grade <= self.k

    def check_grade(self, grade):
        if grade not in self:
            raise InvalidArgumentError(f"grade {grade!r} is outside the scale 1..{self.k}")
        return int(grade)


@dataclass(frozen=True, eq=False)
class RatingProfile:
    """Unconditional grade distribution P[S = s]"""

    scale: RatingScale
    masses: np.ndarray

    def __post_init__(self):
        masses = _probability_vector(self.masses, "rating profile")
        if masses.size != self.scale.k:
            raise InvalidArgumentError(
                f"rating profile has {masses.size} masses for a {self.scale.k}-grade scale"
            )
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_masses(cls, masses):
        return cls(RatingScale(len(masses)), masses)

    def mass(self, grade):
        return float(self.masses[self.scale.check_grade(grade) - 1])


@dataclass(frozen=True, eq=False)
class PdCurve:
    """PDs conditional on the grade, P[D | S = s]"""

    scale: RatingScale
    pds: np.ndarray

    def __post_init__(self):
        pds = _probability_vector(self.pds, "PD curve", sums_to_one=False)
        if pds.size != self.scale.k:
            raise InvalidArgumentError(
                f"PD curve has {pds.size} values for a {self.scale.k}-grade scale"
            )
        object.__setattr__(self, "pds", pds)

    @classmethod
    def from_values(cls, pds):
        return cls(RatingScale(len(pds)), pds)

    def pd(self, grade):
        return float(self.pds[self.scale.check_grade(grade) - 1])

    @property
    def is_nonincreasing(self):
        return bool(np.all(np.diff(self.pds) <= 1e-15))


@dataclass(frozen=True, eq=False)
class ConditionalDistributions:
    """Grade distributions given default (lik_default) and survival (lik_survive)"""

    scale: RatingScale
    lik_default: np.ndarray
    lik_survive: np.ndarray
    p: float

    def __post_init__(self):
        lik_d = _probability_vector(self.lik_default, "default likelihood", normalize=False)
        lik_n = _probability_vector(self.lik_survive, "survival likelihood", normalize=False)
        if lik_d.size != self.scale.k or lik_n.size != self.scale.k:
            raise InvalidArgumentError("conditional distributions do not match the rating scale")
        p = float(self.p)
        if not 0.0 < p < 1.0:
            raise DegeneratePortfolioError(f"unconditional PD must lie in (0, 1), got {p}")
        object.__setattr__(self, "lik_default", lik_d)
        object.__setattr__(self, "lik_survive", lik_n)
        object.__setattr__(self, "p", p)

    @classmethod
    def normalized(cls, scale, default_weights, survive_weights, p):
        """Build from unnormalized nonnegative weights (e.g. grade counts)"""
        d = np.asarray(default_weights, dtype=float)
        n = np.asarray(survive_weights, dtype=float)
        if d.sum() <= 0 or n.sum() <= 0:
            raise DegeneratePortfolioError("both outcome classes need positive total weight")
        return cls(scale, d / d.sum(), n / n.sum(), p)

    @property
    def cdf_default(self):
        return np.cumsum(self.lik_default)

    @property
    def cdf_survive(self):
        return np.cumsum(self.lik_survive)


def _check_same_scale(profile, curve):
    if profile.scale != curve.scale:
        raise InvalidArgumentError(
            f"profile has {profile.scale.k} grades but the PD curve has {curve.scale.k}"
        )


# =============================================================================
# BAYES RELATIONS
# =============================================================================

def unconditional_pd(profile, curve):
    """p = sum_s P[D | S=s] P[S=s]"""
    _check_same_scale(profile, curve)
    return float(profile.masses @ curve.pds)


def bayes_invert(profile, curve):
    """Conditional grade distributions from the rating profile and the PD curve"""
    p = unconditional_pd(profile, curve)
    if not 0.0 < p < 1.0:
        raise DegeneratePortfolioError(
            f"unconditional PD is {p}; inversion needs a portfolio with defaults and survivors"
        )
    lik_default = curve.pds * profile.masses / p
    lik_survive = (1.0 - curve.pds) * profile.masses / (1.0 - p)
    return ConditionalDistributions(profile.scale, lik_default, lik_survive, p)


def conditional_pd(cond, grade):
    """Bayes posterior P[D | S = grade]"""
    i = cond.scale.check_grade(grade) - 1
    weighted_default = cond.p * cond.lik_default[i]
    denominator = weighted_default + (1.0 - cond.p) * cond.lik_survive[i]
    if denominator <= 0.0:
        raise UndefinedGradeError(f"grade {grade} carries no probability mass")
    return float(weighted_default / denominator)


def conditional_pds(cond):
    """Posterior PD for every grade; NaN where the grade has no mass"""
    weighted_default = cond.p * cond.lik_default
    denominator = weighted_default + (1.0 - cond.p) * cond.lik_survive
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(denominator > 0.0, weighted_default / denominator, np.nan)


def profile_from_conditionals(cond):
    """Mixture p * lik_default + (1 - p) * lik_survive"""
    masses = cond.p * cond.lik_default + (1.0 - cond.p) * cond.lik_survive
    return RatingProfile(cond.scale, masses)


def conditionals_from_outcomes(grades, defaulted, scale):
    """Empirical conditional distributions from observed (grade, default) pairs"""
    grades = np.asarray(grades, dtype=int)
    defaulted = np.asarray(defaulted, dtype=bool)
    if grades.size and (grades.min() < 1 or grades.max() > scale.k):
        raise InvalidArgumentError(f"observed grades outside the scale 1..{scale.k}")
    default_counts = np.bincount(grades[defaulted] - 1, minlength=scale.k)
    survive_counts = np.bincount(grades[~defaulted] - 1, minlength=scale.k)
    p = defaulted.mean() if defaulted.size else math.nan
    return ConditionalDistributions.normalized(scale, default_counts, survive_counts, p)


# =============================================================================
# ACCURACY RATIO
# =============================================================================

def _mass_below(weights):
    """sum over t < s of weights[t], for each s"""
    return np.concatenate(([0.0], np.cumsum(weights)[:-1]))


def accuracy_ratio(cond):
    """AR = 2 P[S_D < S_N] + P[S_D = S_N] - 1, tie term included"""
    lower = cond.lik_survive @ _mass_below(cond.lik_default)
    ties = cond.lik_default @ cond.lik_survive
    return float(np.clip(2.0 * lower + ties - 1.0, -1.0, 1.0))


def accuracy_ratio_ex_ante(profile, curve):
    """AR predicted from the rating profile and PD curve alone"""
    p = unconditional_pd(profile, curve)
    if not 0.0 < p < 1.0:
        raise DegeneratePortfolioError(f"unconditional PD is {p}; the ex-ante AR is undefined")
    default_mass = curve.pds * profile.masses
    survive_mass = (1.0 - curve.pds) * profile.masses
    lower = survive_mass @ _mass_below(default_mass)
    ties = default_mass @ survive_mass
    return float(np.clip((2.0 * lower + ties) / (p * (1.0 - p)) - 1.0, -1.0, 1.0))
