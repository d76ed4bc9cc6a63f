"""
OVERRIDERADAR - Reproduction grids
Natural error rate tables and figure data for the correlated binomial example
profile (16 trials, lambda 0.55, rho 0.1) with logit PD curves.

Every target returns a pandas DataFrame; the CLI prints it as CSV.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from functools import lru_cache

import numpy as np
import pandas as pd

import config
from calibration import CorrelatedBinomialParams, correlated_binomial_profile, quasi_moment_match
from error_rate import (
    natural_error_rate, natural_error_rate_from_ar, super_grade_pds, super_grade_pds_binormal,
)
from errors import CalibrationInfeasibleError, InvalidArgumentError, SplitDegenerateError
from rating_core import bayes_invert

logger = logging.getLogger(__name__)

EXAMPLE_PARAMS = CorrelatedBinomialParams(k_trials=16, lam=0.55, rho=0.1)

TABLE2_PDS = (0.01, 0.10)
TABLE3_PD = 0.01
FIGURE_PD = 0.05
FIGURE_ARS = (0.25, 0.75)

TABLE_AR_GRID = tuple(round(0.1 * i, 1) for i in range(10))
# stands in for AR -> 0+ where the flat curve makes every grade safe
LIMIT_AR = 1e-6
FINE_AR_GRID = tuple(round(0.01 * i, 2) for i in range(100))

TARGETS = ("table2", "table3", "fig1", "fig2", "fig3")


@lru_cache(maxsize=None)
def example_profile():
    return correlated_binomial_profile(EXAMPLE_PARAMS)


@lru_cache(maxsize=None)
def example_curve(pd_target, ar_target):
    """Logit PD curve on the example profile fitted to (PD, AR)"""
    return quasi_moment_match(example_profile(), pd_target, ar_target).to_pd_curve()


def _run_grid(fn, points):
    """fn over every grid point in a thread pool; results keep the grid order"""
    results = [None] * len(points)
    with ThreadPoolExecutor(max_workers=max(1, config.REPRO_WORKERS)) as executor:
        futures = {executor.submit(fn, point): i for i, point in enumerate(points)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return results


def _pct(ar):
    return int(round(ar * 100))


# =============================================================================
# TABLES
# =============================================================================

def _discrete_error_rate(pd_target, ar):
    try:
        return natural_error_rate(example_profile(), example_curve(pd_target, ar))
    except CalibrationInfeasibleError as e:
        logger.warning("AR %.2f not attainable at PD %.2f (supremum %.6f)", ar, pd_target, e.supremum)
        return np.nan


def _error_rate_row(ar):
    row = {"ar": ar, "binormal": natural_error_rate_from_ar(ar)}
    for pd_target in TABLE2_PDS:
        row[f"discrete_pd_{_pct(pd_target)}pct"] = _discrete_error_rate(pd_target, ar)
    for pd_target in TABLE2_PDS:
        key = f"discrete_pd_{_pct(pd_target)}pct"
        row[f"{key}_limit"] = _discrete_error_rate(pd_target, LIMIT_AR) if ar == 0.0 else row[key]
    return row


def table2():
    """Natural error rate by accuracy ratio: binormal and discrete at PD 1% / 10%.

    The ``*_limit`` columns repeat the discrete values except at AR = 0, where
    they hold the right-hand limit instead of p.
    """
    return pd.DataFrame(_run_grid(_error_rate_row, TABLE_AR_GRID))


def _super_grade_row(ar):
    binormal_risky, binormal_safe = super_grade_pds_binormal(TABLE3_PD, ar)
    try:
        discrete_risky, discrete_safe = super_grade_pds(example_profile(), example_curve(TABLE3_PD, ar))
    except SplitDegenerateError:
        # Flat curve: one super-grade holding the whole portfolio at PD p
        discrete_risky = discrete_safe = TABLE3_PD
    return {
        "ar_pct": _pct(ar),
        "binormal_safe_pd_pct": 100.0 * binormal_safe,
        "binormal_risky_pd_pct": 100.0 * binormal_risky,
        "discrete_safe_pd_pct": 100.0 * discrete_safe,
        "discrete_risky_pd_pct": 100.0 * discrete_risky,
    }


def table3():
    """Average PDs of the safe and risky super-grades at p = 1%, in percent"""
    return pd.DataFrame(_run_grid(_super_grade_row, TABLE_AR_GRID))


# =============================================================================
# FIGURE DATA
# =============================================================================

def fig1():
    """Rating profile and the grade distributions given default / survival"""
    profile = example_profile()
    data = {"grade": list(profile.scale.grades), "unconditional": profile.masses}
    for ar in FIGURE_ARS:
        cond = bayes_invert(profile, example_curve(FIGURE_PD, ar))
        data[f"default_ar_{_pct(ar)}"] = cond.lik_default
        data[f"survive_ar_{_pct(ar)}"] = cond.lik_survive
    return pd.DataFrame(data)


def fig2():
    """Natural error rate curves on a 0.01 AR grid"""
    return pd.DataFrame(_run_grid(_error_rate_row, FINE_AR_GRID))


def fig3():
    """Fitted PD curves at p = 5%"""
    profile = example_profile()
    data = {"grade": list(profile.scale.grades)}
    for ar in FIGURE_ARS:
        data[f"pd_ar_{_pct(ar)}"] = example_curve(FIGURE_PD, ar).pds
    return pd.DataFrame(data)


def reproduce(target):
    builders = {"table2": table2, "table3": table3, "fig1": fig1, "fig2": fig2, "fig3": fig3}
    if target not in builders:
        raise InvalidArgumentError(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
    logger.info("reproducing %s", target)
    return builders[target]()
