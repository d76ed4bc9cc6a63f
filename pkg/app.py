#!/usr/bin/env python3
"""
OVERRIDERADAR API - Natural error rate and override monitoring over HTTP

A small Flask JSON service exposing the same computations as the command line:
bounds, calibration, monitoring reports and the reference grids.
"""

import logging

from flask import Flask, jsonify, request

import config
import repro
from calibration import CorrelatedBinomialParams, correlated_binomial_profile, quasi_moment_match
from data_files import parse_record
from error_rate import natural_error_rate_from_ar, summarize_model
from errors import InvalidArgumentError, OverrideRadarError
from monitoring import MonitoringConfig, OverridePolicy, assess
from rating_core import PdCurve, RatingProfile, accuracy_ratio_ex_ante, unconditional_pd

app = Flask(__name__)
logger = logging.getLogger(__name__)

DEFAULT_PORT = 5051


# =============================================================================
# Helpers
# =============================================================================

def _payload():
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise InvalidArgumentError("request body must be a JSON object")
    return data


def _number(data, key, default=None, kind=float):
    value = data.get(key, default)
    if value is None:
        raise InvalidArgumentError(f"missing field '{key}'")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"field '{key}' must be a number, got {value!r}")


def _model(data):
    """Profile and PD curve from 'profile' / 'pd_curve' lists, or (None, None)"""
    if "profile" not in data and "pd_curve" not in data:
        return None, None
    if "profile" not in data or "pd_curve" not in data:
        raise InvalidArgumentError("'profile' and 'pd_curve' go together")
    return RatingProfile.from_masses(data["profile"]), PdCurve.from_values(data["pd_curve"])


@app.errorhandler(OverrideRadarError)
def handle_error(e):
    return jsonify({"error": str(e), "kind": e.kind}), 400


# =============================================================================
# Routes
# =============================================================================

@app.route("/api/bound")
def bound_from_ar():
    """
    Natural error rate from an accuracy ratio

    Query params:
        ar: accuracy ratio, -1 < ar < 1 (required)
    """
    ar = _number(request.args, "ar")
    return jsonify({"ar": ar, "natural_error_rate": natural_error_rate_from_ar(ar)})


@app.route("/api/bound/model", methods=["POST"])
def bound_from_model():
    """Model summary for {"profile": [...], "pd_curve": [...]}"""
    profile, curve = _model(_payload())
    if profile is None:
        raise InvalidArgumentError("'profile' and 'pd_curve' are required")
    return jsonify(summarize_model(profile, curve).to_dict())


@app.route("/api/calibrate", methods=["POST"])
def calibrate():
    """Fit a logit PD curve: {"pd", "ar", "grades"=17, "lambda"=0.55, "rho"=0.1}"""
    data = _payload()
    params = CorrelatedBinomialParams(
        k_trials=_number(data, "grades", 17, int) - 1,
        lam=_number(data, "lambda", 0.55),
        rho=_number(data, "rho", 0.1),
    )
    profile = correlated_binomial_profile(params)
    fitted = quasi_moment_match(profile, _number(data, "pd"), _number(data, "ar"))
    curve = fitted.to_pd_curve()
    return jsonify({
        "intercept": fitted.intercept,
        "slope": fitted.slope,
        "pd": unconditional_pd(profile, curve),
        "ar": accuracy_ratio_ex_ante(profile, curve),
        "profile": profile.masses.tolist(),
        "pd_curve": curve.pds.tolist(),
    })


@app.route("/api/monitor", methods=["POST"])
def monitor():
    """
    Monitoring report for a batch of rating actions

    Body: {"records": [...], "profile" + "pd_curve" or "ar", "policy": {...}, "tolerances": {...}}
    """
    data = _payload()
    profile, curve = _model(data)
    ar = data.get("ar")
    if profile is None and ar is None:
        raise InvalidArgumentError("give either 'profile' and 'pd_curve' or 'ar'")

    rows = data.get("records") or []
    records, problems = [], []
    for i, row in enumerate(rows):
        if not isinstance(row, dict):
            problems.append(f"record {i}: not an object")
            continue
        try:
            records.append(parse_record(row, profile.scale if profile else None))
        except ValueError as e:
            problems.append(f"record {i}: {e}")

    policy_data = data.get("policy") or {}
    try:
        policy = OverridePolicy(
            no_override_at_or_above=policy_data.get("no_override_at_or_above"),
            min_band=policy_data.get("min_band"),
            downgrade_only=bool(policy_data.get("downgrade_only", False)),
        )
        tolerances = MonitoringConfig.from_env(**(data.get("tolerances") or {}))
    except TypeError as e:
        raise InvalidArgumentError(f"bad policy or tolerances: {e}")

    report = assess(records, profile=profile, curve=curve, policy=policy,
                    tolerance_config=tolerances, accuracy_ratio=None if profile else _number(data, "ar"))
    result = report.to_dict()
    result["skipped_records"] = problems
    return jsonify(result)


@app.route("/api/repro/<target>")
def reproduce(target):
    """Reference grid as a list of rows (NaN becomes null)"""
    df = repro.reproduce(target)
    return app.response_class(df.to_json(orient="records"), mimetype="application/json")


@app.route("/health")
def health():
    """Health check endpoint"""
    return jsonify({"status": "ok", "app": "overrideradar"})


# =============================================================================
# Main
# =============================================================================

if __name__ == "__main__":
    config.configure_logging()
    app.run(debug=False, port=DEFAULT_PORT)
