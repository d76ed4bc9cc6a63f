#!/usr/bin/env python3
"""
OVERRIDERADAR - Command line

  overrideradar bound from-ar --ar 0.5
  overrideradar bound from-model --profile profile.csv --curve pd_curve.csv
  overrideradar calibrate --pd 0.05 --ar 0.75 --grades 17 --out pd_curve.csv
  overrideradar monitor --records overrides.csv --profile profile.csv --curve pd_curve.csv
  overrideradar monitor --records overrides.csv --ar 0.5 --downgrade-only
  overrideradar repro table2

Exit codes: 0 ok (breach findings included), 2 bad input, 3 infeasible
calibration, 4 numeric failure.
"""

import json
import logging

import click

import config
import data_files
import repro
from calibration import CorrelatedBinomialParams, correlated_binomial_profile, quasi_moment_match
from error_rate import natural_error_rate_from_ar, summarize_model
from errors import OverrideRadarError
from monitoring import MonitoringConfig, OverridePolicy, assess, format_report_block
from rating_core import accuracy_ratio_ex_ante, unconditional_pd

logger = logging.getLogger(__name__)

DECIMALS = 6


def _round(value):
    if isinstance(value, float):
        return round(value, DECIMALS)
    if isinstance(value, (list, tuple)):
        return [_round(v) for v in value]
    if isinstance(value, dict):
        return {k: _round(v) for k, v in value.items()}
    return value


def _text(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.{DECIMALS}f}"
    if isinstance(value, (list, tuple)):
        return " ".join(_text(v) for v in value)
    return str(value)


def emit(fields, fmt):
    """Print an ordered mapping as 'key: value' lines, a one-row CSV or JSON"""
    if fmt == "json":
        click.echo(json.dumps(_round(fields), indent=2))
    elif fmt == "csv":
        click.echo(",".join(fields))
        click.echo(",".join(_text(v) for v in fields.values()))
    else:
        for key, value in fields.items():
            click.echo(f"{key}: {_text(value) or 'N/A'}")


def emit_frame(df, fmt):
    if fmt == "json":
        click.echo(df.round(DECIMALS).to_json(orient="records", double_precision=DECIMALS))
    elif fmt == "csv":
        click.echo(df.to_csv(index=False, float_format=f"%.{DECIMALS}f", lineterminator="\n"), nl=False)
    else:
        click.echo(df.to_string(index=False, float_format=lambda x: f"{x:.{DECIMALS}f}"))


format_option = click.option(
    "--format", "fmt", type=click.Choice(["plain", "csv", "json"]), default="plain", show_default=True,
    help="Output format (values are identical in every format)",
)


class RadarGroup(click.Group):
    """Turns library errors into 'Error: ...' on stderr plus their exit code"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except OverrideRadarError as e:
            logger.debug("%s failed", ctx.invoked_subcommand, exc_info=True)
            click.echo(f"Error: {e}", err=True)
            ctx.exit(e.exit_code)


@click.group(cls=RadarGroup)
@click.option("--log-level", default=None, help="Overrides OVERRIDERADAR_LOG_LEVEL")
def cli(log_level):
    """Natural error rate of a rating model and override-rate monitoring."""
    config.configure_logging(log_level)


# =============================================================================
# BOUND
# =============================================================================

@cli.group()
def bound():
    """Natural error rate (the override-rate bound)."""


@bound.command("from-ar")
@click.option("--ar", type=float, required=True, help="Accuracy ratio, -1 < AR < 1")
@format_option
def bound_from_ar(ar, fmt):
    """Binormal natural error rate implied by an accuracy ratio."""
    rate = natural_error_rate_from_ar(ar)
    if fmt == "plain":
        click.echo(_text(rate))
    else:
        emit({"ar": ar, "natural_error_rate": rate}, fmt)


@bound.command("from-model")
@click.option("--profile", "profile_path", type=click.Path(), required=True, help="grade,probability CSV")
@click.option("--curve", "curve_path", type=click.Path(), required=True, help="grade,pd CSV")
@format_option
def bound_from_model(profile_path, curve_path, fmt):
    """Natural error rate inferred from a rating profile and PD curve."""
    profile = data_files.load_profile(profile_path)
    curve = data_files.load_pd_curve(curve_path)
    summary = summarize_model(profile, curve)
    emit({
        "p": summary.p,
        "accuracy_ratio": summary.accuracy_ratio,
        "natural_error_rate": summary.natural_error_rate,
        "risky_grades": list(summary.risky_grades),
        "safe_grades": list(summary.safe_grades),
        "risky_pd": summary.risky_pd,
        "safe_pd": summary.safe_pd,
        "ks": summary.ks,
        "threshold_grade": summary.threshold_grade,
    }, fmt)


# =============================================================================
# CALIBRATE
# =============================================================================

@cli.command()
@click.option("--pd", "target_pd", type=float, required=True, help="Target unconditional PD")
@click.option("--ar", "target_ar", type=float, required=True, help="Target accuracy ratio, 0 <= AR < 1")
@click.option("--grades", type=int, default=17, show_default=True, help="Number of grades (trials + 1)")
@click.option("--lambda", "lam", type=float, default=0.55, show_default=True)
@click.option("--rho", type=float, default=0.1, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True, help="PD curve CSV to write")
@click.option("--profile-out", type=click.Path(), default=None, help="Also write the rating profile CSV")
@format_option
def calibrate(target_pd, target_ar, grades, lam, rho, out_path, profile_out, fmt):
    """Fit a logit PD curve to a target PD and accuracy ratio."""
    params = CorrelatedBinomialParams(k_trials=grades - 1, lam=lam, rho=rho)
    profile = correlated_binomial_profile(params)
    fitted = quasi_moment_match(profile, target_pd, target_ar)
    curve = fitted.to_pd_curve()

    data_files.write_pd_curve(curve, out_path)
    if profile_out:
        data_files.write_profile(profile, profile_out)

    emit({
        "intercept": fitted.intercept,
        "slope": fitted.slope,
        "pd": unconditional_pd(profile, curve),
        "ar": accuracy_ratio_ex_ante(profile, curve),
        "curve_out": out_path,
        "profile_out": profile_out,
    }, fmt)


# =============================================================================
# MONITOR
# =============================================================================

@cli.command()
@click.option("--records", "records_path", type=click.Path(), required=True, help="Override log (CSV or XLSX)")
@click.option("--profile", "profile_path", type=click.Path(), default=None)
@click.option("--curve", "curve_path", type=click.Path(), default=None)
@click.option("--ar", type=float, default=None, help="Bound from an accuracy ratio instead of profile + curve")
@click.option("--k-star", type=int, default=None, help="No overrides at or above this proposed grade")
@click.option("--min-band", type=int, default=None, help="Overrides must move at least this many notches")
@click.option("--downgrade-only", is_flag=True, default=False)
@click.option("--bound-slack", type=float, default=None)
@click.option("--ar-tolerance", type=float, default=None, help="Allowed drop of AR after overrides")
@click.option("--imbalance-share", type=float, default=None, help="Minority direction share flagged below")
@click.option("--imbalance-min", type=int, default=None, help="Overrides needed before flagging imbalance")
@format_option
def monitor(records_path, profile_path, curve_path, ar, k_star, min_band, downgrade_only,
            bound_slack, ar_tolerance, imbalance_share, imbalance_min, fmt):
    """Assess an override log against the natural error rate."""
    if (profile_path is None) != (curve_path is None):
        raise click.UsageError("--profile and --curve go together")
    if profile_path is None and ar is None:
        raise click.UsageError("give either --profile/--curve or --ar")

    profile = curve = scale = None
    if profile_path is not None:
        profile = data_files.load_profile(profile_path)
        curve = data_files.load_pd_curve(curve_path)
        scale = profile.scale

    records, problems = data_files.load_override_records(records_path, scale)
    for problem in problems:
        click.echo(f"Warning: {records_path}: {problem} (row skipped)", err=True)

    policy = OverridePolicy(no_override_at_or_above=k_star, min_band=min_band, downgrade_only=downgrade_only)
    cfg = MonitoringConfig.from_env(
        bound_slack=bound_slack,
        ar_drop_tolerance=ar_tolerance,
        imbalance_minority_share=imbalance_share,
        imbalance_min_overrides=imbalance_min,
    )
    report = assess(records, profile=profile, curve=curve, policy=policy,
                    tolerance_config=cfg, accuracy_ratio=ar if profile is None else None)

    if fmt == "plain":
        click.echo(format_report_block(report))
    elif fmt == "json":
        data = report.to_dict()
        data["skipped_rows"] = problems
        click.echo(json.dumps(_round(data), indent=2))
    else:
        emit({
            "n_actions": report.n_actions,
            "n_overrides": report.n_overrides,
            "override_rate": report.override_rate,
            "natural_error_rate": report.natural_error_rate,
            "bound_source": report.bound_source,
            "bound_breached": report.bound_breached,
            "n_upgrades": report.n_upgrades,
            "n_downgrades": report.n_downgrades,
            "ar_ex_ante": report.ar_ex_ante,
            "ar_pre": report.ar_pre,
            "ar_post": report.ar_post,
            "natural_error_rate_ex_post": report.natural_error_rate_ex_post,
            "n_policy_violations": len(report.policy_violations),
            "verdicts": [v.value for v in report.verdict_codes],
        }, fmt)


# =============================================================================
# REPRO
# =============================================================================

@cli.command("repro")
@click.argument("target", type=click.Choice(repro.TARGETS))
@click.option("--format", "fmt", type=click.Choice(["plain", "csv", "json"]), default="csv", show_default=True)
def repro_command(target, fmt):
    """Emit a reference table or figure grid."""
    emit_frame(repro.reproduce(target), fmt)


def main():
    cli(prog_name="overrideradar")


if __name__ == "__main__":
    main()
