"""
OVERRIDERADAR - Data files
Rating profile, PD curve and override log readers/writers.

  profile CSV   grade,probability
  PD curve CSV  grade,pd
  override log  borrower_id,rating_date,proposed_grade,final_grade,reason_code,default_within_period
                (CSV, or an .xlsx/.xls workbook with the same columns)
"""

import logging
from datetime import datetime
from pathlib import Path

import pandas as pd

from errors import EmptyInputError, InputFileError, OverrideRadarError
from monitoring import OverrideRecord
from rating_core import PdCurve, RatingProfile, RatingScale

logger = logging.getLogger(__name__)

PROFILE_COLUMNS = ["grade", "probability"]
CURVE_COLUMNS = ["grade", "pd"]
RECORD_COLUMNS = [
    "borrower_id", "rating_date", "proposed_grade", "final_grade",
    "reason_code", "default_within_period",
]

TRUE_FLAGS = {"1", "true", "yes", "y", "d"}
FALSE_FLAGS = {"0", "false", "no", "n"}
DATE_FORMATS = ("%Y-%m-%d", "%Y-%m-%d %H:%M:%S")

# Enough digits that values survive a write/read round trip
FLOAT_FORMAT = "%.15g"


def _read_table(path):
    """All cells as stripped strings; line numbers follow the file (header = 1)"""
    path = Path(path)
    if not path.exists():
        raise InputFileError(path, [f"file not found: {path}"])
    try:
        if path.suffix.lower() in (".xlsx", ".xls"):
            df = pd.read_excel(path, dtype=str, keep_default_na=False)
        else:
            df = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except Exception as e:
        raise InputFileError(path, [f"could not read file: {e}"])
    df.columns = [str(c).strip().lower() for c in df.columns]
    for column in df.columns:
        df[column] = df[column].astype(str).str.strip()
    return df


def _require_columns(df, columns, path):
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise InputFileError(path, [f"line 1: missing column(s) {', '.join(missing)}; expected {','.join(columns)}"])


def _parse_int(value, name):
    try:
        number = float(value)
    except ValueError:
        raise ValueError(f"{name} {value!r} is not an integer")
    if not number.is_integer():
        raise ValueError(f"{name} {value!r} is not an integer")
    return int(number)


def _parse_float(value, name):
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"{name} {value!r} is not a number")


def _load_grade_table(path, value_column):
    df = _read_table(path)
    _require_columns(df, ["grade", value_column], path)
    problems, grades, values = [], [], []
    for i, row in enumerate(df.itertuples(index=False), start=2):
        row = row._asdict()
        try:
            grades.append(_parse_int(row["grade"], "grade"))
            values.append(_parse_float(row[value_column], value_column))
        except ValueError as e:
            problems.append(f"line {i}: {e}")
    if problems:
        raise InputFileError(path, problems)
    if len(grades) < 2:
        raise InputFileError(path, ["a rating scale needs at least two grade rows"])
    for i, grade in enumerate(grades, start=1):
        if grade != i:
            problems.append(f"line {i + 1}: expected grade {i}, found {grade} (grades must run 1..k ascending)")
    if problems:
        raise InputFileError(path, problems)
    return grades, values


def load_profile(path):
    _, masses = _load_grade_table(path, "probability")
    try:
        return RatingProfile(RatingScale(len(masses)), masses)
    except OverrideRadarError as e:
        raise InputFileError(path, [str(e)])


def load_pd_curve(path):
    _, pds = _load_grade_table(path, "pd")
    try:
        return PdCurve(RatingScale(len(pds)), pds)
    except OverrideRadarError as e:
        raise InputFileError(path, [str(e)])


def _parse_flag(value):
    if value == "":
        return None
    lowered = value.lower()
    if lowered in TRUE_FLAGS:
        return True
    if lowered in FALSE_FLAGS:
        return False
    raise ValueError(f"default flag {value!r} is not one of 1/0/true/false")


def _parse_date(value):
    # Excel date cells come through as 'YYYY-MM-DD 00:00:00'
    for fmt in DATE_FORMATS:
        try:
            return datetime.strptime(value, fmt).date()
        except ValueError:
            pass
    raise ValueError(f"rating_date {value!r} is not an ISO date (YYYY-MM-DD)")


def parse_record(row, scale=None):
    """OverrideRecord from one mapping of column -> value (file row or JSON object)"""
    row = {k: "" if v is None else str(v).strip() for k, v in row.items()}
    for column in RECORD_COLUMNS[:4]:
        row.setdefault(column, "")
    borrower_id = row["borrower_id"]
    if not borrower_id:
        raise ValueError("borrower_id is empty")
    rating_date = _parse_date(row["rating_date"])
    proposed = _parse_int(row["proposed_grade"], "proposed_grade")
    final = _parse_int(row["final_grade"], "final_grade")
    if scale is not None:
        for name, grade in (("proposed_grade", proposed), ("final_grade", final)):
            if grade not in scale:
                raise ValueError(f"{name} {grade} outside the scale 1..{scale.k}")
    elif proposed < 1 or final < 1:
        raise ValueError("grades must be positive integers")
    return OverrideRecord(
        borrower_id=borrower_id,
        rating_date=rating_date,
        proposed_grade=proposed,
        final_grade=final,
        reason_code=row.get("reason_code") or None,
        default_within_period=_parse_flag(row.get("default_within_period", "")),
    )


def load_override_records(path, scale=None):
    """Valid records plus 'line N: ...' notes for the rows that were skipped.

    Malformed rows do not stop the load; a file without any valid row does.
    """
    df = _read_table(path)
    _require_columns(df, RECORD_COLUMNS[:4], path)
    records, problems = [], []
    for i, row in enumerate(df.itertuples(index=False), start=2):
        try:
            records.append(parse_record(row._asdict(), scale))
        except ValueError as e:
            problems.append(f"line {i}: {e}")
            logger.warning("%s line %d skipped: %s", path, i, e)
    if not records:
        if problems:
            raise InputFileError(path, problems)
        raise EmptyInputError(f"{path}: no rating actions")
    return records, problems


# =============================================================================
# WRITERS
# =============================================================================

def profile_frame(profile):
    return pd.DataFrame({"grade": list(profile.scale.grades), "probability": profile.masses})


def pd_curve_frame(curve):
    return pd.DataFrame({"grade": list(curve.scale.grades), "pd": curve.pds})


def write_profile(profile, path):
    profile_frame(profile).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def write_pd_curve(curve, path):
    pd_curve_frame(curve).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def records_frame(records):
    return pd.DataFrame([{
        "borrower_id": r.borrower_id,
        "rating_date": r.rating_date.isoformat(),
        "proposed_grade": r.proposed_grade,
        "final_grade": r.final_grade,
        "reason_code": r.reason_code or "",
        "default_within_period": "" if r.default_within_period is None else int(r.default_within_period),
    } for r in records], columns=RECORD_COLUMNS)


def write_override_records(records, path):
    records_frame(records).to_csv(path, index=False)
