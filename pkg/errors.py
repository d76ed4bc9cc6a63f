"""
OVERRIDERADAR - Error types
Every failure the library raises maps to one CLI exit code.
"""


class OverrideRadarError(ValueError):
    """Base class for all expected (input or numeric) failures"""

    exit_code = 2
    kind = "error"


class InvalidArgumentError(OverrideRadarError):
    kind = "invalid-argument"


class DomainError(OverrideRadarError):
    kind = "domain"


class DegeneratePortfolioError(OverrideRadarError):
    kind = "degenerate-portfolio"


class UndefinedGradeError(OverrideRadarError):
    kind = "undefined-grade"


class SplitDegenerateError(OverrideRadarError):
    """Risky or safe super-grade is empty.

    ``risky_pd`` / ``safe_pd`` hold the unconditional PD on the side that is
    populated and None on the empty side.
    """

    kind = "split-degenerate"

    def __init__(self, message, risky_pd=None, safe_pd=None):
        super().__init__(message)
        self.risky_pd = risky_pd
        self.safe_pd = safe_pd


class EmptyInputError(OverrideRadarError):
    kind = "empty-input"


class InsufficientOutcomesError(OverrideRadarError):
    kind = "insufficient-outcomes"


class InputFileError(OverrideRadarError):
    """File could not be parsed; ``problems`` lists 'line N: ...' entries"""

    kind = "input-file"

    def __init__(self, path, problems):
        self.path = str(path)
        self.problems = list(problems)
        lines = "\n".join(f"  {p}" for p in self.problems)
        super().__init__(f"{self.path}: {len(self.problems)} problem(s)\n{lines}")


class CalibrationInfeasibleError(OverrideRadarError):
    exit_code = 3
    kind = "calibration-infeasible"

    def __init__(self, target_ar, supremum):
        self.target_ar = target_ar
        self.supremum = supremum
        super().__init__(
            f"target AR {target_ar:.6f} is not attainable on this profile "
            f"(attainable supremum {supremum:.6f})"
        )


class NumericError(OverrideRadarError):
    exit_code = 4
    kind = "numeric"


class BracketingError(NumericError):
    kind = "bracketing"
