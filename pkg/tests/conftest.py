import os
import sys
from datetime import date, timedelta

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from monitoring import OverrideRecord  # noqa: E402
from rating_core import PdCurve, RatingProfile  # noqa: E402

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
SAMPLE_DATA = os.path.join(ROOT, "sample_data")


@pytest.fixture
def three_grade_profile():
    return RatingProfile.from_masses([0.2, 0.5, 0.3])


@pytest.fixture
def three_grade_curve():
    return PdCurve.from_values([0.10, 0.05, 0.01])


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def sample_path():
    def _path(name):
        return os.path.join(SAMPLE_DATA, name)
    return _path


def random_model(rng, k, monotone=False):
    """Random profile with full support and a PD curve strictly inside (0, 1)"""
    masses = rng.dirichlet(np.ones(k))
    masses = 0.5 * masses + 0.5 / k
    pds = rng.uniform(0.001, 0.6, size=k)
    if monotone:
        pds = np.sort(pds)[::-1]
    return RatingProfile.from_masses(masses / masses.sum()), PdCurve.from_values(pds)


def make_records(proposed, final, defaults=None, start=date(2024, 1, 1)):
    defaults = defaults if defaults is not None else [None] * len(proposed)
    return [
        OverrideRecord(
            borrower_id=f"B{i:05d}",
            rating_date=start + timedelta(days=i % 365),
            proposed_grade=int(g_star),
            final_grade=int(g),
            default_within_period=None if z is None else bool(z),
        )
        for i, (g_star, g, z) in enumerate(zip(proposed, final, defaults))
    ]
