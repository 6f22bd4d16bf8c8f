import math

import numpy as np
import pytest
from scipy.optimize import brentq

from srb_response import (
    LAMBDA,
    HypothesisError,
    check_circle,
    check_sloped_line,
    kappa,
    min_iterate_for_slope,
)
from srb_response.cones import cone_gain


def kappa_oracle(m: int) -> float:
    """Independent root of (1+k)^2 sqrt(1+4k^2) = lambda^m via Brent's method."""
    return brentq(lambda k: cone_gain(k) - LAMBDA ** m, 0.0, LAMBDA ** (m / 3.0) + 1.0, xtol=1e-14)


@pytest.mark.parametrize("m", [1, 2, 3, 5, 10, 20, 30])
def test_kappa_matches_oracle(m):
    assert kappa(m) == pytest.approx(kappa_oracle(m), abs=1e-10)


def test_kappa_one_value():
    assert kappa(1) == pytest.approx(0.417557144757, abs=1e-9)


def test_kappa_residuals_and_monotonicity():
    for m in range(1, 31):
        assert abs(cone_gain(kappa(m)) - LAMBDA ** m) / LAMBDA ** m < 1e-12
    for m in range(1, 30):
        assert kappa(m + 1) > kappa(m)


def test_kappa_ten_exceeds_ten():
    # large-kappa asymptotics: 2 kappa^3 ~ lambda^10, so kappa(10) ~ 19
    assert kappa(10) > 10.0
    assert kappa(10) == pytest.approx(kappa_oracle(10), abs=1e-10)


def test_kappa_rejects_bad_m():
    with pytest.raises(ValueError):
        kappa(0)


@pytest.mark.parametrize("alpha, expected", [(0.0, 1), (0.4, 1), (0.42, 2)])
def test_min_iterate_small_slopes(alpha, expected):
    assert min_iterate_for_slope(alpha) == expected


def test_min_iterate_five():
    m = min_iterate_for_slope(5.0)
    assert kappa(m) > 5.0 and kappa(m - 1) <= 5.0
    # against the oracle sweep
    m_oracle = next(j for j in range(1, 50) if kappa_oracle(j) > 5.0)
    assert m == m_oracle == 7


def test_min_iterate_monotone_in_slope():
    slopes = np.linspace(0.0, 30.0, 40)
    values = [min_iterate_for_slope(a) for a in slopes]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert [min_iterate_for_slope(a) for a in slopes] == [
        min_iterate_for_slope(-a) for a in slopes
    ]


def test_min_iterate_rejects_nonfinite():
    with pytest.raises(ValueError):
        min_iterate_for_slope(math.inf)


@pytest.mark.parametrize("alpha", [0.0, 0.4, -2.3, 11.0])
def test_sloped_line_report(alpha):
    report = check_sloped_line(alpha)
    assert report.admissible
    assert report.slope_bound == abs(alpha)
    m = report.min_iterate
    assert kappa(m) > report.slope_bound
    assert m == 1 or kappa(m - 1) <= report.slope_bound


def test_circle_report():
    report = check_circle(0.2, 0.1)
    assert report.admissible
    assert report.slope_bound == pytest.approx(2.0)
    assert report.min_iterate == min_iterate_for_slope(2.0)
    # eps -> r: the graph bound tends to 1 and the minimal iterate stays small
    report_wide = check_circle(0.2, 0.19)
    assert report_wide.slope_bound == pytest.approx(0.2 / 0.19)
    assert report_wide.min_iterate <= report.min_iterate


@pytest.mark.parametrize("r, eps", [(0.3, 0.1), (0.25, 0.1), (0.2, 0.2), (0.2, 0.25), (0.2, 0.0), (0.0, 0.0)])
def test_circle_hypotheses_rejected(r, eps):
    with pytest.raises(HypothesisError):
        check_circle(r, eps)


def test_report_csv_row():
    row = check_circle(0.2, 0.1).csv_row()
    assert row == {"kind": "circle", "slope_bound": 2.0, "min_iterate": min_iterate_for_slope(2.0)}
