"""Stable-cone aperture kappa(m) and admissibility of candidate leaves.

kappa(m) is the unique positive root of (1 + k)^2 sqrt(1 + 4 k^2) = lambda^m,
the maximal cone aperture usable for the m-th iterate of the cat map.  A
candidate curve that is a graph over the stable direction with slope bound
below kappa(m) is admissible for that iterate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import HypothesisError
from .torus import LAMBDA

KAPPA_TOL = 1e-12


def cone_gain(kappa: float) -> float:
    """Left-hand side (1 + k)^2 sqrt(1 + 4 k^2) of the aperture equation."""
    return (1.0 + kappa) ** 2 * math.sqrt(1.0 + 4.0 * kappa * kappa)


@lru_cache(maxsize=None)
def kappa(m: int) -> float:
    """Maximal cone aperture for the m-th iterate, by bisection to 1e-12.

    The left-hand side is strictly increasing from 1 at kappa = 0 and is
    bounded below by 2 kappa^3, so the root lies in [0, lambda^(m/3) + 1].
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    target = LAMBDA ** m
    lo, hi = 0.0, LAMBDA ** (m / 3.0) + 1.0
    while hi - lo > KAPPA_TOL:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break  # interval is down to one ulp; cannot shrink further
        if cone_gain(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def min_iterate_for_slope(alpha: float) -> int:
    """Smallest m >= 1 with kappa(m) > |alpha|."""
    if not math.isfinite(alpha):
        raise ValueError("slope must be finite")
    target = abs(alpha)
    m = 1
    while kappa(m) <= target:
        m += 1
    return m


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of the admissibility check for one candidate curve."""

    kind: str
    admissible: bool
    slope_bound: float
    min_iterate: int | None
    notes: str = ""

    def csv_row(self) -> dict:
        return {
            "kind": self.kind,
            "slope_bound": self.slope_bound,
            "min_iterate": self.min_iterate,
        }

    def text_block(self) -> str:
        lines = [
            f"kind:        {self.kind}",
            f"admissible:  {'yes' if self.admissible else 'no'}",
            f"slope bound: {self.slope_bound:.12g}",
            f"min iterate: {self.min_iterate}",
            f"kappa(min):  {kappa(self.min_iterate):.12g}" if self.min_iterate else "",
        ]
        if self.notes:
            lines.append(f"notes:       {self.notes}")
        return "\n".join(line for line in lines if line)


def check_sloped_line(alpha: float, notes: str = "") -> AdmissibilityReport:
    """Admissibility of a line u = alpha s (any non-unstable line qualifies)."""
    if not math.isfinite(alpha):
        raise ValueError("slope must be finite")
    m = min_iterate_for_slope(alpha)
    return AdmissibilityReport(
        kind="sloped_line",
        admissible=True,
        slope_bound=abs(alpha),
        min_iterate=m,
        notes=notes,
    )


def check_circle(r: float, eps: float, notes: str = "") -> AdmissibilityReport:
    """Admissibility of a radius-r circle with caps of half-width eps excluded.

    Requires 0 < eps < r < 1/4.  On the retained arcs the curve is a graph
    over the stable direction with slope below r/eps.
    """
    if not (0.0 < r < 0.25):
        raise HypothesisError(f"circle radius r = {r:g} violates the hypothesis 0 < r < 1/4")
    if not (0.0 < eps < r):
        raise HypothesisError(f"cap half-width eps = {eps:g} violates the hypothesis 0 < eps < r")
    bound = r / eps
    m = min_iterate_for_slope(bound)
    return AdmissibilityReport(
        kind="circle",
        admissible=True,
        slope_bound=bound,
        min_iterate=m,
        notes=notes,
    )
