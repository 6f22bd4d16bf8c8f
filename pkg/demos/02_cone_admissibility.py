"""Cone apertures kappa(m) and admissibility of the three curve families.

Run:  python3 demos/02_cone_admissibility.py
"""

from srb_response import (
    CircleLeaf,
    SlopedSegment,
    StableSegment,
    TorusPoint,
    kappa,
    min_iterate_for_slope,
)
from srb_response.cones import cone_gain
from srb_response.torus import LAMBDA

# kappa(m) solves (1 + k)^2 sqrt(1 + 4 k^2) = lambda^m: the widest stable
# cone usable for the m-th iterate.  It grows without bound, so any
# non-unstable slope becomes admissible for a large enough iterate.
print(" m   kappa(m)        equation residual")
for m in range(1, 13):
    k = kappa(m)
    resid = abs(cone_gain(k) - LAMBDA**m) / LAMBDA**m
    print(f"{m:2d}   {k:12.8f}    {resid:.1e}")

print("\nminimal iterate for slope bounds:")
for alpha in (0.0, 0.4, 1.0, 3.0, 5.0, 20.0):
    print(f"  |alpha| = {alpha:5.1f}  ->  m = {min_iterate_for_slope(alpha)}")

center = TorusPoint(0.12, 0.57)
print("\nadmissibility reports:")
for curve in (
    StableSegment(center, 0.15),
    SlopedSegment(center, 0.4, 0.15),
    CircleLeaf(center, 0.15, 0.05),
):
    print("-" * 60)
    print(curve.admissibility().text_block())

# The circle hypotheses are enforced: r < 1/4 and eps < r.
print("-" * 60)
try:
    CircleLeaf(center, 0.30, 0.05)
except Exception as exc:
    print(f"rejected as expected: {exc}")
