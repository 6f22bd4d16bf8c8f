"""Adaptive composite Gauss-Legendre quadrature on an interval.

Order-16 panels, refined by global bisection (panel doubling) until two
successive refinements agree.  Integrands may be real or complex valued and
must accept a vector of abscissae.  Panel values are reduced with
math.fsum, so results are deterministic regardless of chunking.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError

GAUSS_ORDER = 16
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)

#: Panels resolve about two oscillation periods each (8 nodes per period).
PERIODS_PER_PANEL = 2.0


def panels_for_cycles(cycles: float, minimum: int = 8) -> int:
    """Panel count resolving ``cycles`` phase oscillations over the interval."""
    return max(minimum, int(math.ceil(cycles / PERIODS_PER_PANEL)))


def _fsum_values(values) -> complex | float:
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return math.fsum(values)


def composite_gl(f, a: float, b: float, n_panels: int):
    """Composite Gauss-Legendre sum over n_panels equal panels of [a, b].

    Returns (integral, integral_of_abs); the latter feeds the roundoff floor
    of the adaptive driver.
    """
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    ts = (mid[:, None] + half[:, None] * _NODES[None, :]).ravel()
    vals = np.asarray(f(ts))
    vals = vals.reshape(n_panels, GAUSS_ORDER)
    panel_vals = (vals * _WEIGHTS[None, :]).sum(axis=1) * half
    panel_abs = (np.abs(vals) * _WEIGHTS[None, :]).sum(axis=1) * half
    return _fsum_values(panel_vals), math.fsum(panel_abs)


def adaptive_gl(
    f,
    a: float = 0.0,
    b: float = 1.0,
    tol_rel: float = 1e-10,
    abs_floor: float = 0.0,
    start_panels: int = 8,
    max_depth: int = 20,
):
    """Refine composite Gauss-Legendre until successive values agree.

    Convergence: |I_new - I_old| <= tol_rel * max(|I_new|, abs_floor), with an
    additional floor of 64 eps times the integral of |f| (below which the
    difference is pure roundoff).  Raises ConvergenceError after ``max_depth``
    bisections.
    """
    n = max(1, int(start_panels))
    value, _ = composite_gl(f, a, b, n)
    for _ in range(max_depth):
        n *= 2
        new_value, abs_value = composite_gl(f, a, b, n)
        delta = abs(new_value - value)
        floor = max(tol_rel * max(abs(new_value), abs_floor), 64.0 * np.finfo(float).eps * abs_value)
        if delta <= floor:
            return new_value
        value = new_value
    raise ConvergenceError(
        f"quadrature did not converge after {max_depth} bisections ({n} panels)"
    )
