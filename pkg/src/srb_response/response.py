"""Two analytic routes to the linear-response derivative at t = 0.

Both evaluate the exponentially convergent series whose k-th term is minus
the pairing of the observable with the k-th transfer iterate of div X (the
unperturbed invariant density is Lebesgue, so div(rho X) = div X):

* the series route integrates h . (div X) o f^{-k} over the fixed curve;
* the spectral route tracks the finitely many Fourier modes of div X, which
  the transfer operator permutes exactly, and pairs each mode with the
  observable.

A post-change-of-variables form of each term, integrating over the k-th
backward image of the curve with the appropriate stretching factor, is kept
as a verification path for small k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, PanelBudgetExceeded
from .observables import DiracObservable
from .quadrature import adaptive_gl, panels_for_cycles
from .torus import NU, TrigPolyScalar, TrigPolyVectorField, reduce_mod1
from .dynamics import iterate_points

#: Stop stepping modes before int64 arithmetic could overflow.
MODE_LIMIT = 2 ** 62 // 4

DEFAULT_PANEL_BUDGET = 8192


def mode_backward(mode: tuple[int, int], k: int = 1) -> tuple[int, int]:
    """Image of a Fourier mode under k steps of the transfer permutation.

    One transfer step moves mode m to A^{-1} m with A = [[2, 1], [1, 1]];
    A is symmetric, so no transpose distinction arises.  Exact integers.
    """
    m1, m2 = int(mode[0]), int(mode[1])
    for _ in range(k):
        if max(abs(m1), abs(m2)) > MODE_LIMIT:
            raise ConvergenceError(
                f"mode index overflow at ({m1}, {m2}); indices grow like lambda^k"
            )
        m1, m2 = m1 - m2, -m1 + 2 * m2
    return (m1, m2)


class SparseFourierFunction:
    """Finite set of Fourier modes with coefficients, permuted by the transfer step."""

    def __init__(self, coefficients: dict[tuple[int, int], complex]):
        self._coeffs = {
            (int(m[0]), int(m[1])): complex(c) for m, c in coefficients.items() if c != 0
        }

    @classmethod
    def from_poly(cls, poly: TrigPolyScalar) -> "SparseFourierFunction":
        return cls(poly.coefficients)

    @property
    def coefficients(self) -> dict[tuple[int, int], complex]:
        return dict(self._coeffs)

    def __len__(self) -> int:
        return len(self._coeffs)

    def sum_abs_coeffs(self) -> float:
        return float(sum(abs(c) for c in self._coeffs.values()))

    def transfer_step(self) -> "SparseFourierFunction":
        """One transfer-operator step: every mode moves to A^{-1} mode, coefficients unchanged."""
        return SparseFourierFunction(
            {mode_backward(m): c for m, c in self._coeffs.items()}
        )


def transfer_step(f: SparseFourierFunction) -> SparseFourierFunction:
    return f.transfer_step()


@dataclass
class ResponseSeriesResult:
    """Terms, partial sums, and truncation control for one response route."""

    route: str
    terms: list[float] = field(default_factory=list)
    partial_sums: list[float] = field(default_factory=list)
    tail_bounds: list[float] = field(default_factory=list)
    total: float = 0.0
    tail_bound: float = math.inf
    K: int = 0
    converged: bool = False
    notes: str = ""

    def finalize(self, converged: bool, notes: str = "") -> "ResponseSeriesResult":
        self.K = len(self.terms)
        self.total = self.partial_sums[-1] if self.partial_sums else 0.0
        self.tail_bound = self.tail_bounds[-1] if self.tail_bounds else 0.0
        self.converged = converged
        if notes:
            self.notes = (self.notes + "; " + notes).strip("; ")
        return self

    def append(self, term: float) -> None:
        self.terms.append(term)
        prev = self.partial_sums[-1] if self.partial_sums else 0.0
        self.partial_sums.append(prev + term)
        self.tail_bounds.append(geometric_tail_bound(self.terms))


def geometric_tail_bound(terms: list[float]) -> float:
    """Tail bound from the last three nonzero terms, assuming geometric decay.

    Fits the envelope C nu^k to the trailing terms and bounds the tail by
    2 C nu^K / (1 - nu); the factor 2 is a safety margin since the decay
    constant is not known a priori.
    """
    K = len(terms)
    nonzero = [(j, t) for j, t in enumerate(terms) if t != 0.0][-3:]
    if not nonzero:
        return 0.0
    C = max(abs(t) / NU ** j for j, t in nonzero)
    return 2.0 * C * NU ** K / (1.0 - NU)


def _divergence_modes(X: TrigPolyVectorField) -> SparseFourierFunction:
    return SparseFourierFunction.from_poly(X.divergence())


def _pre_cov_cycles(theta: DiracObservable, div_modes: SparseFourierFunction, k: int) -> float:
    cycles = 0.0
    for mode in div_modes.coefficients:
        moved = mode_backward(mode, k)
        cycles = max(cycles, theta.curve.max_cycles(np.asarray(moved, dtype=float)))
    return cycles


def term_pre_cov(
    theta: DiracObservable,
    X: TrigPolyVectorField,
    k: int,
    tol_rel: float = 1e-10,
    panel_budget: int = DEFAULT_PANEL_BUDGET,
) -> float:
    """k-th series term, integrating h . (div X) o f^{-k} over the fixed curve."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    div = X.divergence()
    if div.n_modes == 0:
        return 0.0
    cycles = _pre_cov_cycles(theta, _divergence_modes(X), k)
    if panels_for_cycles(cycles) > panel_budget:
        raise PanelBudgetExceeded(
            f"term k = {k} needs {panels_for_cycles(cycles)} panels, budget is {panel_budget}"
        )
    floor = theta.window_mass() * max(1.0, div.sum_abs_coeffs())
    return -theta.pair(
        lambda pts: div.eval(iterate_points(pts, -k)),
        tol_rel=tol_rel,
        cycles=cycles,
        abs_floor=floor,
    )


def term_post_cov(
    theta: DiracObservable,
    X: TrigPolyVectorField,
    k: int,
    tol_rel: float = 1e-10,
    panel_budget: int = DEFAULT_PANEL_BUDGET,
) -> float:
    """k-th series term after the change of variables onto f^{-k}(W).

    Integrates nu^k . factor . h o f^k . div X over the backward image of
    the curve, parametrized exactly through the integer inverse matrix on
    the cover.  Equal to :func:`term_pre_cov` up to quadrature error.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    div = X.divergence()
    if div.n_modes == 0:
        return 0.0
    curve, window = theta.curve, theta.window
    cycles = max(
        (curve.preimage_cycles(np.asarray(m, dtype=float), k) for m in div.coefficients),
        default=0.0,
    )
    if panels_for_cycles(cycles) > panel_budget:
        raise PanelBudgetExceeded(
            f"term k = {k} needs {panels_for_cycles(cycles)} panels, budget is {panel_budget}"
        )
    floor = theta.window_mass() * max(1.0, div.sum_abs_coeffs())
    total = 0.0
    for piece in range(curve.n_pieces):
        def integrand(tau, piece=piece):
            h = window.values_on_curve(curve, piece, tau)
            pts = reduce_mod1(curve.preimage_gamma(piece, k, tau))
            return (
                h
                * div.eval(pts)
                * curve.cov_factor(piece, k, tau)
                * curve.preimage_speed(piece, k, tau)
            )

        total += adaptive_gl(
            integrand,
            tol_rel=tol_rel,
            abs_floor=floor,
            start_panels=panels_for_cycles(cycles),
        )
    return -(NU ** k) * total


def _accumulate(
    result: ResponseSeriesResult,
    term_fn,
    tol: float,
    k_max: int,
    min_terms: int = 4,
) -> ResponseSeriesResult:
    for k in range(k_max + 1):
        try:
            result.append(term_fn(k))
        except PanelBudgetExceeded as exc:
            tail = result.tail_bounds[-1] if result.tail_bounds else math.inf
            return result.finalize(
                converged=bool(tail < tol),
                notes=f"truncated at k = {k} by panel budget ({exc}); relying on tail bound",
            )
        if len(result.terms) >= min_terms and result.tail_bounds[-1] < tol:
            return result.finalize(converged=True)
    raise ConvergenceError(
        f"{result.route} route: tail bound {result.tail_bounds[-1]:.3g} "
        f"did not reach tol = {tol:g} within k_max = {k_max} terms"
    )


def sum_series(
    theta: DiracObservable,
    X: TrigPolyVectorField,
    tol: float = 1e-9,
    tol_rel: float = 1e-10,
    k_max: int = 200,
    panel_budget: int = DEFAULT_PANEL_BUDGET,
) -> ResponseSeriesResult:
    """Closed-form series route: accumulate pre-change-of-variables terms.

    Terms are added until the fitted geometric tail bound drops below
    ``tol``.  Raises ConvergenceError if k_max terms do not suffice.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    result = ResponseSeriesResult(route="series")
    return _accumulate(
        result,
        lambda k: term_pre_cov(theta, X, k, tol_rel=tol_rel, panel_budget=panel_budget),
        tol,
        k_max,
    )


def spectral_response(
    theta: DiracObservable,
    X: TrigPolyVectorField,
    tol: float = 1e-9,
    tol_rel: float = 1e-10,
    k_max: int = 200,
    panel_budget: int = DEFAULT_PANEL_BUDGET,
) -> ResponseSeriesResult:
    """Sparse-Fourier transfer-operator route.

    The transfer operator permutes the modes of div X exactly (no Galerkin
    truncation); each term pairs the observable with the current mode set.
    Truncation in k uses the same fitted geometric tail bound as the series
    route.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    result = ResponseSeriesResult(route="spectral")
    modes = _divergence_modes(X)
    if len(modes) == 0:
        result.append(0.0)
        return result.finalize(converged=True, notes="divergence has no Fourier modes")

    state = {"modes": modes}

    def term_fn(k: int) -> float:
        current = state["modes"]
        cycles = max(
            theta.curve.max_cycles(np.asarray(m, dtype=float)) for m in current.coefficients
        )
        if panels_for_cycles(cycles) > panel_budget:
            raise PanelBudgetExceeded(
                f"term k = {k} needs {panels_for_cycles(cycles)} panels, budget is {panel_budget}"
            )
        term = 0.0
        for mode, coeff in current.coefficients.items():
            fp = theta.fourier_pair(mode, tol_rel=tol_rel)
            term -= (coeff * fp).real
        state["modes"] = current.transfer_step()
        return term

    return _accumulate(result, term_fn, tol, k_max)
