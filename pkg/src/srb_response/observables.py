"""Support curves, C^3 windows, Dirac observables, and mollified versions.

A Dirac observable pairs a test function with its integral against a window
h over a curve W, with respect to arc length.  Three curve families are
supported: a segment of a stable line, a segment of a line of finite slope
alpha over the stable direction, and a circle with the two arcs tangent to
the unstable direction removed.

The mollified version replaces the arc-length pairing by the area integral
of h(p) eta_eps(g(p) - a) |grad g(p)|, where the level set {g = a} carries
the curve; the gradient factor makes the eps -> 0 limit the arc-length
pairing rather than the coarea-weighted one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .cones import AdmissibilityReport, check_circle, min_iterate_for_slope
from .dynamics import CAT_INVERSE
from .errors import HypothesisError
from .quadrature import adaptive_gl, panels_for_cycles
from .torus import (
    LAMBDA,
    NU,
    TorusPoint,
    TrigPolyScalar,
    frame,
    reduce_mod1,
    reduced_displacement,
)

_E_S = frame().e_s_array()
_E_U = frame().e_u_array()

#: Highest backward iterate for which integer matrix powers stay exact.
MAX_EXACT_PREIMAGE = 40


def bump(v) -> np.ndarray:
    """The C^3 bump (1 - v^2)^4 on |v| < 1, zero outside."""
    v = np.asarray(v, dtype=float)
    inside = np.abs(v) < 1.0
    w = np.where(inside, 1.0 - v * v, 0.0)
    return w ** 4


def bump_third_derivative(v) -> np.ndarray:
    """Third derivative of the bump, 48 v (1 - v^2)(3 - 7 v^2) inside the support."""
    v = np.asarray(v, dtype=float)
    inside = np.abs(v) < 1.0
    return np.where(inside, 48.0 * v * (1.0 - v * v) * (3.0 - 7.0 * v * v), 0.0)


#: Normalization making the quartic bump integrate to one on [-1, 1].
MOLLIFIER_NORM = 315.0 / 256.0


def mollifier(v) -> np.ndarray:
    """Normalized C^3 kernel with unit mass and support [-1, 1]."""
    return MOLLIFIER_NORM * bump(v)


def _inverse_power(k: int) -> np.ndarray:
    if k > MAX_EXACT_PREIMAGE:
        raise ValueError(f"backward iterate k = {k} exceeds the exact integer range")
    return np.linalg.matrix_power(CAT_INVERSE, k)


@dataclass(frozen=True)
class StableSegment:
    """Segment of the stable line through ``center``, arc half-length ``half_length``."""

    center: TorusPoint
    half_length: float

    kind: ClassVar[str] = "stable_segment"
    n_pieces: ClassVar[int] = 1
    level_value: ClassVar[float] = 0.0

    def __post_init__(self):
        if not 0.0 < self.half_length < 0.45:
            raise ValueError("half_length must lie in (0, 0.45)")

    def arc_length(self) -> float:
        return 2.0 * self.half_length

    def piece_gamma(self, piece: int, tau) -> np.ndarray:
        ell = (2.0 * np.asarray(tau) - 1.0) * self.half_length
        return self.center.as_array()[None, :] + ell[:, None] * _E_S[None, :]

    def piece_speed(self, piece: int, tau) -> np.ndarray:
        return np.full(np.shape(tau), 2.0 * self.half_length)

    def piece_window_param(self, piece: int, tau) -> np.ndarray:
        return 2.0 * np.asarray(tau) - 1.0

    def window_param_at(self, points) -> np.ndarray:
        d = reduced_displacement(points, self.center.as_array())
        return (d @ _E_S) / self.half_length

    def level_eval(self, points) -> np.ndarray:
        d = reduced_displacement(points, self.center.as_array())
        return d @ _E_U

    def level_gradient(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.broadcast_to(_E_U, pts.shape).copy()

    def preimage_gamma(self, piece: int, k: int, tau) -> np.ndarray:
        base = _inverse_power(k).astype(float) @ self.center.as_array()
        ell = (2.0 * np.asarray(tau) - 1.0) * self.half_length * LAMBDA ** k
        return base[None, :] + ell[:, None] * _E_S[None, :]

    def preimage_speed(self, piece: int, k: int, tau) -> np.ndarray:
        return np.full(np.shape(tau), 2.0 * self.half_length * LAMBDA ** k)

    def cov_factor(self, piece: int, k: int, tau) -> np.ndarray:
        return np.ones(np.shape(tau))

    def max_cycles(self, mode) -> float:
        return abs(float(np.dot(mode, _E_S))) * self.arc_length()

    def preimage_cycles(self, mode, k: int) -> float:
        return abs(float(np.dot(mode, _E_S))) * LAMBDA ** k * self.arc_length()

    def mollify_extent(self, eps: float) -> float:
        return math.hypot(self.half_length, eps)

    def admissibility(self) -> AdmissibilityReport:
        return AdmissibilityReport(
            kind=self.kind,
            admissible=True,
            slope_bound=0.0,
            min_iterate=1,
            notes=self._notes(),
        )

    def _notes(self) -> str:
        return (
            f"leaf length {self.arc_length():.6g} treated as a free parameter; "
            "graph-size constants are not enforced"
        )


@dataclass(frozen=True)
class SlopedSegment:
    """Segment of the line u = alpha s through ``base``, arc half-length ``half_length``."""

    base: TorusPoint
    alpha: float
    half_length: float

    kind: ClassVar[str] = "sloped_segment"
    n_pieces: ClassVar[int] = 1
    level_value: ClassVar[float] = 0.0

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise ValueError("slope must be finite (a pure unstable line is not admissible)")
        if not 0.0 < self.half_length < 0.45:
            raise ValueError("half_length must lie in (0, 0.45)")

    @property
    def _norm(self) -> float:
        return math.sqrt(1.0 + self.alpha * self.alpha)

    @property
    def s_max(self) -> float:
        return self.half_length / self._norm

    def _direction(self) -> np.ndarray:
        return (_E_S + self.alpha * _E_U) / self._norm

    def arc_length(self) -> float:
        return 2.0 * self.half_length

    def piece_gamma(self, piece: int, tau) -> np.ndarray:
        ell = (2.0 * np.asarray(tau) - 1.0) * self.half_length
        return self.base.as_array()[None, :] + ell[:, None] * self._direction()[None, :]

    def piece_speed(self, piece: int, tau) -> np.ndarray:
        return np.full(np.shape(tau), 2.0 * self.half_length)

    def piece_window_param(self, piece: int, tau) -> np.ndarray:
        return 2.0 * np.asarray(tau) - 1.0

    def window_param_at(self, points) -> np.ndarray:
        d = reduced_displacement(points, self.base.as_array())
        return (d @ _E_S) / self.s_max

    def level_eval(self, points) -> np.ndarray:
        d = reduced_displacement(points, self.base.as_array())
        return d @ _E_U - self.alpha * (d @ _E_S)

    def level_gradient(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        grad = _E_U - self.alpha * _E_S
        return np.broadcast_to(grad, pts.shape).copy()

    def _preimage_direction(self, k: int) -> np.ndarray:
        return (LAMBDA ** k * _E_S + NU ** k * self.alpha * _E_U) / self._norm

    def preimage_gamma(self, piece: int, k: int, tau) -> np.ndarray:
        base = _inverse_power(k).astype(float) @ self.base.as_array()
        ell = (2.0 * np.asarray(tau) - 1.0) * self.half_length
        return base[None, :] + ell[:, None] * self._preimage_direction(k)[None, :]

    def preimage_speed(self, piece: int, k: int, tau) -> np.ndarray:
        rate = float(np.linalg.norm(self._preimage_direction(k)))
        return np.full(np.shape(tau), 2.0 * self.half_length * rate)

    def cov_factor(self, piece: int, k: int, tau) -> np.ndarray:
        a2 = self.alpha * self.alpha
        val = math.sqrt((1.0 + a2) / (1.0 + a2 * NU ** (4 * k)))
        return np.full(np.shape(tau), val)

    def max_cycles(self, mode) -> float:
        return abs(float(np.dot(mode, self._direction()))) * self.arc_length()

    def preimage_cycles(self, mode, k: int) -> float:
        return abs(float(np.dot(mode, self._preimage_direction(k)))) * self.arc_length()

    def mollify_extent(self, eps: float) -> float:
        return self.half_length + eps

    def admissibility(self) -> AdmissibilityReport:
        return AdmissibilityReport(
            kind=self.kind,
            admissible=True,
            slope_bound=abs(self.alpha),
            min_iterate=min_iterate_for_slope(self.alpha),
            notes=(
                f"leaf length {self.arc_length():.6g} treated as a free parameter; "
                "graph-size constants are not enforced"
            ),
        )


@dataclass(frozen=True)
class CircleLeaf:
    """Circle of radius r about ``center`` with caps |u| <= cap_eps removed.

    The retained set is the two arcs where the curve is a graph over the
    stable direction with slope below r/cap_eps.  Each arc is one smooth
    quadrature piece, parametrized by angle to avoid the coordinate
    singularity where the circle is tangent to the unstable direction.
    """

    center: TorusPoint
    radius: float
    cap_eps: float

    kind: ClassVar[str] = "circle"
    n_pieces: ClassVar[int] = 2

    def __post_init__(self):
        if not (0.0 < self.radius < 0.25):
            raise HypothesisError(
                f"circle radius r = {self.radius:g} violates the hypothesis 0 < r < 1/4"
            )
        if not (0.0 < self.cap_eps < self.radius):
            raise HypothesisError(
                f"cap half-width eps = {self.cap_eps:g} violates the hypothesis 0 < eps < r"
            )

    @property
    def level_value(self) -> float:
        return self.radius * self.radius

    @property
    def _phi0(self) -> float:
        return math.asin(self.cap_eps / self.radius)

    @property
    def _arc_angle(self) -> float:
        return math.pi - 2.0 * self._phi0

    @property
    def _s_geom(self) -> float:
        return math.sqrt(self.radius ** 2 - self.cap_eps ** 2)

    def arc_length(self) -> float:
        return 2.0 * self.radius * self._arc_angle

    def _angles(self, piece: int, tau) -> np.ndarray:
        start = self._phi0 if piece == 0 else math.pi + self._phi0
        return start + np.asarray(tau, dtype=float) * self._arc_angle

    def piece_gamma(self, piece: int, tau) -> np.ndarray:
        phi = self._angles(piece, tau)
        su = self.radius * np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        return self.center.as_array()[None, :] + su @ np.array([_E_S, _E_U])

    def piece_speed(self, piece: int, tau) -> np.ndarray:
        return np.full(np.shape(tau), self.radius * self._arc_angle)

    def piece_window_param(self, piece: int, tau) -> np.ndarray:
        phi = self._angles(piece, tau)
        return self.radius * np.cos(phi) / self._s_geom

    def window_param_at(self, points) -> np.ndarray:
        d = reduced_displacement(points, self.center.as_array())
        return (d @ _E_S) / self._s_geom

    def level_eval(self, points) -> np.ndarray:
        d = reduced_displacement(points, self.center.as_array())
        return np.sum(d * d, axis=-1)

    def level_gradient(self, points) -> np.ndarray:
        return 2.0 * reduced_displacement(points, self.center.as_array())

    def preimage_gamma(self, piece: int, k: int, tau) -> np.ndarray:
        base = _inverse_power(k).astype(float) @ self.center.as_array()
        phi = self._angles(piece, tau)
        su = self.radius * np.stack(
            [LAMBDA ** k * np.cos(phi), NU ** k * np.sin(phi)], axis=-1
        )
        return base[None, :] + su @ np.array([_E_S, _E_U])

    def preimage_speed(self, piece: int, k: int, tau) -> np.ndarray:
        phi = self._angles(piece, tau)
        rate = np.sqrt(LAMBDA ** (2 * k) * np.sin(phi) ** 2 + NU ** (2 * k) * np.cos(phi) ** 2)
        return self.radius * self._arc_angle * rate

    def cov_factor(self, piece: int, k: int, tau) -> np.ndarray:
        phi = self._angles(piece, tau)
        s = LAMBDA ** k * self.radius * np.cos(phi)
        u = NU ** k * self.radius * np.sin(phi)
        return np.sqrt((u * u + NU ** (4 * k) * s * s) / (u * u + NU ** (8 * k) * s * s))

    def max_cycles(self, mode) -> float:
        return float(np.hypot(mode[0], mode[1])) * self.arc_length()

    def preimage_cycles(self, mode, k: int) -> float:
        rate = LAMBDA ** k * abs(float(np.dot(mode, _E_S))) + NU ** k * abs(
            float(np.dot(mode, _E_U))
        )
        return rate * self.radius * 2.0 * self._arc_angle

    def mollify_extent(self, eps: float) -> float:
        return math.sqrt(self.radius ** 2 + eps)

    def admissibility(self) -> AdmissibilityReport:
        report = check_circle(self.radius, self.cap_eps)
        return AdmissibilityReport(
            kind=self.kind,
            admissible=report.admissible,
            slope_bound=report.slope_bound,
            min_iterate=report.min_iterate,
            notes=(
                f"leaf length {self.arc_length():.6g} treated as a free parameter; "
                "graph-size constants are not enforced"
            ),
        )


LeafCurve = StableSegment | SlopedSegment | CircleLeaf


@dataclass(frozen=True)
class WindowFunction:
    """C^3 window: quartic bump in the curve parameter times a smooth factor.

    ``support_fraction`` < 1 keeps the support strictly inside the curve, as
    required of windows that vanish near the boundary.
    """

    smooth_factor: TrigPolyScalar | None = None
    support_fraction: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.support_fraction < 1.0:
            raise ValueError("support_fraction must lie in (0, 1)")

    def _bump_of(self, w) -> np.ndarray:
        return bump(np.asarray(w) / self.support_fraction)

    def values_on_curve(self, curve: LeafCurve, piece: int, tau) -> np.ndarray:
        vals = self._bump_of(curve.piece_window_param(piece, tau))
        if self.smooth_factor is not None:
            pts = reduce_mod1(curve.piece_gamma(piece, tau))
            vals = vals * self.smooth_factor.eval(pts)
        return vals

    def values_at(self, curve: LeafCurve, points) -> np.ndarray:
        """Extension of the window off the curve, constant along the level sets."""
        vals = self._bump_of(curve.window_param_at(points))
        if self.smooth_factor is not None:
            vals = vals * self.smooth_factor.eval(reduce_mod1(points))
        return vals


def _as_point_function(phi):
    """Normalize a pairing argument to a vectorized callable on torus points."""
    if phi is None:
        return (lambda pts: np.ones(pts.shape[:-1])), 0.0, None
    if isinstance(phi, TrigPolyScalar):
        return (lambda pts: phi.eval(pts)), None, phi
    return phi, None, None


@dataclass(frozen=True)
class DiracObservable:
    """Window h over a leaf curve W, pairing test functions by arc length."""

    curve: LeafCurve
    window: WindowFunction

    def pair(self, phi=None, tol_rel: float = 1e-10, cycles: float = 0.0, abs_floor: float = 0.0) -> float:
        """Arc-length pairing int_W h phi, by adaptive Gauss-Legendre quadrature.

        ``phi`` may be None (constant one), a TrigPolyScalar, or a vectorized
        callable on (N, 2) torus coordinates.  ``cycles`` is an optional bound
        on the number of phase oscillations of phi along the curve, used to
        seed the panel count.
        """
        fn, _, poly = _as_point_function(phi)
        if poly is not None:
            hint = max(
                (self.curve.max_cycles(np.asarray(m, dtype=float)) for m in poly.coefficients),
                default=0.0,
            )
            cycles = max(cycles, hint)
        total = 0.0
        for piece in range(self.curve.n_pieces):
            def integrand(tau, piece=piece):
                pts = self.curve.piece_gamma(piece, tau)
                h = self.window.values_on_curve(self.curve, piece, tau)
                return h * fn(reduce_mod1(pts)) * self.curve.piece_speed(piece, tau)

            total += adaptive_gl(
                integrand,
                tol_rel=tol_rel,
                abs_floor=abs_floor,
                start_panels=panels_for_cycles(cycles),
            )
        return total

    def fourier_pair(self, mode, tol_rel: float = 1e-10) -> complex:
        """Pairing against the plane wave exp(2 pi i mode . y).

        The starting panel count resolves at least eight nodes per phase
        oscillation along the curve; adaptive refinement then verifies.
        """
        m = np.asarray(mode, dtype=float)
        cycles = self.curve.max_cycles(m)
        floor = self.window_mass()
        total = 0.0 + 0.0j
        for piece in range(self.curve.n_pieces):
            def integrand(tau, piece=piece):
                pts = reduce_mod1(self.curve.piece_gamma(piece, tau))
                h = self.window.values_on_curve(self.curve, piece, tau)
                phase = np.exp((2j * math.pi) * (pts @ m))
                return h * phase * self.curve.piece_speed(piece, tau)

            total += adaptive_gl(
                integrand,
                tol_rel=tol_rel,
                abs_floor=floor,
                start_panels=panels_for_cycles(cycles),
            )
        return total

    def window_mass(self, tol_rel: float = 1e-10) -> float:
        """Pairing with the constant one (the mass of the window)."""
        cached = getattr(self, "_mass_cache", None)
        if cached is None:
            cached = self.pair(None, tol_rel=tol_rel)
            object.__setattr__(self, "_mass_cache", cached)
        return cached

    def mollified(self, eps: float) -> "MollifiedObservable":
        return MollifiedObservable.from_observable(self, eps)


class WindowField:
    """The window as a function on T^2 (h composed with the transverse coordinate)."""

    def __init__(self, curve: LeafCurve, window: WindowFunction):
        self.curve = curve
        self.window = window

    def eval(self, points) -> np.ndarray:
        return self.window.values_at(self.curve, points)


class LevelField:
    """The level function g whose level set {g = a} carries the curve."""

    def __init__(self, curve: LeafCurve):
        self.curve = curve

    def eval(self, points) -> np.ndarray:
        return self.curve.level_eval(points)

    def gradient_eval(self, points) -> np.ndarray:
        return self.curve.level_gradient(points)


@dataclass(frozen=True)
class MollifiedObservable:
    """Smoothed Dirac observable h(p) eta_eps(g(p) - a) |grad g(p)|.

    ``h`` exposes eval(points); ``g`` exposes eval(points) and
    gradient_eval(points).  The kernel eta_eps is the normalized quartic
    bump of width 2 eps, so the area integral converges to the arc-length
    pairing with O(eps^2) error.
    """

    h: object
    g: object
    a: float
    eps: float

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("mollification width must be positive")

    @classmethod
    def from_observable(cls, theta: DiracObservable, eps: float) -> "MollifiedObservable":
        extent = theta.curve.mollify_extent(eps)
        if extent >= 0.5:
            raise ValueError(
                f"mollified support extent {extent:g} would wrap around the torus"
            )
        return cls(
            h=WindowField(theta.curve, theta.window),
            g=LevelField(theta.curve),
            a=float(theta.curve.level_value),
            eps=float(eps),
        )

    def kernel(self, w) -> np.ndarray:
        return mollifier(np.asarray(w) / self.eps) / self.eps

    def eval(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        gvals = self.g.eval(pts) - self.a
        out = self.kernel(gvals)
        live = out != 0.0
        if np.any(live):
            grad = self.g.gradient_eval(pts[live])
            out[live] *= self.h.eval(pts[live]) * np.sqrt(np.sum(grad * grad, axis=-1))
        out[~live] = 0.0
        return out

    def grid_integral(self, grid_n: int, chunk_rows: int = 256) -> float:
        """Riemann sum of eval over a uniform grid_n x grid_n grid of cell centers."""
        xs = (np.arange(grid_n) + 0.5) / grid_n
        total = 0.0
        for start in range(0, grid_n, chunk_rows):
            sub = xs[start : start + chunk_rows]
            gx, gy = np.meshgrid(sub, xs, indexing="ij")
            pts = np.stack([gx.ravel(), gy.ravel()], axis=-1)
            total += float(np.sum(self.eval(pts)))
        return total / (grid_n * grid_n)
