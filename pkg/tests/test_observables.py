import math

import numpy as np
import pytest

from srb_response import (
    CircleLeaf,
    DiracObservable,
    HypothesisError,
    MollifiedObservable,
    SlopedSegment,
    StableSegment,
    TorusPoint,
    TrigPolyScalar,
    WindowFunction,
    bump,
    frame,
    mollifier,
)
from srb_response.observables import bump_third_derivative
from srb_response.response import mode_backward

CENTER = TorusPoint(0.12, 0.57)


def test_bump_is_c3_symbolically():
    sympy = pytest.importorskip("sympy")
    v = sympy.Symbol("v")
    b = (1 - v**2) ** 4
    for order in range(4):
        assert sympy.diff(b, v, order).subs(v, 1) == 0
        assert sympy.diff(b, v, order).subs(v, -1) == 0
    assert sympy.diff(b, v, 4).subs(v, 1) != 0  # exactly C^3, not C^4


def test_bump_third_derivative_vanishes_linearly():
    assert float(bump_third_derivative(1.0)) == 0.0
    assert float(bump_third_derivative(-1.0)) == 0.0
    # |b'''| near the edge decays linearly with the distance (slope 384)
    for delta in (1e-4, 1e-6, 1e-8):
        for sign in (1.0, -1.0):
            assert abs(float(bump_third_derivative(sign * (1 - delta)))) <= 400.0 * delta
    assert np.all(bump(np.array([1.0, 1.5, -2.0])) == 0.0)


def test_mollifier_normalization():
    # quadrature oracle for the unit mass of the kernel
    nodes, weights = np.polynomial.legendre.leggauss(40)
    assert float(weights @ mollifier(nodes)) == pytest.approx(1.0, abs=1e-14)
    assert np.all(mollifier(np.array([-0.5, 0.0, 0.9])) >= 0.0)


@pytest.mark.parametrize("kind", ["stable", "sloped", "circle"])
def test_arc_length_matches_quadrature(kind, all_observables):
    curve = all_observables[kind].curve
    nodes, weights = np.polynomial.legendre.leggauss(32)
    tau = 0.5 * (nodes + 1.0)
    total = sum(
        0.5 * float(weights @ curve.piece_speed(piece, tau))
        for piece in range(curve.n_pieces)
    )
    assert total == pytest.approx(curve.arc_length(), abs=1e-10)


def test_circle_analytic_arc_length():
    c = CircleLeaf(CENTER, 0.15, 0.05)
    expected = 2.0 * 0.15 * (math.pi - 2.0 * math.asin(0.05 / 0.15))
    assert c.arc_length() == pytest.approx(expected, abs=1e-14)


def test_circle_retained_arcs_avoid_caps():
    c = CircleLeaf(CENTER, 0.15, 0.05)
    eu = frame().e_u_array()
    tau = np.linspace(1e-9, 1 - 1e-9, 201)
    for piece in range(2):
        pts = c.piece_gamma(piece, tau)
        u = (pts - CENTER.as_array()) @ eu
        assert np.all(np.abs(u) > c.cap_eps)


def test_circle_hypotheses():
    with pytest.raises(HypothesisError):
        CircleLeaf(CENTER, 0.3, 0.05)
    with pytest.raises(HypothesisError):
        CircleLeaf(CENTER, 0.2, 0.25)


def test_segment_validation():
    with pytest.raises(ValueError):
        StableSegment(CENTER, 0.0)
    with pytest.raises(ValueError):
        SlopedSegment(CENTER, math.inf, 0.15)
    with pytest.raises(ValueError):
        WindowFunction(support_fraction=1.0)


def test_pair_zero_window(stable_obs):
    theta0 = DiracObservable(stable_obs.curve, WindowFunction(smooth_factor=TrigPolyScalar.zero()))
    assert theta0.pair(None) == 0.0


def test_window_mass_against_independent_quadrature(all_observables):
    # independent oracle: fixed-order composite Gauss-Legendre at doubled order
    nodes, weights = np.polynomial.legendre.leggauss(32)
    for theta in all_observables.values():
        curve, window = theta.curve, theta.window
        total = 0.0
        for piece in range(curve.n_pieces):
            for j in range(64):
                a, b = j / 64, (j + 1) / 64
                tau = 0.5 * (a + b) + 0.5 * (b - a) * nodes
                h = window.values_on_curve(curve, piece, tau)
                total += 0.5 * (b - a) * float(weights @ (h * curve.piece_speed(piece, tau)))
        assert theta.window_mass() == pytest.approx(total, rel=1e-12)


def test_pair_linearity(stable_obs):
    phi1 = TrigPolyScalar.cos_mode(1, 0)
    phi2 = TrigPolyScalar.sin_mode(0, 1)
    lhs = stable_obs.pair(2.0 * phi1 + (-3.0) * phi2)
    rhs = 2.0 * stable_obs.pair(phi1) - 3.0 * stable_obs.pair(phi2)
    assert lhs == pytest.approx(rhs, abs=1e-12)
    c = 4.0
    assert stable_obs.pair(TrigPolyScalar.constant(c)) == pytest.approx(
        c * stable_obs.window_mass(), rel=1e-12
    )


def test_fourier_pair_zero_mode_exact(all_observables):
    for theta in all_observables.values():
        fp = theta.fourier_pair((0, 0))
        assert fp.real == theta.pair(None) and fp.imag == 0.0


def test_fourier_pair_conjugate_symmetry(stable_obs):
    m = mode_backward((1, 0), 3)
    a = stable_obs.fourier_pair(m)
    b = stable_obs.fourier_pair((-m[0], -m[1]))
    assert a == pytest.approx(np.conj(b), abs=1e-13)


def test_fourier_pair_decay_beats_cubic(stable_obs):
    """|fourier_pair| along the backward mode orbit decays faster than freq^-3."""
    es = frame().e_s_array()
    freqs, vals = [], []
    for k in range(2, 7):
        m = mode_backward((1, 0), k)
        freqs.append(abs(float(np.dot(m, es))))
        vals.append(abs(stable_obs.fourier_pair(m)))
    slope = np.polyfit(np.log(freqs), np.log(vals), 1)[0]
    assert slope <= -3.0


def test_window_vanishes_near_curve_boundary(all_observables):
    for theta in all_observables.values():
        curve, window = theta.curve, theta.window
        tau = np.array([0.0, 0.01, 0.99, 1.0])
        for piece in range(curve.n_pieces):
            assert np.all(window.values_on_curve(curve, piece, tau) == 0.0)


def test_mollified_eval_stable_case(stable_obs):
    """Level function of a stable segment is the u-coordinate; |grad g| = 1."""
    th = stable_obs
    eps = 1e-2
    mol = th.mollified(eps)
    assert mol.a == 0.0
    es, eu = frame().e_s_array(), frame().e_u_array()
    rng = np.random.default_rng(12)
    for _ in range(20):
        s = rng.uniform(-0.14, 0.14)
        u = rng.uniform(-2 * eps, 2 * eps)
        p = (CENTER.as_array() + s * es + u * eu) % 1.0
        expected = (
            bump(np.array([s / (0.15 * 0.9)]))
            * mollifier(np.array([u / eps]))
            / eps
        )[0]
        assert float(mol.eval(p[None, :])[0]) == pytest.approx(expected, abs=1e-12)
    far = (CENTER.as_array() + 0.05 * es + 3 * eps * eu) % 1.0
    assert float(mol.eval(far[None, :])[0]) == 0.0


def test_mollified_extent_guard(stable_obs):
    with pytest.raises(ValueError):
        stable_obs.mollified(0.49)
    with pytest.raises(ValueError):
        stable_obs.mollified(0.0)


def test_mollified_circle_level_value(circle_obs):
    mol = circle_obs.mollified(1e-2)
    assert mol.a == pytest.approx(0.15**2)


def test_coarea_consistency_all_kinds(all_observables):
    """Grid integral of the mollified observable converges to the pairing at order ~2.

    For segments with a window constant along the level sets the bias is
    identically zero, so those sit at roundoff for every width.
    """
    eps_list = (1e-2, 5e-3, 2.5e-3)
    for kind, theta in all_observables.items():
        mass = theta.window_mass()
        errs = [abs(theta.mollified(e).grid_integral(2048) - mass) for e in eps_list]
        if max(errs) < 1e-10:
            assert kind in ("stable", "sloped")
            continue
        orders = [math.log(errs[i] / errs[i + 1]) / math.log(2) for i in range(len(errs) - 1)]
        assert all(o >= 1.8 for o in orders), (kind, errs, orders)


def test_coarea_order_two_with_varying_window():
    """With a position-dependent smooth factor the segment bias shows order 2."""
    sf = TrigPolyScalar.constant(1.0) + TrigPolyScalar.cos_mode(1, 0, 0.5)
    theta = DiracObservable(StableSegment(CENTER, 0.15), WindowFunction(smooth_factor=sf))
    mass = theta.window_mass()
    errs = [abs(theta.mollified(e).grid_integral(2048) - mass) for e in (1e-2, 5e-3, 2.5e-3)]
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(2) for i in range(2)]
    assert all(o >= 1.8 for o in orders), (errs, orders)


def test_mollified_from_fields_duck_typing():
    """Any g with eval/gradient_eval works, e.g. a trigonometric level function."""
    g = TrigPolyScalar.cos_mode(0, 1)  # g = cos 2 pi y

    class One:
        def eval(self, pts):
            return np.ones(np.asarray(pts).shape[0])

    mol = MollifiedObservable(h=One(), g=g, a=0.5, eps=1e-2)
    # {cos 2 pi y = 1/2} has two branches of |grad g| = pi sqrt(3); total length 2
    val = mol.grid_integral(2048)
    assert val == pytest.approx(2.0, rel=1e-3)
