"""Deterministic invariant suite behind the `validate` subcommand.

Each check returns (name, status, detail) with status PASS, FAIL, or SKIP.
Statistical estimators are exercised by the `oracle` subcommand instead;
everything here is reproducible arithmetic.
"""

from __future__ import annotations

import math

import numpy as np

from .cones import cone_gain, kappa
from .config import ExperimentConfig, build_curve, build_family, build_observable, build_window, parse_config_text, serialize_config
from .dynamics import CAT, PerturbationFamily, divergence_of_Xm, inverse_apply_points, iterate_points
from .observables import DiracObservable, bump_third_derivative
from .response import SparseFourierFunction, spectral_response, sum_series, term_post_cov, term_pre_cov
from .torus import (
    LAMBDA,
    NU,
    TorusPoint,
    TrigPolyScalar,
    TrigPolyVectorField,
    frame,
    lift,
    project,
    reduce_mod1,
    to_frame_array,
)

Check = tuple[str, str, str]


def _result(name: str, ok: bool, detail: str = "") -> Check:
    return (name, "PASS" if ok else "FAIL", detail)


def _skip(name: str, detail: str) -> Check:
    return (name, "SKIP", detail)


def _check_frame() -> Check:
    fr = frame()
    A = np.array([[2.0, 1.0], [1.0, 1.0]])
    eu, es = fr.e_u_array(), fr.e_s_array()
    residual = max(
        float(np.max(np.abs(A @ eu - fr.lam * eu))),
        float(np.max(np.abs(A @ es - fr.nu * es))),
        abs(np.linalg.norm(eu) - 1.0),
        abs(np.linalg.norm(es) - 1.0),
        abs(fr.lam * fr.nu - 1.0),
        abs(fr.lam + fr.nu - 3.0),
        abs((es[0] * eu[1] - es[1] * eu[0]) - 1.0),
    )
    return _result("frame-orthonormal-eigen", residual < 1e-14, f"max residual {residual:.2e}")


def _check_trig_gradient(rng: np.random.Generator) -> Check:
    # Low-frequency modes keep the h^2 truncation of the step-1e-5 central
    # difference below the 1e-8 tolerance being asserted.
    g = (
        TrigPolyScalar.cos_mode(1, 0, 0.7)
        + TrigPolyScalar.sin_mode(1, -1, 0.4)
        + TrigPolyScalar.cos_mode(0, 1, 0.2)
    )
    pts = rng.uniform(size=(100, 2))
    h = 1e-5
    worst = 0.0
    grad = g.gradient_eval(pts)
    for axis in (0, 1):
        shift = np.zeros(2)
        shift[axis] = h
        fd = (g.eval(pts + shift) - g.eval(pts - shift)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(fd - grad[:, axis]))))
    return _result("trig-gradient-vs-fd", worst < 1e-8, f"max deviation {worst:.2e}")


def _check_divergence_zero_mode() -> Check:
    X = TrigPolyVectorField(TrigPolyScalar.sin_mode(2, 1, 0.8), TrigPolyScalar.cos_mode(1, -1, 0.3))
    ok = (0, 0) not in X.divergence().coefficients
    return _result("divergence-zero-mode", ok, "mean of div X vanishes exactly")


def _check_project_lift() -> Check:
    pts = [TorusPoint(0.25, 0.75), TorusPoint(0.0, 0.999)]
    ok = all(project(lift(p)) == p for p in pts)
    ok = ok and float(reduce_mod1(1.0)) == 0.0 and float(reduce_mod1(-0.25)) == 0.75
    ok = ok and float(reduce_mod1(-1e-20)) == 0.0
    return _result("project-lift-roundtrip", ok)


def _check_iterate_group(rng: np.random.Generator) -> Check:
    pts = rng.uniform(size=(100, 2))
    worst = 0.0
    for k, j in [(3, 4), (-5, 2), (7, -7), (-10, -10), (10, -4), (0, 6)]:
        a = iterate_points(pts, k + j)
        b = iterate_points(iterate_points(pts, j), k)
        d = np.abs(a - b)
        d = np.minimum(d, 1.0 - d)
        worst = max(worst, float(d.max()))
    return _result("iterate-group-law", worst < 1e-10, f"max wrapped deviation {worst:.2e}")


def _check_jacobian_t0(family: PerturbationFamily, rng: np.random.Generator) -> Check:
    pts = rng.uniform(size=(50, 2))
    vals = family.jacobian_det_points(0.0, pts)
    ok = bool(np.all(vals == 1.0))
    return _result("jacobian-det-at-zero", ok, "det Df_0 = 1 exactly")


def _check_div_xm_cocycle(family: PerturbationFamily, rng: np.random.Generator) -> Check:
    worst = 0.0
    for p in rng.uniform(size=(10, 2)):
        for m in range(1, 6):
            lhs = divergence_of_Xm(family, m + 1, p)
            rhs = float(family.X.divergence().eval(p)) + divergence_of_Xm(
                family, m, inverse_apply_points(p)
            )
            worst = max(worst, abs(lhs - rhs))
    return _result("div-Xm-cocycle", worst < 1e-12, f"max deviation {worst:.2e}")


def _check_kappa() -> Check:
    worst = 0.0
    for m in range(1, 31):
        resid = abs(cone_gain(kappa(m)) - LAMBDA ** m) / LAMBDA ** m
        worst = max(worst, resid)
    monotone = all(kappa(m + 1) > kappa(m) for m in range(1, 30))
    ok = worst < 1e-12 and monotone and kappa(10) > 10.0
    return _result(
        "cone-aperture-equation",
        ok,
        f"max relative residual {worst:.2e}; monotone = {monotone}; kappa(10) = {kappa(10):.3f}",
    )


def _check_admissibility(cfg: ExperimentConfig) -> Check:
    report = build_curve(cfg).admissibility()
    m = report.min_iterate
    prev = kappa(m - 1) if m > 1 else 0.0
    ok = report.admissible and kappa(m) > report.slope_bound and prev <= report.slope_bound
    return _result(
        "admissibility-minimality",
        ok,
        f"kappa({m}) = {kappa(m):.4f} > bound {report.slope_bound:.4f} >= kappa({m-1}) = {prev:.4f}",
    )


def _check_cov_identity(cfg: ExperimentConfig, theta: DiracObservable, family: PerturbationFamily) -> Check:
    if cfg.tol_quad > 1e-9:
        return _skip("change-of-variables-identity", "skipped-due-to-tolerance (tol_quad too loose)")
    worst = 0.0
    for k in range(0, 11):
        a = term_pre_cov(theta, family.X, k, tol_rel=cfg.tol_quad, panel_budget=cfg.panel_budget)
        b = term_post_cov(theta, family.X, k, tol_rel=cfg.tol_quad, panel_budget=cfg.panel_budget)
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    return _result("change-of-variables-identity", worst <= 1e-8, f"worst relative gap {worst:.2e}")


def _check_routes(cfg: ExperimentConfig, theta: DiracObservable, family: PerturbationFamily):
    s = sum_series(theta, family.X, tol=cfg.tol, tol_rel=cfg.tol_quad, k_max=cfg.k_max, panel_budget=cfg.panel_budget)
    p = spectral_response(theta, family.X, tol=cfg.tol, tol_rel=cfg.tol_quad, k_max=cfg.k_max, panel_budget=cfg.panel_budget)
    gap = abs(s.total - p.total)
    allowed = s.tail_bound + p.tail_bound + 1e-6 * max(1.0, abs(s.total))
    agree = _result("route-agreement", gap <= allowed, f"gap {gap:.2e} <= {allowed:.2e}")

    terms = np.asarray(s.terms)
    mask = np.abs(terms) > 1e-13
    if mask.sum() >= 3:
        ks = np.arange(terms.size)[mask]
        slope = float(np.polyfit(ks, np.log(np.abs(terms[mask])), 1)[0])
        decay = _result(
            "exponential-decay-slope",
            slope <= math.log(NU) + 0.05,
            f"fitted slope {slope:.3f} <= log nu + 0.05 = {math.log(NU)+0.05:.3f}",
        )
    else:
        decay = _skip("exponential-decay-slope", "fewer than 3 terms above 1e-13")
    return [agree, decay]


def _check_pair_linearity(theta: DiracObservable) -> Check:
    phi1 = TrigPolyScalar.cos_mode(1, 0)
    phi2 = TrigPolyScalar.sin_mode(0, 1)
    combo = 2.0 * phi1 + (-3.0) * phi2
    lhs = theta.pair(combo)
    rhs = 2.0 * theta.pair(phi1) - 3.0 * theta.pair(phi2)
    gap = abs(lhs - rhs)
    return _result("pairing-linearity", gap < 1e-12, f"gap {gap:.2e}")


def _check_window_regularity() -> Check:
    edge_exact = float(bump_third_derivative(1.0)) == 0.0 and float(bump_third_derivative(-1.0)) == 0.0
    linear = all(
        abs(float(bump_third_derivative(s * (1.0 - d)))) <= 400.0 * d
        for d in (1e-4, 1e-6, 1e-8)
        for s in (1.0, -1.0)
    )
    return _result(
        "window-third-derivative",
        edge_exact and linear,
        "one-sided third derivative vanishes at the support edge (linear rate)",
    )


def _check_fourier_zero_mode(theta: DiracObservable) -> Check:
    fp = theta.fourier_pair((0, 0))
    mass = theta.pair(None)
    ok = fp.real == mass and fp.imag == 0.0
    return _result("fourier-pair-zero-mode", ok, "identical quadrature path")


def _check_transfer_step() -> Check:
    f = SparseFourierFunction({(1, 0): 0.3 + 0.1j, (-1, 0): 0.3 - 0.1j, (0, 0): 1.0})
    g = f.transfer_step()
    ok = set(g.coefficients) == {(1, -1), (-1, 1), (0, 0)}
    ok = ok and g.coefficients[(1, -1)] == 0.3 + 0.1j
    ok = ok and g.sum_abs_coeffs() == f.sum_abs_coeffs()
    return _result("transfer-step-permutation", ok, "(1,0) -> (1,-1); coefficients preserved")


def _check_response_linearity(cfg: ExperimentConfig, theta: DiracObservable) -> Check:
    X1 = TrigPolyVectorField(TrigPolyScalar.sin_mode(1, 0), TrigPolyScalar.zero())
    X2 = TrigPolyVectorField(TrigPolyScalar.zero(), TrigPolyScalar.cos_mode(0, 1, 0.5))
    kwargs = dict(tol=cfg.tol, tol_rel=cfg.tol_quad, k_max=cfg.k_max, panel_budget=cfg.panel_budget)
    total_sum = sum_series(theta, X1 + X2, **kwargs).total
    split = sum_series(theta, X1, **kwargs).total + sum_series(theta, X2, **kwargs).total
    gap = abs(total_sum - split)
    return _result("response-linearity", gap < 1e-8, f"gap {gap:.2e}")


def _check_coarea(cfg: ExperimentConfig, theta: DiracObservable) -> Check:
    mass = theta.window_mass()
    errs = []
    for eps in (1e-2, 5e-3, 2.5e-3):
        errs.append(abs(theta.mollified(eps).grid_integral(2048) - mass))
    if max(errs) < 1e-10:
        return _result(
            "coarea-consistency",
            True,
            "mollification bias identically zero (linear level set, window constant along it)",
        )
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(2.0) for i in range(len(errs) - 1)]
    ok = all(o >= 1.8 for o in orders)
    return _result(
        "coarea-consistency",
        ok,
        "observed orders " + ", ".join(f"{o:.2f}" for o in orders),
    )


def _check_config_roundtrip(cfg: ExperimentConfig) -> Check:
    text = serialize_config(cfg)
    again = parse_config_text(text, base_dir=cfg.base_dir)
    return _result("config-roundtrip", again == cfg)


def run_validation(cfg: ExperimentConfig) -> list[Check]:
    """Run every deterministic invariant applicable to the configuration."""
    rng = np.random.default_rng(cfg.rng_seed)
    family = build_family(cfg)
    theta = build_observable(cfg)
    checks: list[Check] = []
    for fn in (
        _check_frame,
        lambda: _check_trig_gradient(rng),
        _check_divergence_zero_mode,
        _check_project_lift,
        lambda: _check_iterate_group(rng),
        lambda: _check_jacobian_t0(family, rng),
        lambda: _check_div_xm_cocycle(family, rng),
        _check_kappa,
        lambda: _check_admissibility(cfg),
        lambda: _check_cov_identity(cfg, theta, family),
        lambda: _check_pair_linearity(theta),
        _check_window_regularity,
        lambda: _check_fourier_zero_mode(theta),
        _check_transfer_step,
        lambda: _check_response_linearity(cfg, theta),
        lambda: _check_coarea(cfg, theta),
        lambda: _check_config_roundtrip(cfg),
        lambda: _check_routes(cfg, theta, family),
    ):
        try:
            out = fn()
        except Exception as exc:  # surfaced as a FAIL row, not a crash
            out = ("route-or-invariant-check", "FAIL", f"{type(exc).__name__}: {exc}")
        if isinstance(out, list):
            checks.extend(out)
        else:
            checks.append(out)
    return checks
