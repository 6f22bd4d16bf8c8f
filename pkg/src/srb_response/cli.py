"""Command-line interface.

Subcommands: admissible, respond, validate, oracle, report.
Exit codes: 0 success (including report-level FAIL verdicts), 2 invalid
config, 3 admissibility/hypothesis violation, 4 numerical convergence
failure.  The SRB_RESPONSE_THREADS environment variable caps worker
threads for the coarse-grained oracle work.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .config import (
    ExperimentConfig,
    apply_overrides,
    build_curve,
    build_family,
    build_observable,
    parse_config,
)
from .errors import ConfigError, ConvergenceError, HypothesisError
from .oracle import birkhoff_pair, fd_response, ulam_density, ulam_pairing_estimate
from .reporting import (
    report_for,
    write_admissibility_csv,
    write_comparison_csv,
    write_csv,
    write_series_csv,
)
from .response import spectral_response, sum_series
from .svgplot import heatmap, line_plot, write_columns, write_matrix
from .validation import run_validation

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_CONVERGENCE = 4


def _load_config(args) -> ExperimentConfig:
    cfg = parse_config(args.config)
    cfg = apply_overrides(
        cfg,
        seed=getattr(args, "seed", None),
        out=getattr(args, "out", None),
        routes=getattr(args, "routes", None),
        tol=getattr(args, "tol", None),
    )
    os.makedirs(cfg.out_dir, exist_ok=True)
    return cfg


def cmd_admissible(args) -> int:
    cfg = _load_config(args)
    report = build_curve(cfg).admissibility()
    print(report.text_block())
    path = write_admissibility_csv(cfg.out_dir, report, cfg)
    print(f"wrote {path}")
    return EXIT_OK


def _decay_plot(out_dir: str, results) -> list[str]:
    k_max = max((r.K for r in results), default=0)
    if k_max == 0:
        return []
    ks = np.arange(k_max)
    series = []
    columns = [ks]
    header = ["k"]
    for r in results:
        ys = np.full(k_max, np.nan)
        ys[: r.K] = np.abs(r.terms)
        series.append((r.route, ys))
        columns.append(np.where(np.isnan(ys), 0.0, ys))
        header.append(f"abs_term_{r.route}")
    svg = os.path.join(out_dir, "decay.svg")
    txt = os.path.join(out_dir, "decay.txt")
    line_plot(svg, ks, series, title="Response term decay", xlabel="k", ylabel="|term_k|", logy=True)
    write_columns(txt, header, columns)
    return [svg, txt]


def cmd_respond(args) -> int:
    cfg = _load_config(args)
    report = report_for(cfg, "response run")
    adm = build_curve(cfg).admissibility()
    report.admissibility = adm
    theta = build_observable(cfg)
    family = build_family(cfg)

    analytic = []
    for route in cfg.routes:
        if route == "oracle":
            continue
        runner = sum_series if route == "series" else spectral_response
        start = time.perf_counter()
        result = runner(
            theta,
            family.X,
            tol=cfg.tol,
            tol_rel=cfg.tol_quad,
            k_max=cfg.k_max,
            panel_budget=cfg.panel_budget,
        )
        report.timings.append((route, time.perf_counter() - start))
        analytic.append(result)
        report.artifacts.append(write_series_csv(cfg.out_dir, result, cfg))
        if not result.converged:
            raise ConvergenceError(f"route {result.route} did not converge: {result.notes}")

    report.route_results = list(analytic)
    if len(analytic) == 2:
        gap = abs(analytic[0].total - analytic[1].total)
        allowed = (
            analytic[0].tail_bound
            + analytic[1].tail_bound
            + 1e-6 * max(1.0, abs(analytic[0].total))
        )
        report.add_check("route-agreement", gap <= allowed, f"gap {gap:.3e} <= {allowed:.3e}")

    if "oracle" in cfg.routes:
        reference = analytic[0].total if analytic else None
        start = time.perf_counter()
        fd = fd_response(
            family,
            theta,
            t_step=cfg.t_step,
            eps_schedule=cfg.eps_schedule,
            n_iterates=cfg.n_iterates,
            n_seeds=cfg.n_seeds,
            burn_in=cfg.burn_in,
            rng_seed=cfg.rng_seed,
        )
        report.timings.append(("oracle", time.perf_counter() - start))
        rows = [
            ("fd_response", repr(fd.estimate), repr(fd.stat_error), fd.t_step,
             "", fd.n_iterates, fd.n_seeds, fd.burn_in, fd.rng_seed)
        ] + [
            ("fd_per_eps", repr(v), repr(e), fd.t_step, eps, fd.n_iterates, fd.n_seeds,
             fd.burn_in, fd.rng_seed)
            for v, e, eps in zip(fd.per_eps_estimates, fd.per_eps_errors, fd.eps_schedule)
        ]
        path = os.path.join(cfg.out_dir, "estimates.csv")
        write_csv(path, ["estimator", "value", "std_error", "t_step", "eps", "n_iterates",
                         "n_seeds", "burn_in", "rng_seed"], rows, cfg)
        report.artifacts.append(path)
        if reference is not None:
            gap = abs(fd.estimate - reference)
            dominated = 3.0 * fd.stat_error > max(1e-30, abs(reference))
            if dominated:
                report.add_check(
                    "oracle-agreement",
                    False,
                    f"stat_error dominates: 3 x {fd.stat_error:.3e} exceeds |total| {abs(reference):.3e}",
                )
            else:
                tol = max(0.10 * abs(reference), 3.0 * fd.stat_error)
                report.add_check("oracle-agreement", gap <= tol, f"gap {gap:.3e} <= {tol:.3e}")

    report.artifacts.append(write_comparison_csv(cfg.out_dir, analytic, cfg))
    report.artifacts.extend(_decay_plot(cfg.out_dir, analytic))
    path = report.save(cfg.out_dir)
    print(report.render())
    print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load_config(args)
    checks = run_validation(cfg)
    report = report_for(cfg, "invariant validation")
    for name, status, detail in checks:
        report.checks.append((name, status, detail))
    rows = [(name, status, detail) for name, status, detail in checks]
    path = os.path.join(cfg.out_dir, "validation.csv")
    write_csv(path, ["check", "status", "detail"], rows, cfg)
    report.artifacts.append(path)
    report.save(cfg.out_dir, "report_validate.txt")
    print(report.render())
    n_fail = sum(1 for _, status, _ in checks if status == "FAIL")
    print(f"{n_fail} failing invariant(s)")
    return EXIT_CONVERGENCE if n_fail else EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _load_config(args)
    report = report_for(cfg, "statistical oracle run")
    theta = build_observable(cfg)
    family = build_family(cfg)
    theta_eps = theta.mollified(cfg.mollify_eps)

    t_small = min(0.01, family.validity_radius / 4.0)
    rows = []
    for t in (0.0, t_small):
        start = time.perf_counter()
        bk = birkhoff_pair(
            family, t, theta_eps,
            n_iterates=cfg.n_iterates, burn_in=cfg.burn_in,
            n_seeds=cfg.n_seeds, rng_seed=cfg.rng_seed,
        )
        um, ue, _ = ulam_pairing_estimate(
            family, t, theta_eps,
            grid_n=cfg.grid_n, samples_per_cell=cfg.samples_per_cell,
            rng_seed=cfg.rng_seed, replicates=cfg.ulam_replicates,
        )
        report.timings.append((f"estimators t={t:g}", time.perf_counter() - start))
        rows.append(("birkhoff", repr(bk.mean), repr(bk.std_error), t, cfg.mollify_eps,
                     cfg.n_iterates, cfg.n_seeds, cfg.burn_in, cfg.rng_seed))
        rows.append(("ulam", repr(um), repr(ue), t, cfg.mollify_eps,
                     cfg.grid_n * cfg.grid_n * cfg.samples_per_cell, cfg.ulam_replicates,
                     0, cfg.rng_seed))
        gap = abs(bk.mean - um)
        allowed = 3.0 * (bk.std_error ** 2 + ue ** 2) ** 0.5
        report.add_check(
            f"estimator-consistency-t={t:g}", gap <= allowed, f"gap {gap:.3e} <= {allowed:.3e}"
        )

    start = time.perf_counter()
    fd = fd_response(
        family, theta,
        t_step=cfg.t_step, eps_schedule=cfg.eps_schedule,
        n_iterates=cfg.n_iterates, n_seeds=cfg.n_seeds,
        burn_in=cfg.burn_in, rng_seed=cfg.rng_seed,
    )
    report.timings.append(("fd_response", time.perf_counter() - start))
    rows.append(("fd_response", repr(fd.estimate), repr(fd.stat_error), fd.t_step, "",
                 fd.n_iterates, fd.n_seeds, fd.burn_in, fd.rng_seed))
    for v, e, eps in zip(fd.per_eps_estimates, fd.per_eps_errors, fd.eps_schedule):
        rows.append(("fd_per_eps", repr(v), repr(e), fd.t_step, eps,
                     fd.n_iterates, fd.n_seeds, fd.burn_in, fd.rng_seed))

    path = os.path.join(cfg.out_dir, "estimates.csv")
    write_csv(path, ["estimator", "value", "std_error", "t", "eps",
                     "n_samples", "n_seeds_or_replicates", "burn_in", "rng_seed"], rows, cfg)
    report.artifacts.append(path)

    dens = ulam_density(
        family, t_small,
        grid_n=min(cfg.grid_n, 128),
        samples_per_cell=cfg.samples_per_cell,
        rng_seed=cfg.rng_seed,
    )
    mat = dens.density.reshape(dens.grid_n, dens.grid_n)
    svg = os.path.join(cfg.out_dir, "density.svg")
    txt = os.path.join(cfg.out_dir, "density.txt")
    heatmap(svg, mat, title=f"Ulam density, t = {t_small:g}")
    write_matrix(txt, mat, comment=f"ulam density grid_n={dens.grid_n} t={t_small:g}")
    report.artifacts += [svg, txt]

    path = report.save(cfg.out_dir, "report_oracle.txt")
    print(report.render())
    print(f"wrote {path}")
    return EXIT_OK


def cmd_report(args) -> int:
    out = args.out or "out"
    names = ["report.txt", "report_oracle.txt", "report_validate.txt"]
    found = [os.path.join(out, n) for n in names if os.path.exists(os.path.join(out, n))]
    if not found:
        raise ConfigError(f"no reports found in {out!r}; run respond/oracle/validate first")
    for path in found:
        with open(path) as fh:
            print(fh.read())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srb-response",
        description="Linear response of perturbed cat maps for Dirac observables on curves.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", help="output directory (overrides [run] out_dir)")
        p.add_argument("--seed", type=int, help="RNG seed override")
        p.add_argument("--tol", type=float, help="series tail tolerance override")

    p = sub.add_parser("admissible", help="check leaf admissibility and minimal iterate")
    common(p)
    p.set_defaults(fn=cmd_admissible)

    p = sub.add_parser("respond", help="compute the response by the selected routes")
    common(p)
    p.add_argument("--routes", help="comma list from series,spectral,oracle")
    p.set_defaults(fn=cmd_respond)

    p = sub.add_parser("validate", help="run the deterministic invariant suite")
    common(p)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("oracle", help="run the statistical estimators and fd response")
    common(p)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("report", help="print reports collected in an output directory")
    p.add_argument("--out", help="output directory to read", default="out")
    p.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisError as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
