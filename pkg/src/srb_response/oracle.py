"""Statistical estimation of perturbed SRB averages, independent of the series.

Birkhoff route: long orbits of the perturbed map, averaging a mollified
observable; almost every starting point equidistributes toward the SRB
measure.  Ulam route: a Monte Carlo cell-to-cell transition matrix whose
stationary vector approximates the invariant density.  A central difference
of Birkhoff averages in t, Richardson-extrapolated in the mollification
width, yields a finite-difference estimate of the response used to
cross-validate the analytic routes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .dynamics import PerturbationFamily
from .errors import ConvergenceError
from .observables import DiracObservable, MollifiedObservable

#: Stream indices: (0, seed) orbit seeds, (1, replicate) Ulam replicates.
RNG_ALGORITHM = f"numpy.random.PCG64 (numpy {np.__version__})"

MIN_ORBIT_LENGTH = 10_000


def thread_count() -> int:
    """Worker threads for coarse-grained parallel work (env SRB_RESPONSE_THREADS)."""
    try:
        return max(1, int(os.environ.get("SRB_RESPONSE_THREADS", "1")))
    except ValueError:
        return 1


def _rng(rng_seed: int, *key: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=int(rng_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(seq)


@dataclass(frozen=True)
class OrbitEstimate:
    """Birkhoff-average estimate with a seed-to-seed standard error."""

    mean: float
    std_error: float
    n_iterates: int
    n_seeds: int
    burn_in: int
    rng_seed: int
    t: float
    per_seed_means: tuple = field(default=(), repr=False)


def _draw_starts(n_seeds: int, rng_seed: int) -> np.ndarray:
    starts = np.empty((n_seeds, 2))
    for i in range(n_seeds):
        starts[i] = _rng(rng_seed, 0, i).uniform(size=2)
    return starts


def _compile_component(poly) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Reduce a Hermitian mode set to one cosine per +/- pair for cheap stepping."""
    constant = 0.0
    modes, amps, phases = [], [], []
    seen = set()
    for m, c in poly.coefficients.items():
        if m == (0, 0):
            constant = c.real
            continue
        if m in seen or (-m[0], -m[1]) in seen:
            continue
        seen.add(m)
        modes.append(m)
        amps.append(2.0 * abs(c))
        phases.append(math.atan2(c.imag, c.real))
    return (
        constant,
        np.asarray(modes, dtype=float).reshape(-1, 2),
        np.asarray(amps),
        np.asarray(phases),
    )


class _OrbitStepper:
    """Fused one-step map x -> f_t(x) for an ensemble with per-row t values."""

    _CAT_T = np.array([[2.0, 1.0], [1.0, 1.0]]).T

    def __init__(self, family: PerturbationFamily, t_rows: np.ndarray):
        self.t_rows = t_rows[:, None]
        self.pure_linear = bool(np.all(t_rows == 0.0))
        self.cx = _compile_component(family.X.component_x)
        self.cy = _compile_component(family.X.component_y)

    @staticmethod
    def _component_values(comp, pts) -> np.ndarray:
        const, modes, amps, phases = comp
        if modes.shape[0] == 0:
            return np.full(pts.shape[0], const)
        args = (2.0 * math.pi) * (pts @ modes.T) + phases[None, :]
        return np.cos(args) @ amps + const

    def step(self, x: np.ndarray) -> np.ndarray:
        y = x @ self._CAT_T
        y -= np.floor(y)
        if not self.pure_linear:
            disp = np.stack(
                [self._component_values(self.cx, y), self._component_values(self.cy, y)],
                axis=-1,
            )
            y = y + self.t_rows * disp
            y -= np.floor(y)
        y[y >= 1.0] = 0.0
        return y


def _orbit_means_multi(
    family: PerturbationFamily,
    t_values,
    observables: list[MollifiedObservable],
    n_iterates: int,
    burn_in: int,
    starts: np.ndarray,
    block: int = 65536,
) -> np.ndarray:
    """Per-seed orbit averages at each parameter value; shape (n_obs, n_t, n_seeds).

    One orbit per (t, seed) pair, all advanced together from identical seed
    starts (common random numbers across t and across observables).
    """
    for t in t_values:
        family._check_t(t)
    n_seeds = starts.shape[0]
    n_t = len(t_values)
    t_rows = np.repeat(np.asarray(t_values, dtype=float), n_seeds)
    stepper = _OrbitStepper(family, t_rows)
    x = np.tile(starts, (n_t, 1))
    for _ in range(burn_in):
        x = stepper.step(x)
    sums = np.zeros((len(observables), n_t * n_seeds))
    remaining = n_iterates
    buffer = np.empty((min(block, n_iterates), n_t * n_seeds, 2))
    while remaining > 0:
        m = min(block, remaining)
        for j in range(m):
            x = stepper.step(x)
            buffer[j] = x
        flat = buffer[:m].reshape(-1, 2)
        for i, obs in enumerate(observables):
            sums[i] += obs.eval(flat).reshape(m, n_t * n_seeds).sum(axis=0)
        remaining -= m
    return (sums / n_iterates).reshape(len(observables), n_t, n_seeds)


def birkhoff_pair(
    family: PerturbationFamily,
    t: float,
    theta_eps: MollifiedObservable,
    n_iterates: int = 1_000_000,
    burn_in: int = 1000,
    n_seeds: int = 16,
    rng_seed: int = 0,
    block: int = 65536,
) -> OrbitEstimate:
    """Estimate the perturbed SRB average of a mollified observable.

    Each seed draws its own uniform start from a dedicated RNG stream,
    iterates the perturbed map, discards ``burn_in`` steps, and averages the
    observable over the next ``n_iterates`` states.  The estimate is the
    seed mean; the error bar is the seed standard deviation over sqrt(seeds).
    """
    if n_iterates < MIN_ORBIT_LENGTH:
        raise ValueError(f"n_iterates must be at least {MIN_ORBIT_LENGTH}")
    if n_seeds < 2:
        raise ValueError("need at least two seeds for a standard error")
    family._check_t(t)
    starts = _draw_starts(n_seeds, rng_seed)
    means = _orbit_means_multi(family, [t], [theta_eps], n_iterates, burn_in, starts, block)[0, 0]
    return OrbitEstimate(
        mean=float(means.mean()),
        std_error=float(means.std(ddof=1) / math.sqrt(n_seeds)),
        n_iterates=n_iterates,
        n_seeds=n_seeds,
        burn_in=burn_in,
        rng_seed=rng_seed,
        t=t,
        per_seed_means=tuple(float(v) for v in means),
    )


@dataclass(frozen=True)
class UlamDensity:
    """Stationary cell density of a Monte Carlo transition-matrix discretization."""

    grid_n: int
    density: np.ndarray
    samples_per_cell: int
    rng_seed: int
    t: float
    sweeps: int
    residual: float


def _stratified_offsets(samples_per_cell: int, n_cells: int, rng: np.random.Generator) -> np.ndarray:
    """Sub-cell offsets in [0, 1)^2 per cell, shape (n_cells, samples_per_cell, 2).

    The largest square number of samples is stratified on a regular subgrid
    with jitter; any remainder is uniform.
    """
    s = int(math.isqrt(samples_per_cell))
    n_strat = s * s
    offsets = np.empty((n_cells, samples_per_cell, 2))
    if n_strat:
        ix, iy = np.meshgrid(np.arange(s), np.arange(s), indexing="ij")
        base = np.stack([ix.ravel(), iy.ravel()], axis=-1) / s
        jitter = rng.uniform(size=(n_cells, n_strat, 2)) / s
        offsets[:, :n_strat] = base[None, :, :] + jitter
    extra = samples_per_cell - n_strat
    if extra:
        offsets[:, n_strat:] = rng.uniform(size=(n_cells, extra, 2))
    return offsets


def ulam_density(
    family: PerturbationFamily,
    t: float,
    grid_n: int = 128,
    samples_per_cell: int = 32,
    rng_seed: int = 0,
    max_sweeps: int = 10_000,
    residual_tol: float = 1e-10,
    chunk_cells: int = 65536,
) -> UlamDensity:
    """Stationary density of the sampled Ulam matrix, by power iteration.

    Rows of the transition matrix are built from ``samples_per_cell``
    stratified image samples per cell, so they are stochastic by
    construction.  Power iteration runs until the l1 residual of the left
    fixed vector drops below ``residual_tol``.
    """
    if not 64 <= grid_n <= 1024:
        raise ValueError("grid_n must lie in [64, 1024]")
    family._check_t(t)
    n_cells = grid_n * grid_n
    rng = _rng(rng_seed, 1, 0)
    matrix = scipy.sparse.csr_matrix((n_cells, n_cells))
    cell_ids = np.arange(n_cells)
    for start in range(0, n_cells, chunk_cells):
        ids = cell_ids[start : start + chunk_cells]
        origins = np.stack([ids // grid_n, ids % grid_n], axis=-1) / grid_n
        offsets = _stratified_offsets(samples_per_cell, ids.size, rng)
        pts = origins[:, None, :] + offsets / grid_n
        images = family.perturbed_apply_points(t, pts.reshape(-1, 2))
        dest = np.floor(images * grid_n).astype(np.int64)
        dest = np.clip(dest, 0, grid_n - 1)
        cols = dest[:, 0] * grid_n + dest[:, 1]
        rows = np.repeat(ids, samples_per_cell)
        chunk = scipy.sparse.coo_matrix(
            (np.full(rows.size, 1.0 / samples_per_cell), (rows, cols)),
            shape=(n_cells, n_cells),
        ).tocsr()
        matrix = matrix + chunk

    transpose = matrix.T.tocsr()
    pi = np.full(n_cells, 1.0 / n_cells)
    for sweep in range(1, max_sweeps + 1):
        nxt = transpose @ pi
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - pi).sum())
        pi = nxt
        if residual < residual_tol:
            return UlamDensity(
                grid_n=grid_n,
                density=pi * n_cells,
                samples_per_cell=samples_per_cell,
                rng_seed=rng_seed,
                t=t,
                sweeps=sweep,
                residual=residual,
            )
    raise ConvergenceError(
        f"power iteration stagnated: residual {residual:.3g} after {max_sweeps} sweeps"
    )


def pair_with_density(
    theta_eps: MollifiedObservable, ulam: UlamDensity, subgrid: int = 4, chunk_rows: int = 64
) -> float:
    """Pairing of a mollified observable with an Ulam density.

    The observable is averaged on a ``subgrid`` x ``subgrid`` refinement of
    each cell and weighted by the cell masses.
    """
    n = ulam.grid_n
    fine = n * subgrid
    xs = (np.arange(fine) + 0.5) / fine
    mass = ulam.density / (n * n)
    total = 0.0
    for start in range(0, n, chunk_rows):
        stop = min(n, start + chunk_rows)
        sub = xs[start * subgrid : stop * subgrid]
        gx, gy = np.meshgrid(sub, xs, indexing="ij")
        vals = theta_eps.eval(np.stack([gx.ravel(), gy.ravel()], axis=-1))
        vals = vals.reshape(stop - start, subgrid, n, subgrid).mean(axis=(1, 3))
        total += float(np.sum(vals * mass[start * n : stop * n].reshape(-1, n)))
    return total


def ulam_pairing_estimate(
    family: PerturbationFamily,
    t: float,
    theta_eps: MollifiedObservable,
    grid_n: int = 128,
    samples_per_cell: int = 32,
    rng_seed: int = 0,
    replicates: int = 4,
) -> tuple[float, float, list[float]]:
    """Mean and standard error of the Ulam pairing over independent replicates."""
    if replicates < 2:
        raise ValueError("need at least two replicates for an error bar")

    def one(rep: int) -> float:
        dens = ulam_density(
            family,
            t,
            grid_n=grid_n,
            samples_per_cell=samples_per_cell,
            rng_seed=rng_seed + 7919 * rep,
        )
        return pair_with_density(theta_eps, dens)

    workers = min(thread_count(), replicates)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, range(replicates)))
    else:
        values = [one(rep) for rep in range(replicates)]
    arr = np.asarray(values)
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(replicates)), values


def richardson_weights(eps_schedule) -> np.ndarray:
    """Weights extrapolating an even-order-2 expansion in eps to eps = 0.

    Lagrange basis values at zero on the nodes eps_j^2; exact for estimates
    of the form v + sum_j c_j eps^(2j) up to the schedule length.
    """
    z = np.asarray(eps_schedule, dtype=float) ** 2
    weights = np.empty_like(z)
    for j in range(z.size):
        others = np.delete(z, j)
        weights[j] = np.prod(others / (others - z[j]))
    return weights


@dataclass(frozen=True)
class FiniteDifferenceResponse:
    """Central-difference response estimate with mollification extrapolation."""

    estimate: float
    stat_error: float
    t_step: float
    eps_schedule: tuple
    per_eps_estimates: tuple
    per_eps_errors: tuple
    n_iterates: int
    n_seeds: int
    burn_in: int
    rng_seed: int


def fd_response(
    family: PerturbationFamily,
    theta: DiracObservable,
    t_step: float = 1e-3,
    eps_schedule=(2e-2, 1e-2, 5e-3),
    n_iterates: int = 1_000_000,
    burn_in: int = 1000,
    n_seeds: int = 16,
    rng_seed: int = 0,
    block: int = 65536,
) -> FiniteDifferenceResponse:
    """Finite-difference estimate of the response derivative at t = 0.

    For each mollification width, central-differences the Birkhoff averages
    at +t and -t computed from identical seeds and starting points (common
    random numbers), then Richardson-extrapolates the width to zero assuming
    an even quadratic bias.  Statistical errors propagate in quadrature
    through the extrapolation weights, which is conservative under common
    random numbers.
    """
    eps_schedule = tuple(float(e) for e in eps_schedule)
    if len(eps_schedule) < 2 or any(
        b >= a for a, b in zip(eps_schedule, eps_schedule[1:])
    ):
        raise ValueError("eps_schedule must be strictly decreasing with at least 2 entries")
    if not 0.0 < t_step < family.validity_radius / 2.0:
        raise ValueError("t_step must be positive and below half the validity radius")
    if n_iterates < MIN_ORBIT_LENGTH:
        raise ValueError(f"n_iterates must be at least {MIN_ORBIT_LENGTH}")

    observables = [theta.mollified(eps) for eps in eps_schedule]
    starts = _draw_starts(n_seeds, rng_seed)
    means = _orbit_means_multi(
        family, [+t_step, -t_step], observables, n_iterates, burn_in, starts, block
    )
    diffs = (means[:, 0, :] - means[:, 1, :]) / (2.0 * t_step)  # (n_eps, n_seeds)
    per_eps = diffs.mean(axis=1)
    per_eps_err = diffs.std(axis=1, ddof=1) / math.sqrt(n_seeds)
    weights = richardson_weights(eps_schedule)
    estimate = float(weights @ per_eps)
    stat_error = float(math.sqrt(np.sum((weights * per_eps_err) ** 2)))
    return FiniteDifferenceResponse(
        estimate=estimate,
        stat_error=stat_error,
        t_step=t_step,
        eps_schedule=eps_schedule,
        per_eps_estimates=tuple(float(v) for v in per_eps),
        per_eps_errors=tuple(float(v) for v in per_eps_err),
        n_iterates=n_iterates,
        n_seeds=n_seeds,
        burn_in=burn_in,
        rng_seed=rng_seed,
    )
